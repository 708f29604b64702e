use std::path::Path;

use hardylab::functionals::{anilog_check, eval_ik};
use hardylab::probes::{
    default_sweep_scales, estimate_constant, random_suite, residual_grid, sharpness_sweep, spherical_mode_check,
    trace_suite,
};
use hardylab::transforms::{ground_state_energy, quotient_pair};
use hardylab::weights::{eval_derivatives, eval_ln_f, eval_x};
use hardylab::{GroundState, HardyConfig, HardyError, QuotientReport, Regime, SweepReport, Target, Weights, MAX_DEPTH};

use crate::output::{num, plot_path, write_plot, write_table, Table};
use crate::settings::Settings;
use crate::Fail;

/// Errors caused by the request itself map to exit 2, the rest to exit 1.
fn classify(e: HardyError) -> Fail {
    match e {
        HardyError::Domain { .. }
        | HardyError::Depth(_)
        | HardyError::Regime(_)
        | HardyError::Parameter(_)
        | HardyError::Precondition(_) => Fail::Config(e.to_string()),
        _ => Fail::Check(e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// weights

pub struct WeightGrid {
    pub t: Option<f64>,
    pub t_min: f64,
    pub t_max: Option<f64>,
    pub points: usize,
}

fn weight_points(s: &Settings, g: &WeightGrid, d_given: bool) -> Result<Vec<f64>, Fail> {
    if let Some(t) = g.t {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Fail::Config(format!("t = {t} outside (0, 1]")));
        }
        return Ok(vec![t]);
    }
    // with an explicit D the grid stops at t = R/D
    let hi = g.t_max.unwrap_or(if d_given { 1.0 / (2.0 * s.d_mult) } else { 1.0 });
    let lo = g.t_min;
    if !(lo > 0.0 && hi <= 1.0 && lo < hi && g.points >= 2) {
        return Err(Fail::Config(format!("bad t grid [{lo}, {hi}] with {} points", g.points)));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..g.points)
        .map(|j| if j + 1 == g.points { hi } else { (a + (b - a) * j as f64 / (g.points - 1) as f64).exp() })
        .collect())
}

pub fn weights(s: &Settings, g: &WeightGrid, d_given: bool) -> Result<(), Fail> {
    let k = s.k;
    if k == 0 || k > MAX_DEPTH {
        return Err(Fail::Config(format!("k = {k} outside 1..={MAX_DEPTH}")));
    }
    let ts = weight_points(s, g, d_given)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=k).map(|i| format!("X_{i}")));
    header.extend([format!("Y_{k}"), format!("Z_{k}"), "dX".into(), "dY".into(), "dZ".into()]);
    let mut table = Table::new(&header);
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); k + 2];
    for &t in &ts {
        let w = Weights::new(k, t).map_err(classify)?;
        let d = eval_derivatives(k, t).map_err(classify)?;
        let mut row = vec![num(t)];
        for i in 1..=k {
            row.push(num(w.x(i)));
            series[i - 1].push((t, w.x(i)));
        }
        series[k].push((t, w.yk()));
        series[k + 1].push((t, w.zk()));
        row.extend([w.yk(), w.zk(), d.dx, d.dy, d.dz].map(num));
        table.push(row);
    }
    let out = s.out_or("weights.csv");
    write_table(&out, &table)?;
    for (i, pts) in series.iter().enumerate() {
        let name = match i {
            i if i < k => format!("X{}", i + 1),
            i if i == k => format!("Y{k}"),
            _ => format!("Z{k}"),
        };
        write_plot(&plot_path(&out, &name), "t", &name, pts)?;
    }
    eprintln!("weights: {} rows written to {}", ts.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    id: &'static str,
    subject: String,
    margin: f64,
    err_est: f64,
    pass: bool,
}

impl Check {
    fn margin(id: &'static str, subject: String, margin: f64, err_est: f64) -> Self {
        Check {
            id,
            subject,
            margin,
            err_est,
            pass: margin.is_finite() && margin >= -err_est,
        }
    }

    fn error(id: &'static str, subject: String, e: &HardyError) -> Self {
        eprintln!("verify: {id} on {subject}: {e}");
        Check {
            id,
            subject,
            margin: f64::NAN,
            err_est: f64::NAN,
            pass: false,
        }
    }
}

fn weight_checks(k: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let depth = k.max(1) + 1;
    for i in 1..=depth {
        for s in [0.1, 0.5, 0.9] {
            let subject = format!("i={i} s={s}");
            // the round trip goes through ln F_i; points where even ln F_i
            // leaves the double range are skipped
            let l = match eval_ln_f(i, s) {
                Ok(l) => l,
                Err(HardyError::Domain { .. }) => continue,
                Err(e) => {
                    out.push(Check::error("weights.round_trip", subject, &e));
                    continue;
                }
            };
            match Weights::from_ln(i, l) {
                Ok(w) => out.push(Check::margin("weights.round_trip", subject, 1e-12 * s - (w.x(i) - s).abs(), 0.0)),
                Err(e) => out.push(Check::error("weights.round_trip", subject, &e)),
            }
        }
    }
    for t in [1e-6, 1e-3, 0.1, 0.5, 0.9] {
        let subject = format!("k={depth} t={t}");
        let h = 1e-5 * t;
        let exact = eval_derivatives(depth, t);
        let fd = eval_x(depth, t + h).and_then(|a| eval_x(depth, t - h).map(|b| (a - b) / (2.0 * h)));
        match (exact, fd) {
            (Ok(d), Ok(fd)) => out.push(Check::margin(
                "weights.derivative",
                subject,
                1e-6 - (fd - d.dx).abs() / d.dx,
                0.0,
            )),
            (Err(e), _) | (_, Err(e)) => out.push(Check::error("weights.derivative", subject, &e)),
        }
    }
    out
}

fn run_verify(s: &Settings, cfg: &HardyConfig) -> Result<Vec<Check>, Fail> {
    if s.trials == 0 {
        return Err(Fail::Config("the trial set is empty (trials = 0)".into()));
    }
    let suite = random_suite(cfg, s.trials, s.seed).map_err(classify)?;
    let mut checks = weight_checks(cfg.k);

    for u in &suite {
        let name = u.name();
        match eval_ik(u, cfg) {
            Ok(r) => checks.push(Check::margin("positivity", name.clone(), r.ik, r.err_est)),
            Err(e) => checks.push(Check::error("positivity", name.clone(), &e)),
        }
        match anilog_check(u, cfg) {
            Ok(m) => checks.push(Check::margin("elementary_hardy", name.clone(), m.margin, m.err_est)),
            Err(e) => checks.push(Check::error("elementary_hardy", name.clone(), &e)),
        }
        if cfg.regime() == Regime::Subcritical {
            match quotient_pair(u, cfg) {
                Ok(q) => checks.push(Check::margin(
                    "emden_fowler_invariance",
                    name.clone(),
                    1e-6 * q.q_r - (q.q_r - q.q_tau).abs(),
                    0.0,
                )),
                Err(e) => checks.push(Check::error("emden_fowler_invariance", name.clone(), &e)),
            }
        }
        if cfg.p == 2.0 {
            let energy = GroundState::new(*cfg, 0.0).and_then(|gs| ground_state_energy(u, &gs));
            match (eval_ik(u, cfg), energy) {
                (Ok(r), Ok(e)) => checks.push(Check::margin(
                    "energy_identity",
                    name.clone(),
                    1e-8 * e.value - (r.ik - e.value).abs(),
                    0.0,
                )),
                (Err(e), _) | (_, Err(e)) => checks.push(Check::error("energy_identity", name.clone(), &e)),
            }
        }
        match trace_suite(cfg, std::slice::from_ref(u)) {
            Ok(ms) => {
                let worst = ms
                    .iter()
                    .min_by(|a, b| (a.margin + a.err_est).total_cmp(&(b.margin + b.err_est)))
                    .expect("trace grid is non-empty");
                checks.push(Check::margin("trace", name.clone(), worst.margin, worst.err_est));
            }
            Err(e) => checks.push(Check::error("trace", name.clone(), &e)),
        }
    }

    let subject = format!("ground state a={}", if cfg.p >= 2.0 { 0.0 } else { cfg.p });
    match GroundState::default_for(*cfg) {
        Ok(gs) => {
            let mut worst = f64::INFINITY;
            for r in residual_grid(cfg.big_r) {
                match gs.residual(r) {
                    Ok(v) => worst = worst.min(cfg.sign() * v),
                    Err(_) => worst = f64::NAN,
                }
            }
            checks.push(Check::margin("supersolution", subject, worst, 0.0));
        }
        Err(e) => checks.push(Check::error("supersolution", subject, &e)),
    }

    if cfg.p >= 2.0 && cfg.regime() == Regime::Subcritical {
        if let Some(u) = suite.first() {
            let subject = format!("l=1 {}", u.name());
            match spherical_mode_check(cfg, 1, u.clone()) {
                Ok(r) => checks.push(Check::margin("spherical_mode", subject, r.margin, r.err_est)),
                Err(e) => checks.push(Check::error("spherical_mode", subject, &e)),
            }
        }
    }
    Ok(checks)
}

pub fn verify(s: &Settings) -> Result<(), Fail> {
    let cfg = s.hardy()?;
    let checks = run_verify(s, &cfg)?;
    let mut table = Table::new(&["check", "config", "margin", "err_est", "verdict"]);
    let desc = s.describe(&cfg);
    for c in &checks {
        table.push(vec![
            c.id.to_string(),
            format!("{desc} {}", c.subject),
            num(c.margin),
            num(c.err_est),
            if c.pass { "pass" } else { "fail" }.to_string(),
        ]);
    }
    let out = s.out_or("verify.csv");
    write_table(&out, &table)?;
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    eprintln!("verify: {} checks, {} failed ({})", checks.len(), failed.len(), out.display());
    for c in &failed {
        eprintln!("  fail {} {}: margin {:e}", c.id, c.subject, c.margin);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Fail::Check(format!("{} of {} checks failed", failed.len(), checks.len())))
    }
}

// ---------------------------------------------------------------------------
// estimate and sweep

fn estimate_table(rep: &QuotientReport, s: &Settings, cfg: &HardyConfig) -> Table {
    let mut t = Table::new(&[
        "target",
        "family",
        "n",
        "p",
        "k",
        "d_mult",
        "seed",
        "budget",
        "numerator",
        "denominator",
        "ratio",
        "params",
        "iterations",
        "evaluations",
        "converged",
    ]);
    let params: Vec<String> = rep.params.iter().map(|&x| num(x)).collect();
    t.push(vec![
        rep.target.to_string(),
        rep.family.to_string(),
        cfg.n.to_string(),
        num(cfg.p),
        cfg.k.to_string(),
        num(s.d_mult),
        s.seed.to_string(),
        s.budget.to_string(),
        num(rep.numerator),
        num(rep.denominator),
        num(rep.ratio),
        params.join(";"),
        rep.iterations.to_string(),
        rep.evaluations.to_string(),
        rep.converged.to_string(),
    ]);
    t
}

fn run_estimate(s: &Settings, cfg: &HardyConfig, target: Target, out: &Path) -> Result<(), Fail> {
    if s.budget == 0 {
        return Err(Fail::Config("budget must be positive".into()));
    }
    let rep = estimate_constant(target, cfg, s.family, s.budget, s.seed).map_err(classify)?;
    write_table(out, &estimate_table(&rep, s, cfg))?;
    eprintln!(
        "estimate: {target} {} ratio {:.6e} after {} evaluations{} ({})",
        s.family,
        rep.ratio,
        rep.evaluations,
        if rep.converged { "" } else { ", budget exhausted" },
        out.display()
    );
    Ok(())
}

pub fn estimate(s: &Settings, target: Option<Target>) -> Result<(), Fail> {
    let cfg = s.hardy()?;
    let target = target.unwrap_or_else(|| s.target_for(&cfg));
    run_estimate(s, &cfg, target, &s.out_or("estimate.csv"))
}

fn sweep_table(rep: &SweepReport) -> Table {
    let mut t = Table::new(&["scale", "x", "log10_delta", "ik", "rhs", "ratio", "err_est", "ok"]);
    for r in &rep.rows {
        t.push(vec![
            num(r.scale),
            num(r.x),
            num(r.log10_delta),
            num(r.ik),
            num(r.rhs),
            num(r.ratio),
            num(r.err_est),
            r.ok.to_string(),
        ]);
    }
    t
}

fn run_sweep(cfg: &HardyConfig, target: Target, eps: f64, out: &Path) -> Result<(), Fail> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Fail::Config(format!("eps = {eps} outside [0, 1]")));
    }
    let scales = default_sweep_scales(target, cfg);
    let rep = sharpness_sweep(target, cfg, eps, &scales).map_err(classify)?;
    write_table(out, &sweep_table(&rep))?;
    let pts: Vec<(f64, f64)> = rep.rows.iter().filter(|r| r.ok).map(|r| (r.x, r.ratio)).collect();
    write_plot(&plot_path(out, "ratio"), "x", "ratio", &pts)?;
    let slope = rep.slope.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    eprintln!(
        "sweep: {target} eps={eps} rows={} failed={} decay={:.4e} slope={slope} monotone={} ({})",
        rep.rows.len(),
        rep.failed,
        rep.decay,
        rep.monotone,
        out.display()
    );
    if 5 * rep.failed > rep.rows.len() {
        return Err(Fail::Check(format!("{} of {} sweep rows failed", rep.failed, rep.rows.len())));
    }
    Ok(())
}

pub fn sweep(s: &Settings, target: Option<Target>, eps: Option<f64>) -> Result<(), Fail> {
    let cfg = s.hardy()?;
    let target = target.unwrap_or_else(|| s.target_for(&cfg));
    run_sweep(&cfg, target, eps.unwrap_or(s.eps), &s.out_or("sweep.csv"))
}

// ---------------------------------------------------------------------------
// report

/// Runs every experiment for one configuration into a directory.
pub fn report(s: &Settings) -> Result<(), Fail> {
    let cfg = s.hardy()?;
    let dir = s.out_or("report");
    let target = s.target_for(&cfg);
    let mut failures = Vec::new();
    let mut note = |what: &str, r: Result<(), Fail>| -> Result<(), Fail> {
        match r {
            Ok(()) => Ok(()),
            Err(Fail::Check(m)) => {
                failures.push(format!("{what}: {m}"));
                Ok(())
            }
            Err(e) => Err(e),
        }
    };
    let ws = Settings {
        out: Some(dir.join("weights.csv")),
        k: cfg.k.max(1),
        ..s.clone()
    };
    let grid = WeightGrid {
        t: None,
        t_min: s.t_min,
        t_max: None,
        points: s.points,
    };
    note("weights", weights(&ws, &grid, false))?;
    let vs = Settings {
        out: Some(dir.join("verify.csv")),
        ..s.clone()
    };
    note("verify", verify(&vs))?;
    note("estimate", run_estimate(s, &cfg, target, &dir.join("estimate.csv")))?;
    if matches!(target, Target::TheoremA | Target::TheoremB) {
        note("sweep control", run_sweep(&cfg, target, 1.0, &dir.join("sweep-control.csv")))?;
        note("sweep reduced", run_sweep(&cfg, target, s.eps, &dir.join("sweep-reduced.csv")))?;
    }
    if failures.is_empty() {
        eprintln!("report: written to {}", dir.display());
        Ok(())
    } else {
        Err(Fail::Check(failures.join("; ")))
    }
}
