use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hardylab::functionals::eval_ik;
use hardylab::probes::{quasi_min_scale, quasi_tau_eval};
use hardylab::transforms::quotient_pair;
use hardylab::weights::{eval_derivatives, eval_z_inf};
use hardylab::{HardyConfig, PolyBump, Weights};

fn cfg(n: usize, p: f64, k: usize) -> HardyConfig {
    HardyConfig::with_diam_mult(n, p, k, 1.0, 4f64.exp()).unwrap()
}

fn weights(c: &mut Criterion) {
    let mut g = c.benchmark_group("weights");
    for k in [1usize, 4, 16] {
        g.bench_with_input(BenchmarkId::new("stack", k), &k, |b, &k| {
            b.iter(|| Weights::new(k, black_box(1e-7)).unwrap().zk())
        });
        g.bench_with_input(BenchmarkId::new("derivatives", k), &k, |b, &k| {
            b.iter(|| eval_derivatives(k, black_box(0.3)).unwrap())
        });
    }
    g.bench_function("z_inf", |b| b.iter(|| eval_z_inf(black_box(1e-3), 1e-12).unwrap()));
    g.finish();
}

fn functionals(c: &mut Criterion) {
    let u = PolyBump::new(1.0, 2.0, 2.0).unwrap();
    let mut g = c.benchmark_group("functionals");
    for (n, p, k) in [(3, 2.0, 0), (3, 1.5, 2), (5, 3.0, 1)] {
        let cf = cfg(n, p, k);
        let id = format!("n{n}_p{p}_k{k}");
        g.bench_function(BenchmarkId::new("eval_ik", &id), |b| b.iter(|| eval_ik(black_box(&u), &cf).unwrap()));
        g.bench_function(BenchmarkId::new("quotient_pair", &id), |b| {
            b.iter(|| quotient_pair(black_box(&u), &cf).unwrap())
        });
    }
    g.finish();
}

fn concentrating_family(c: &mut Criterion) {
    let mut g = c.benchmark_group("concentrating_family");
    for (n, p, k) in [(3, 2.0, 0), (3, 1.5, 1), (3, 6.0, 1)] {
        let cf = cfg(n, p, k);
        let t = 8.0 * quasi_min_scale(&cf);
        g.bench_function(BenchmarkId::new("tau_eval", format!("n{n}_p{p}_k{k}")), |b| {
            b.iter(|| quasi_tau_eval(&cf, black_box(t), 0.5).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, weights, functionals, concentrating_family);
criterion_main!(benches);
