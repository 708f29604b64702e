use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hardylab::{Family, HardyConfig, QuadSettings, Regime, Target};

use crate::Fail;

/// Keys accepted in a config file, by section.
const KEYS: &[(&str, &[&str])] = &[
    ("problem", &["n", "p", "k", "radius", "d_mult"]),
    ("run", &["seed", "budget", "trials", "out"]),
    ("probe", &["target", "family", "eps"]),
    ("weights", &["t", "t_min", "t_max", "points"]),
    ("quad", &["order", "sigma", "r_min_ratio", "top_grading", "subdivide"]),
];

pub const QUAD_ENV: &str = "HARDYLAB_QUAD_ORDER";

/// Parsed `key = value` file; keys are stored as `section.key`.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Fail> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Fail::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Fail::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        let mut section: Option<&str> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = lineno + 1;
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| format!("line {at}: unterminated section header"))?
                    .trim();
                let known = KEYS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| format!("line {at}: unknown section [{name}]"))?;
                section = Some(known.0);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {at}: expected key = value"))?;
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            let full = match section {
                Some(s) => {
                    let keys = KEYS.iter().find(|(n, _)| *n == s).map(|(_, k)| *k).unwrap_or(&[]);
                    if !keys.contains(&key) {
                        return Err(format!("line {at}: unknown key {key:?} in [{s}]"));
                    }
                    format!("{s}.{key}")
                }
                None => {
                    let owner = KEYS
                        .iter()
                        .find(|(_, keys)| keys.contains(&key))
                        .ok_or_else(|| format!("line {at}: unknown key {key:?}"))?;
                    format!("{}.{key}", owner.0)
                }
            };
            if values.insert(full.clone(), value.to_string()).is_some() {
                return Err(format!("line {at}: duplicate key {full}"));
            }
        }
        Ok(ConfigFile { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Fail> {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| Fail::Config(format!("invalid value {v:?} for {key}"))))
            .transpose()
    }
}

/// Flags shared by all subcommands; `None` falls back to the config file.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct Common {
    /// Config file with `key = value` lines and [section] headers
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Space dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// Exponent p
    #[arg(long)]
    pub p: Option<f64>,
    /// Depth of the logarithmic remainder
    #[arg(long)]
    pub k: Option<usize>,
    /// Ball radius R
    #[arg(long)]
    pub radius: Option<f64>,
    /// D as a multiple of the ball diameter
    #[arg(long = "D-mult")]
    pub d_mult: Option<f64>,
    /// Trial family: bump, polymix or quasi
    #[arg(long)]
    pub family: Option<String>,
    /// Evaluation budget of each optimizer restart
    #[arg(long)]
    pub budget: Option<usize>,
    /// Number of random trial profiles
    #[arg(long)]
    pub trials: Option<usize>,
    /// Random seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (directory for `report`)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub radius: f64,
    pub d_mult: f64,
    pub family: Family,
    pub budget: usize,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub target: Option<Target>,
    pub eps: f64,
    pub t: Option<f64>,
    pub t_min: f64,
    pub t_max: Option<f64>,
    pub points: usize,
    pub quad: QuadSettings,
    pub(crate) file: ConfigFile,
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

impl Settings {
    pub fn resolve(common: &Common) -> Result<Self, Fail> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let family: String = pick(common.family.clone(), file.get("probe.family")?, "bump".into());
        let family: Family = family.parse().map_err(|e: hardylab::HardyError| Fail::Config(e.to_string()))?;
        let target: Option<String> = file.get("probe.target")?;
        let target = target
            .map(|t| t.parse::<Target>())
            .transpose()
            .map_err(|e| Fail::Config(e.to_string()))?;
        let mut quad = QuadSettings::default();
        if let Some(v) = file.get("quad.order")? {
            quad.order = v;
        }
        if let Some(v) = file.get("quad.sigma")? {
            quad.sigma = v;
        }
        if let Some(v) = file.get("quad.r_min_ratio")? {
            quad.r_min_ratio = v;
        }
        if let Some(v) = file.get("quad.top_grading")? {
            quad.top_grading = v;
        }
        if let Some(v) = file.get("quad.subdivide")? {
            quad.subdivide = v;
        }
        if let Ok(v) = std::env::var(QUAD_ENV) {
            quad.order = v
                .trim()
                .parse()
                .map_err(|_| Fail::Config(format!("{QUAD_ENV} = {v:?} is not an integer")))?;
        }
        quad.validate().map_err(|e| Fail::Config(e.to_string()))?;
        if quad.order > 128 {
            return Err(Fail::Config(format!("quadrature order {} above 128", quad.order)));
        }
        let s = Settings {
            n: pick(common.n, file.get("problem.n")?, 3),
            p: pick(common.p, file.get("problem.p")?, 2.0),
            k: pick(common.k, file.get("problem.k")?, 1),
            radius: pick(common.radius, file.get("problem.radius")?, 1.0),
            d_mult: pick(common.d_mult, file.get("problem.d_mult")?, 4f64.exp()),
            family,
            budget: pick(common.budget, file.get("run.budget")?, 40),
            trials: pick(common.trials, file.get("run.trials")?, 10),
            seed: pick(common.seed, file.get("run.seed")?, 1),
            out: common.out.clone().or(file.get::<String>("run.out")?.map(PathBuf::from)),
            target,
            eps: file.get("probe.eps")?.unwrap_or(0.5),
            t: file.get("weights.t")?,
            t_min: file.get("weights.t_min")?.unwrap_or(1e-12),
            t_max: file.get("weights.t_max")?,
            points: file.get("weights.points")?.unwrap_or(100),
            quad,
            file,
        };
        Ok(s)
    }

    pub fn file_has(&self, key: &str) -> bool {
        self.file.values.contains_key(key)
    }

    /// The problem tuple with D = d_mult * diam, validated.
    pub fn hardy(&self) -> Result<HardyConfig, Fail> {
        if !(self.d_mult >= 1.0) {
            return Err(Fail::Config(format!("D multiplier {} must be at least 1", self.d_mult)));
        }
        HardyConfig::with_diam_mult(self.n, self.p, self.k, self.radius, self.d_mult)
            .map(|c| c.with_quad(self.quad))
            .map_err(|e| Fail::Config(e.to_string()))
    }

    /// Explicit target, or the regime default.
    pub fn target_for(&self, cfg: &HardyConfig) -> Target {
        self.target.unwrap_or(match cfg.regime() {
            Regime::Subcritical => Target::TheoremA,
            Regime::Morrey => Target::TheoremB,
        })
    }

    pub fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    pub fn describe(&self, cfg: &HardyConfig) -> String {
        format!("n={} p={} k={} R={} D={}", cfg.n, cfg.p, cfg.k, cfg.big_r, cfg.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_bare_keys() {
        let f = ConfigFile::parse("n = 5\n[problem]\np = 3 # exponent\n\n[run]\nseed = 7\n").unwrap();
        assert_eq!(f.get::<usize>("problem.n").unwrap(), Some(5));
        assert_eq!(f.get::<f64>("problem.p").unwrap(), Some(3.0));
        assert_eq!(f.get::<u64>("run.seed").unwrap(), Some(7));
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert!(ConfigFile::parse("[problem]\nq = 1\n").is_err());
        assert!(ConfigFile::parse("[nope]\n").is_err());
        assert!(ConfigFile::parse("colour = red\n").is_err());
        assert!(ConfigFile::parse("[run]\nseed 3\n").is_err());
        assert!(ConfigFile::parse("n = 3\n[problem]\nn = 4\n").is_err());
    }
}
