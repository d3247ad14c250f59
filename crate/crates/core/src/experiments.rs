//! Builtin registry, rate experiments over an `n` grid, and log-log fits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::{build_limit_measure, LimitKind, LimitMeasure};
use crate::problem::builtin::{by_name, BUILTIN_NAMES};
use crate::problem::json::resolve_problem;
use crate::problem::{Component, GibbsFamily};
use crate::sampling::{sample_gibbs, sample_limit, SeedSpec};
use crate::scalar::Real;
use crate::transport::{
    coupling_upper_bound, empirical_wp, gaussian_dirac_estimate, semi_discrete_to_atoms, TransportEstimate,
};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CONCENTRA_THREADS";

/// `16·2^k` for `k = 0..=8`.
pub fn default_n_grid() -> Vec<u64> {
    (0..=8).map(|k| 16u64 << k).collect()
}

/// Every builtin family, validated. `volcano` appears in dimensions 2 and 3.
pub fn registry<T: Real>() -> Result<Vec<GibbsFamily<T>>> {
    let mut out = Vec::new();
    for name in BUILTIN_NAMES {
        let dims: &[usize] = if name == "volcano" { &[2, 3] } else { &[1] };
        for &d in dims {
            let fam = by_name::<T>(name, Some(d))?;
            fam.ensure_valid()?;
            out.push(fam);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Exact OT from Gibbs samples to a discrete limit.
    SemiDiscrete,
    /// Tubular coupling bound.
    Coupling,
    /// Exact OT between Gibbs samples and an equal number of limit samples.
    Empirical,
    /// Gaussian-to-Dirac formula with variance `1/(nH)`; single point
    /// minimum in one dimension only.
    ClosedForm,
}

impl EstimatorKind {
    pub fn is_monte_carlo(self) -> bool {
        self != EstimatorKind::ClosedForm
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
            .map_err(|_| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

fn default_replicates() -> usize {
    5
}
fn default_samples() -> usize {
    2048
}
fn default_p() -> u32 {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin name or path to a JSON problem.
    pub problem: String,
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default = "default_p")]
    pub p: u32,
    pub method: EstimatorKind,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Output prefix; `<prefix>.csv` and `<prefix>.json` are written.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: impl Into<String>, method: EstimatorKind) -> Self {
        Self {
            problem: problem.into(),
            dimension: None,
            p: default_p(),
            method,
            n_grid: default_n_grid(),
            replicates: default_replicates(),
            sample_count: default_samples(),
            master_seed: 0,
            output: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        if self.n_grid.len() < 5 {
            return bad(format!("n_grid needs at least 5 points (got {})", self.n_grid.len()));
        }
        if self.n_grid.contains(&0) {
            return bad("n_grid entries must be positive".into());
        }
        let ratio = self.n_grid[1] as f64 / self.n_grid[0] as f64;
        let geometric = ratio > 1.0
            && self
                .n_grid
                .windows(2)
                .all(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() < 1e-9);
        if !geometric {
            return bad("n_grid must be an increasing geometric sequence".into());
        }
        let min_reps = if self.method.is_monte_carlo() { 3 } else { 1 };
        if self.replicates < min_reps {
            return bad(format!("{:?} needs at least {min_reps} replicates", self.method));
        }
        if self.method.is_monte_carlo() && !(2..=crate::transport::MAX_SUPPORT).contains(&self.sample_count) {
            return bad(format!(
                "sample_count must lie in 2..={}",
                crate::transport::MAX_SUPPORT
            ));
        }
        Ok(())
    }
}

/// One estimate of `W^p(μₙ, μ)` with the chosen estimator.
pub fn estimate_distance<T: Real>(
    family: &GibbsFamily<T>,
    limit: &LimitMeasure<T>,
    n: u64,
    p: u32,
    method: EstimatorKind,
    count: usize,
    seed: SeedSpec,
) -> Result<TransportEstimate<T>> {
    match method {
        EstimatorKind::SemiDiscrete => {
            if !matches!(limit.kind, LimitKind::Discrete { .. }) {
                return Err(Error::InvalidConfig("semi_discrete needs a discrete limit".into()));
            }
            let xs = sample_gibbs(family, n, count, seed)?;
            semi_discrete_to_atoms(&xs, limit, p)
        }
        EstimatorKind::Coupling => coupling_upper_bound(family, n, limit, count, seed, p),
        EstimatorKind::Empirical => {
            let xs = sample_gibbs(family, n, count, seed)?;
            let ys = sample_limit(limit, count, seed.with_stream(seed.stream_id ^ (1 << 62)))?;
            empirical_wp(&xs, &ys, p)
        }
        EstimatorKind::ClosedForm => {
            let location = match family.components() {
                [Component::FinitePoint { location }] if family.dim() == 1 => location,
                _ => {
                    return Err(Error::InvalidConfig(
                        "closed_form needs a single point minimum in one dimension".into(),
                    ))
                }
            };
            let h = family.normal_hessian(0, location)?.get(0, 0);
            gaussian_dirac_estimate(T::one() / (T::lit(n as f64) * h), p)
        }
    }
}

/// Least-squares line through `(ln n, ln value)`.
#[derive(Clone, Debug, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_loglog(pairs: &[(f64, f64)]) -> Result<LogLogFit> {
    if pairs.len() < 5 {
        return Err(Error::InvalidConfig(format!("fit needs at least 5 points (got {})", pairs.len())));
    }
    for &(n, v) in pairs {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue(v));
        }
        if !(n > 0.0) {
            return Err(Error::NonPositiveValue(n));
        }
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub n: u64,
    pub replicate: usize,
    pub value: f64,
    pub standard_error: Option<f64>,
}

/// Replicate summary at one `n`.
#[derive(Clone, Debug, Serialize)]
pub struct PerN {
    pub n: u64,
    pub mean: f64,
    pub sd: f64,
    /// `sd/√replicates`.
    pub se: f64,
    pub replicates: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub per_n: Vec<PerN>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub problem: String,
    pub fit: Option<RateFit>,
    pub cells: Vec<CellResult>,
    pub partial: bool,
    pub error: Option<String>,
}

impl ExperimentReport {
    /// Raw per-cell values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,replicate,value,standard_error\n");
        for c in &self.cells {
            let se = c.standard_error.map_or(String::new(), |v| format!("{v:e}"));
            let _ = writeln!(out, "{},{},{:e},{}", c.n, c.replicate, c.value, se);
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<prefix>.csv` and `<prefix>.json`.
    pub fn write(&self, prefix: impl AsRef<Path>) -> Result<()> {
        let prefix = prefix.as_ref();
        std::fs::write(with_suffix(prefix, "csv"), self.to_csv())?;
        std::fs::write(with_suffix(prefix, "json"), self.summary_json()?)?;
        Ok(())
    }
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Thread count from `CONCENTRA_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
}

fn summarize(n: u64, values: &[f64]) -> PerN {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    PerN {
        n,
        mean,
        sd,
        se: sd / k.sqrt(),
        replicates: values.len(),
    }
}

/// Runs every `(n, replicate)` cell in parallel, each on its own random
/// stream, and fits the replicate means. A failing cell stops the report at
/// that cell: later cells are discarded and the report is marked partial.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let family = resolve_problem::<f64>(&cfg.problem, cfg.dimension)?;
    let limit = build_limit_measure(&family)?;
    if cfg.method == EstimatorKind::SemiDiscrete && limit.as_discrete().is_none() {
        return Err(Error::InvalidConfig("semi_discrete needs a discrete limit".into()));
    }
    let cells: Vec<(usize, u64, usize)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..cfg.replicates).map(move |r| (i, n, r)))
        .collect();
    let run = |&(i, n, r): &(usize, u64, usize)| -> Result<CellResult> {
        let seed = SeedSpec::new(cfg.master_seed, (i * cfg.replicates + r) as u64);
        let est = estimate_distance(&family, &limit, n, cfg.p, cfg.method, cfg.sample_count, seed)?;
        Ok(CellResult {
            n,
            replicate: r,
            value: est.value,
            standard_error: est.standard_error,
        })
    };
    let outcomes: Vec<Result<CellResult>> = match thread_cap() {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| cells.par_iter().map(run).collect()),
        None => cells.par_iter().map(run).collect(),
    };
    let mut done = Vec::with_capacity(outcomes.len());
    let mut error = None;
    for o in outcomes {
        match o {
            Ok(c) => done.push(c),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let per_n: Vec<PerN> = cfg
        .n_grid
        .iter()
        .filter_map(|&n| {
            let vals: Vec<f64> = done.iter().filter(|c| c.n == n).map(|c| c.value).collect();
            (vals.len() == cfg.replicates).then(|| summarize(n, &vals))
        })
        .collect();
    let fit = if per_n.len() >= 5 {
        let pairs: Vec<(f64, f64)> = per_n.iter().map(|s| (s.n as f64, s.mean)).collect();
        match fit_loglog(&pairs) {
            Ok(f) => Some(RateFit {
                slope: f.slope,
                intercept: f.intercept,
                r_squared: f.r_squared,
                per_n,
            }),
            Err(e) => {
                error.get_or_insert(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let report = ExperimentReport {
        config: cfg.clone(),
        problem: family.name().to_string(),
        fit,
        cells: done,
        partial: error.is_some(),
        error,
    };
    if let Some(prefix) = &cfg.output {
        report.write(prefix)?;
    }
    Ok(report)
}
