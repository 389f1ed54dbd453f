//! Monte Carlo comparison of the constant-rate estimators on simulated data.
//!
//! Each replicate draws one observation schedule, simulates `n_series`
//! independent paths from `x0`, observes them on the schedule and fits every
//! requested estimator to the pooled series. Replicate `r` uses
//! [`replicate_rng`]`(seed, r)`, and aggregation runs in replicate order, so
//! the report does not depend on the number of workers. Only the measured
//! runtimes vary between runs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit, SolverConfig};
use crate::simulate::{
    replicate_rng, sample_schedule_with_rng, simulate_observed, Simulator, DEFAULT_TAU_STEP,
};
use crate::types::{Method, ObservationSeries, RateParams};

/// Attempts at drawing a replicate with no extinct series before giving up.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulatorKind {
    Gillespie,
    #[serde(alias = "tau-leap")]
    Tauleap,
}

fn default_timepoints() -> usize {
    10
}

fn default_gamma_rate() -> f64 {
    1.0
}

fn default_tau_step() -> f64 {
    DEFAULT_TAU_STEP
}

fn default_workers() -> usize {
    1
}

/// One benchmark configuration, read from a flat TOML table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub lambda: f64,
    pub mu: f64,
    pub x0: u64,
    pub n_series: usize,
    #[serde(default = "default_timepoints")]
    pub n_timepoints: usize,
    pub gamma_shape: f64,
    #[serde(default = "default_gamma_rate")]
    pub gamma_rate: f64,
    pub simulator: SimulatorKind,
    #[serde(default = "default_tau_step")]
    pub tau_step: f64,
    /// Number of replicates.
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(deserialize_with = "de_methods", serialize_with = "ser_methods")]
    pub methods: Vec<Method>,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn de_methods<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<Method>, D::Error> {
    let names = Vec::<String>::deserialize(d)?;
    names
        .iter()
        .map(|n| n.parse().map_err(serde::de::Error::custom))
        .collect()
}

fn ser_methods<S: serde::Serializer>(m: &[Method], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(Method::as_str))
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        RateParams::new(self.lambda, self.mu).map_err(|e| Error::Config(e.to_string()))?;
        if self.methods.is_empty() {
            return fail("methods must list at least one estimator".into());
        }
        if let Some(m) = self.methods.iter().find(|&&m| m == Method::Generalized) {
            return fail(format!(
                "method '{m}' needs a rate model and cannot be benchmarked"
            ));
        }
        if self.m == 0 {
            return fail("M must be at least 1".into());
        }
        if self.n_timepoints < 2 {
            return fail("n_timepoints must be at least 2".into());
        }
        if self.x0 == 0 || self.n_series == 0 || self.workers == 0 {
            return fail("x0, n_series and workers must be positive".into());
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.gamma_shape) || !positive(self.gamma_rate) || !positive(self.tau_step) {
            return fail("gamma_shape, gamma_rate and tau_step must be positive".into());
        }
        Ok(())
    }

    fn simulator(&self) -> Simulator {
        match self.simulator {
            SimulatorKind::Gillespie => Simulator::Gillespie,
            SimulatorKind::Tauleap => Simulator::TauLeap {
                step: self.tau_step,
            },
        }
    }
}

/// One estimator fit on one replicate. `alpha_hat` is `None` for a failed fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub method: Method,
    pub alpha_hat: Option<f64>,
    pub runtime_seconds: f64,
}

/// Aggregate for one configuration and estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub lambda: f64,
    pub mu: f64,
    pub gamma_shape: f64,
    pub x0: u64,
    pub n_series: usize,
    pub method: Method,
    /// Mean of `|alpha_hat - (lambda - mu)|` over converged fits; NaN if none converged.
    pub mae: f64,
    pub mean_runtime_seconds: f64,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub records: Vec<ReplicateRecord>,
}

impl BenchReport {
    pub fn row(&self, method: Method) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn extend(&mut self, other: BenchReport) {
        self.rows.extend(other.rows);
        self.records.extend(other.records);
    }
}

fn draw_replicate(
    cfg: &BenchConfig,
    params: RateParams,
    replicate: usize,
) -> Option<Vec<ObservationSeries>> {
    let mut rng = replicate_rng(cfg.seed, replicate as u64);
    let sim = cfg.simulator();
    'attempt: for _ in 0..MAX_RESAMPLES {
        let times =
            sample_schedule_with_rng(cfg.n_timepoints, cfg.gamma_shape, cfg.gamma_rate, &mut rng)
                .ok()?;
        let mut series = Vec::with_capacity(cfg.n_series);
        for _ in 0..cfg.n_series {
            let counts = simulate_observed(sim, params, cfg.x0, &times, &mut rng).ok()?;
            if counts.contains(&0) {
                continue 'attempt;
            }
            series.push(ObservationSeries::from_counts(times.clone(), &counts).ok()?);
        }
        return Some(series);
    }
    None
}

fn run_replicate(cfg: &BenchConfig, params: RateParams, replicate: usize) -> Vec<ReplicateRecord> {
    let solver = SolverConfig::default();
    let data = draw_replicate(cfg, params, replicate);
    cfg.methods
        .iter()
        .map(|&method| {
            let Some(d) = data.as_ref() else {
                return ReplicateRecord {
                    replicate,
                    method,
                    alpha_hat: None,
                    runtime_seconds: 0.0,
                };
            };
            let start = Instant::now();
            let fitted = fit(method, d, &solver);
            let runtime_seconds = start.elapsed().as_secs_f64();
            let alpha_hat = fitted
                .ok()
                .filter(|r| r.converged)
                .and_then(|r| r.alpha_hat)
                .filter(|a| a.is_finite());
            ReplicateRecord {
                replicate,
                method,
                alpha_hat,
                runtime_seconds,
            }
        })
        .collect()
}

/// Run all replicates of one configuration on `cfg.workers` threads.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let params = RateParams::new(cfg.lambda, cfg.mu)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let per_replicate: Vec<Vec<ReplicateRecord>> = pool.install(|| {
        (0..cfg.m)
            .into_par_iter()
            .map(|r| run_replicate(cfg, params, r))
            .collect()
    });
    let records: Vec<ReplicateRecord> = per_replicate.into_iter().flatten().collect();

    let truth = params.alpha();
    let rows = cfg
        .methods
        .iter()
        .map(|&method| {
            let (mut err_sum, mut time_sum, mut n_ok, mut n_timed) = (0.0, 0.0, 0usize, 0usize);
            for rec in records.iter().filter(|r| r.method == method) {
                if let Some(a) = rec.alpha_hat {
                    err_sum += (a - truth).abs();
                    n_ok += 1;
                }
                if rec.runtime_seconds > 0.0 {
                    time_sum += rec.runtime_seconds;
                    n_timed += 1;
                }
            }
            BenchRow {
                lambda: cfg.lambda,
                mu: cfg.mu,
                gamma_shape: cfg.gamma_shape,
                x0: cfg.x0,
                n_series: cfg.n_series,
                method,
                mae: if n_ok > 0 {
                    err_sum / n_ok as f64
                } else {
                    f64::NAN
                },
                mean_runtime_seconds: if n_timed > 0 {
                    time_sum / n_timed as f64
                } else {
                    0.0
                },
                n_failed: cfg.m - n_ok,
            }
        })
        .collect();
    Ok(BenchReport { rows, records })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    lambda: f64,
    mu: f64,
    gamma_shape: f64,
    x0: u64,
    n_series: usize,
    method: &'a str,
    mae: f64,
    mean_runtime_s: f64,
    n_failed: usize,
}

/// One CSV row per configuration and estimator.
pub fn write_report_csv<W: Write>(out: W, report: &BenchReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.rows {
        w.serialize(CsvRow {
            lambda: r.lambda,
            mu: r.mu,
            gamma_shape: r.gamma_shape,
            x0: r.x0,
            n_series: r.n_series,
            method: r.method.as_str(),
            mae: r.mae,
            mean_runtime_s: r.mean_runtime_seconds,
            n_failed: r.n_failed,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table with one block per `(lambda, mu)` pair, in order of
/// first appearance.
pub fn format_table(report: &BenchReport) -> String {
    let mut blocks: Vec<(f64, f64)> = Vec::new();
    for r in &report.rows {
        if !blocks.contains(&(r.lambda, r.mu)) {
            blocks.push((r.lambda, r.mu));
        }
    }
    let mut out = String::new();
    for (i, &(lambda, mu)) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "lambda = {lambda}, mu = {mu}");
        let _ = writeln!(
            out,
            "{:>11} {:>8} {:>8}  {:<12} {:>10} {:>14} {:>8}",
            "gamma_shape", "x0", "n", "method", "mae", "runtime_s", "failed"
        );
        for r in report
            .rows
            .iter()
            .filter(|r| (r.lambda, r.mu) == (lambda, mu))
        {
            let _ = writeln!(
                out,
                "{:>11} {:>8} {:>8}  {:<12} {:>10.4} {:>14.3e} {:>8}",
                r.gamma_shape,
                r.x0,
                r.n_series,
                r.method.as_str(),
                r.mae,
                r.mean_runtime_seconds,
                r.n_failed
            );
        }
    }
    out
}

/// Write `report.csv` and `report.txt` into `dir`, creating it if needed.
pub fn emit_report(report: &BenchReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_report_csv(fs::File::create(dir.join("report.csv"))?, report)?;
    fs::write(dir.join("report.txt"), format_table(report))?;
    Ok(())
}
