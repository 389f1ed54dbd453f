//! Domain types shared by the simulators and estimators.
//!
//! Rates come in two parameterizations: the natural birth/death pair
//! `(lambda, mu)` and the growth form `(alpha, sigma2)` with
//! `alpha = lambda - mu` and `sigma2 = (lambda + mu) / (lambda - mu)`.

use std::fmt;

use crate::error::{Error, Result};

/// Per-capita birth and death rates of a linear birth-death process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    lambda: f64,
    mu: f64,
}

impl RateParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "rates must be finite (lambda={lambda}, mu={mu})"
            )));
        }
        if lambda < 0.0 || mu < 0.0 {
            return Err(Error::InvalidParams(format!(
                "rates must be nonnegative (lambda={lambda}, mu={mu})"
            )));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Net growth rate `lambda - mu`.
    pub fn alpha(&self) -> f64 {
        self.lambda - self.mu
    }

    pub fn is_critical(&self) -> bool {
        self.lambda == self.mu
    }
}

/// Growth-rate parameterization `(alpha, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub alpha: f64,
    pub sigma2: f64,
}

impl GrowthParams {
    pub fn new(alpha: f64, sigma2: f64) -> Self {
        Self { alpha, sigma2 }
    }
}

/// `(lambda, mu) -> (alpha, sigma2)`. Fails at criticality where sigma2 has no value.
pub fn rates_to_growth(p: RateParams) -> Result<GrowthParams> {
    if p.is_critical() {
        return Err(Error::CriticalProcess);
    }
    let alpha = p.lambda - p.mu;
    Ok(GrowthParams {
        alpha,
        sigma2: (p.lambda + p.mu) / alpha,
    })
}

/// Inverse of [`rates_to_growth`].
pub fn growth_to_rates(g: GrowthParams) -> Result<RateParams> {
    if g.alpha == 0.0 || !g.alpha.is_finite() || !g.sigma2.is_finite() {
        return Err(Error::InvalidParams(format!(
            "alpha must be finite and nonzero (alpha={}, sigma2={})",
            g.alpha, g.sigma2
        )));
    }
    let lambda = g.alpha * (g.sigma2 + 1.0) / 2.0;
    let mu = g.alpha * (g.sigma2 - 1.0) / 2.0;
    RateParams::new(lambda, mu)
}

/// Observation times and counts of one trajectory.
///
/// Counts are reals: pseudo-counts reconstructed from allele frequencies
/// are fractional and are never rounded before estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    times: Vec<f64>,
    counts: Vec<f64>,
}

impl ObservationSeries {
    /// Validated constructor: at least two points, strictly increasing
    /// nonnegative times, nonnegative finite counts and a positive first count.
    /// Interior zeros are allowed.
    pub fn new(times: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        let s = Self::from_pseudo_counts(times, counts)?;
        if s.counts[0] <= 0.0 {
            return Err(Error::InvalidSeries(format!(
                "first count must be positive, got {}",
                s.counts[0]
            )));
        }
        Ok(s)
    }

    /// Like [`ObservationSeries::new`] but tolerates a zero first count.
    /// Used for pseudo-count series reconstructed from allele frequencies,
    /// where an undetected clone at the first visit is legitimate data.
    pub fn from_pseudo_counts(times: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if times.len() != counts.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} counts",
                times.len(),
                counts.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidSeries(
                "at least two observations are required".into(),
            ));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidSeries(format!(
                "times must be finite and nonnegative, got {t}"
            )));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(c) = counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidSeries(format!(
                "counts must be finite and nonnegative, got {c}"
            )));
        }
        Ok(Self { times, counts })
    }

    /// Integer counts observed at the given times.
    pub fn from_counts(times: Vec<f64>, counts: &[u64]) -> Result<Self> {
        Self::new(times, counts.iter().map(|&c| c as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Interval lengths `T_{i+1} - T_i`.
    pub fn intervals(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    /// `(t_i, X_i, X_{i+1})` for every consecutive pair.
    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.times
            .windows(2)
            .zip(self.counts.windows(2))
            .map(|(t, x)| Transition {
                dt: t[1] - t[0],
                start: t[0],
                from: x[0],
                to: x[1],
            })
    }

    /// Same times, counts multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Ok(Self {
            times: self.times.clone(),
            counts: self.counts.iter().map(|x| x * c).collect(),
        })
    }

    pub fn has_interior_zero(&self) -> bool {
        let n = self.counts.len();
        self.counts[..n - 1].contains(&0.0)
    }
}

/// One observed step `X_i -> X_{i+1}` over an interval of length `dt`
/// starting at absolute time `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub dt: f64,
    pub start: f64,
    pub from: f64,
    pub to: f64,
}

/// Flatten the transitions of several series into one pooled list.
pub fn pooled_transitions(series: &[ObservationSeries]) -> Vec<Transition> {
    series.iter().flat_map(|s| s.transitions()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMethod {
    Exact,
    TauLeap,
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMethod::Exact => "exact",
            SimMethod::TauLeap => "tau-leap",
        })
    }
}

/// A simulated sample path: population size right after each recorded time.
/// The first entry is the initial state at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub event_times: Vec<f64>,
    pub sizes: Vec<u64>,
    pub method: SimMethod,
    /// Simulated horizon; the path is known on `[0, horizon]`.
    pub horizon: f64,
}

impl Trajectory {
    pub fn final_size(&self) -> u64 {
        *self.sizes.last().expect("trajectory has an initial state")
    }

    pub fn is_extinct(&self) -> bool {
        self.final_size() == 0
    }

    /// Right-continuous evaluation: the size after the last recorded time `<= t`.
    pub fn size_at(&self, t: f64) -> u64 {
        let idx = self.event_times.partition_point(|&e| e <= t);
        self.sizes[idx.saturating_sub(1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    GaltonWatson,
    ApproxMle,
    GaussianMle,
    Saddlepoint,
    Generalized,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::GaltonWatson => "gw",
            Method::ApproxMle => "approx",
            Method::GaussianMle => "gaussian",
            Method::Saddlepoint => "saddlepoint",
            Method::Generalized => "generalized",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gw" | "galton-watson" => Ok(Method::GaltonWatson),
            "approx" | "approx-mle" => Ok(Method::ApproxMle),
            "gaussian" | "gaussian-mle" => Ok(Method::GaussianMle),
            "saddlepoint" => Ok(Method::Saddlepoint),
            "generalized" => Ok(Method::Generalized),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Non-fatal conditions noted during a fit.
#[derive(Debug, Clone, PartialEq)]
pub enum FitWarning {
    /// A series had a zero count before its last observation.
    InteriorZeros,
    /// Intervals starting from a zero count were dropped.
    DroppedZeroIntervals(usize),
    /// The saddlepoint equation could not be solved on this many intervals.
    InnerSolveFailures(usize),
}

/// Output of every estimator. Fields that a method does not define are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub method: Method,
    pub alpha_hat: Option<f64>,
    pub sigma2_hat: Option<f64>,
    pub lambda_hat: Option<f64>,
    pub mu_hat: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub runtime_seconds: f64,
    /// Parameter vector for the time-varying estimator.
    pub theta_hat: Option<Vec<f64>>,
    /// Euclidean norm of the estimating equation at the returned root.
    pub residual_norm: Option<f64>,
    pub warnings: Vec<FitWarning>,
}

impl EstimateResult {
    /// A converged scalar fit; back-converts to `(lambda, mu)` when both
    /// growth components are defined and give nonnegative rates.
    pub fn from_growth(method: Method, alpha: f64, sigma2: Option<f64>, iterations: usize) -> Self {
        let (lambda_hat, mu_hat) = match sigma2 {
            Some(s2) => match growth_to_rates(GrowthParams::new(alpha, s2)) {
                Ok(r) => (Some(r.lambda()), Some(r.mu())),
                Err(_) => (None, None),
            },
            None => (None, None),
        };
        Self {
            method,
            alpha_hat: Some(alpha),
            sigma2_hat: sigma2,
            lambda_hat,
            mu_hat,
            converged: alpha.is_finite(),
            iterations,
            runtime_seconds: 0.0,
            theta_hat: None,
            residual_norm: None,
            warnings: Vec::new(),
        }
    }

    /// A fit that did not produce an estimate.
    pub fn failed(method: Method, iterations: usize) -> Self {
        Self {
            method,
            alpha_hat: None,
            sigma2_hat: None,
            lambda_hat: None,
            mu_hat: None,
            converged: false,
            iterations,
            runtime_seconds: 0.0,
            theta_hat: None,
            residual_norm: None,
            warnings: Vec::new(),
        }
    }
}
