//! Constant-rate estimators of the growth rate and their diagnostics.
//!
//! All estimators pool every interval of every series: the estimating
//! equation and the log-likelihoods are sums over `(series, interval)` pairs.

mod approx;
mod gaussian;
mod gw;
mod saddlepoint;
mod theory;

pub use approx::{approx_mle, h_function, initial_guess, sigma2_plugin};
pub use gaussian::{gaussian_mle, gaussian_profile_loglik};
pub use gw::gw_estimate;
pub use saddlepoint::{
    cgf, saddlepoint_loglik, saddlepoint_logpdf, saddlepoint_mle, solve_saddle, Cgf,
};
pub use theory::{
    g_function, g_star, gaussian_joint_loglik, l_decomposition, mean_path, pseudo_loglik,
};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::types::{pooled_transitions, EstimateResult, Method, ObservationSeries, Transition};

/// Tolerances and limits shared by the iterative estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Absolute tolerance on the growth rate.
    pub root_tol: f64,
    pub max_iter: usize,
    /// Factor by which a bracket grows or shrinks per step.
    pub bracket_expand: f64,
    /// Smallest `|alpha|` treated as nonzero.
    pub alpha_floor: f64,
    /// Function-evaluation budget for the simplex search.
    pub max_evals: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            root_tol: 1e-10,
            max_iter: 200,
            bracket_expand: 2.0,
            alpha_floor: 1e-12,
            max_evals: 2000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.root_tol > 0.0
            && self.max_iter > 0
            && self.bracket_expand > 1.0
            && self.alpha_floor > 0.0
            && self.max_evals > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid solver settings {self:?}")))
        }
    }
}

pub(crate) fn transitions_of(series: &[ObservationSeries]) -> Result<Vec<Transition>> {
    let tr = pooled_transitions(series);
    if tr.is_empty() {
        return Err(Error::DegenerateData("no observation intervals".into()));
    }
    Ok(tr)
}

/// Run a constant-rate estimator and record its wall-clock time.
pub fn fit(
    method: Method,
    series: &[ObservationSeries],
    cfg: &SolverConfig,
) -> Result<EstimateResult> {
    let start = Instant::now();
    let mut res = match method {
        Method::GaltonWatson => gw_estimate(series),
        Method::ApproxMle => approx_mle(series, cfg),
        Method::GaussianMle => gaussian_mle(series, cfg),
        Method::Saddlepoint => saddlepoint_mle(series, cfg),
        Method::Generalized => Err(Error::InvalidParams(
            "the generalized estimator needs a rate model".into(),
        )),
    }?;
    res.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}
