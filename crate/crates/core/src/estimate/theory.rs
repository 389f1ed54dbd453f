//! Quantities used to study the estimating equation: the split of the
//! Gaussian score, the normalized estimating function and its limit, and the
//! pseudo-log-likelihood anchored at a reference growth rate.

use crate::error::{Error, Result};
use crate::transition::gaussian_logpdf;
use crate::types::{GrowthParams, ObservationSeries};

use super::approx::h_function;

/// The three additive terms of `d/d alpha` of the Gaussian transition
/// log-density, with `sigma^2` held fixed.
///
/// `l1` is the part kept by the estimating equation; `l2` is quadratic in the
/// residual and `l3` does not depend on the data.
pub fn l_decomposition(alpha: f64, sigma2: f64, x: f64, x_next: f64, t: f64) -> (f64, f64, f64) {
    let e = (alpha * t).exp();
    let em1 = (alpha * t).exp_m1();
    let r = x_next - x * e;
    let l1 = t * r / (sigma2 * em1);
    let l2 = t * r * r * (2.0 * e - 1.0) / (2.0 * x * sigma2 * e * em1 * em1);
    let l3 = -0.5 * t - 0.5 * t * e / em1;
    (l1, l2, l3)
}

/// Joint Gaussian log-likelihood over every interval starting from a
/// positive count.
pub fn gaussian_joint_loglik(alpha: f64, sigma2: f64, series: &[ObservationSeries]) -> Result<f64> {
    let g = GrowthParams::new(alpha, sigma2);
    let mut total = 0.0;
    for s in series {
        for tr in s.transitions().filter(|t| t.from > 0.0) {
            total += gaussian_logpdf(tr.to, tr.from, g, tr.dt)?;
        }
    }
    Ok(total)
}

/// Counts on the deterministic path `X_1 e^{alpha (T_i - T_1)}`.
pub fn mean_path(x1: f64, alpha: f64, times: &[f64]) -> Result<ObservationSeries> {
    let t0 = times.first().copied().unwrap_or(0.0);
    let counts = times
        .iter()
        .map(|&t| x1 * (alpha * (t - t0)).exp())
        .collect();
    ObservationSeries::new(times.to_vec(), counts)
}

fn reference_weights(alpha0: f64, times: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    let t0 = times[0];
    times
        .windows(2)
        .map(move |w| ((alpha0 * (w[0] - t0)).exp(), w[1] - w[0]))
}

/// Estimating function of one series normalized by `X_1 sum t_i e^{alpha0 T_i}`.
pub fn g_function(alpha: f64, alpha0: f64, series: &ObservationSeries) -> f64 {
    let norm: f64 = reference_weights(alpha0, series.times())
        .map(|(w, t)| t * w)
        .sum();
    h_function(alpha, std::slice::from_ref(series)) / (series.counts()[0] * norm)
}

/// Deterministic limit of [`g_function`] as `X_1` grows, for data drawn at
/// growth rate `alpha0`.
pub fn g_star(alpha: f64, alpha0: f64, times: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut norm = 0.0;
    for (w, t) in reference_weights(alpha0, times) {
        let ratio = ((alpha0 * t).exp() - (alpha * t).exp()) / (alpha * t).exp_m1();
        num += t * w * ratio;
        norm += t * w;
    }
    num / norm
}

/// Gaussian log-likelihood at `alpha0` plus the integrated leading score
/// term, in absolute-value form:
/// `l(alpha0) + sum[(X_{i+1} - X_i) |ln((e^{alpha0 t} - 1)/(e^{alpha t} - 1))|
/// - X_{i+1} |alpha0 - alpha| t] / sigma^2`.
///
/// For `alpha > alpha0 > 0` this is the exact integral of `l1` from
/// `alpha0` to `alpha`.
pub fn pseudo_loglik(
    alpha: f64,
    sigma2: f64,
    alpha0: f64,
    series: &[ObservationSeries],
) -> Result<f64> {
    if alpha == 0.0 || alpha0 == 0.0 {
        return Err(Error::InvalidParams(
            "alpha and alpha0 must be nonzero".into(),
        ));
    }
    let anchor = gaussian_joint_loglik(alpha0, sigma2, series)?;
    let mut shift = 0.0;
    for s in series {
        for tr in s.transitions() {
            let ratio = (alpha0 * tr.dt).exp_m1() / (alpha * tr.dt).exp_m1();
            shift += (tr.to - tr.from) * ratio.ln().abs() - tr.to * (alpha0 - alpha).abs() * tr.dt;
        }
    }
    Ok(anchor + shift / sigma2)
}
