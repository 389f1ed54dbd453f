use crate::error::{Error, Result};
use crate::types::{EstimateResult, Method, ObservationSeries};

use super::approx::sigma2_of;
use super::{transitions_of, SolverConfig};

/// Closed-form estimator for equidistant observations:
/// `ln(sum of counts after the first / sum of counts before the last) / tau`.
pub fn gw_estimate(series: &[ObservationSeries]) -> Result<EstimateResult> {
    let tr = transitions_of(series)?;
    let tau = tr[0].dt;
    for t in &tr {
        if (t.dt - tau).abs() > 1e-9 * tau {
            return Err(Error::NotEquidistant {
                expected: tau,
                found: t.dt,
            });
        }
    }
    let after: f64 = tr.iter().map(|t| t.to).sum();
    let before: f64 = tr.iter().map(|t| t.from).sum();
    if after == 0.0 || before == 0.0 {
        return Err(Error::DegenerateData(format!(
            "pooled sums are {before} (before) and {after} (after)"
        )));
    }
    let alpha = (after / before).ln() / tau;
    let sigma2 = sigma2_of(alpha, &tr, &SolverConfig::default());
    Ok(EstimateResult::from_growth(
        Method::GaltonWatson,
        alpha,
        sigma2,
        0,
    ))
}
