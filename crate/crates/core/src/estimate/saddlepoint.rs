//! Saddlepoint approximation to the transition law.
//!
//! A single ancestor leaves `0` descendants with probability `A` and
//! `k >= 1` with probability `(1-A)(1-B)B^{k-1}`, so its generating function
//! is `f1(z) = A + (1-A)(1-B) z / (1 - Bz)` and `x` ancestors have cumulant
//! generating function `K(s) = x ln f1(e^s)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::optim::nelder_mead;
use crate::transition::{coeffs, TransitionCoeffs};
use crate::types::{
    growth_to_rates, EstimateResult, FitWarning, GrowthParams, Method, ObservationSeries,
    RateParams, Transition,
};

use super::approx::approx_mle;
use super::{transitions_of, SolverConfig};

/// `K(s)` and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cgf {
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Cumulant generating function of `X(t)` given `X(0) = x`, for `s < -ln B`.
pub fn cgf(x: f64, c: &TransitionCoeffs, s: f64) -> Cgf {
    let z = s.exp();
    // 1 - Bz, accurate near the singularity
    let w = if c.b > 0.0 {
        -(s + c.b.ln()).exp_m1()
    } else {
        1.0
    };
    let p = c.one_minus_a() * c.one_minus_b();
    let f1 = c.a + p * z / w;
    let m = p * z / (f1 * w * w);
    let k1 = x * m;
    let k2 = k1 * (c.a / (f1 * w) + c.b * z / w);
    Cgf {
        k: x * f1.ln(),
        k1,
        k2,
    }
}

/// Solve `K'(s) = y` by Newton's method on `ln K'(s) = ln y`, which is
/// increasing and nearly linear for small `s`; steps are kept below the
/// singularity at `-ln B` and limited in length.
pub fn solve_saddle(x: f64, y: f64, c: &TransitionCoeffs) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidParams(format!(
            "saddle needs x, y > 0 (x={x}, y={y})"
        )));
    }
    let hi = if c.b > 0.0 { -c.b.ln() } else { f64::INFINITY };
    let target = y.ln();
    let (mut lo_b, mut hi_b) = (f64::NEG_INFINITY, hi);
    let mut s = 0.0f64.min(0.5 * hi);
    for _ in 0..200 {
        let g = cgf(x, c, s);
        let resid = g.k1.ln() - target;
        if !resid.is_finite() {
            return Err(Error::InnerSolveFailure);
        }
        if resid.abs() < 1e-14 {
            return Ok(s);
        }
        if resid > 0.0 {
            hi_b = s;
        } else {
            lo_b = s;
        }
        let slope = g.k2 / g.k1;
        let mut next = s - (resid / slope).clamp(-10.0, 10.0);
        if !(next > lo_b && next < hi_b) {
            next = if lo_b.is_finite() {
                0.5 * (lo_b + hi_b)
            } else {
                hi_b - 10.0f64.max(hi_b - s)
            };
        }
        if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
            return Ok(next);
        }
        s = next;
    }
    Err(Error::InnerSolveFailure)
}

/// Saddlepoint log-density `K(s) - s y - ln(2 pi K''(s)) / 2` at the saddle
/// `K'(s) = y`. A zero outcome uses the exact extinction probability `x ln A`.
pub fn saddlepoint_logpdf(y: f64, x: f64, c: &TransitionCoeffs) -> Result<f64> {
    if y == 0.0 {
        return Ok(x * c.a.ln());
    }
    let s = solve_saddle(x, y, c)?;
    let g = cgf(x, c, s);
    Ok(g.k - s * y - 0.5 * (2.0 * PI * g.k2).ln())
}

/// Summed saddlepoint log-likelihood and the number of intervals whose
/// saddle could not be found (those contribute `-inf`).
fn loglik(p: RateParams, tr: &[Transition]) -> (f64, usize) {
    let mut total = 0.0;
    let mut failures = 0;
    for t in tr {
        let v = coeffs(p, t.dt).and_then(|c| saddlepoint_logpdf(t.to, t.from, &c));
        match v {
            Ok(v) => total += v,
            Err(_) => {
                failures += 1;
                total = f64::NEG_INFINITY;
            }
        }
    }
    (total, failures)
}

/// Saddlepoint log-likelihood of the pooled intervals that start from a
/// positive count.
pub fn saddlepoint_loglik(p: RateParams, series: &[ObservationSeries]) -> f64 {
    let tr: Vec<Transition> = series
        .iter()
        .flat_map(|s| s.transitions())
        .filter(|t| t.from > 0.0)
        .collect();
    loglik(p, &tr).0
}

fn starting_rates(series: &[ObservationSeries], cfg: &SolverConfig) -> (f64, f64) {
    if let Ok(r) = approx_mle(series, cfg) {
        if let (Some(a), Some(s2)) = (r.alpha_hat, r.sigma2_hat) {
            if let Ok(p) = growth_to_rates(GrowthParams::new(a, s2)) {
                if p.lambda() > 0.0 && p.mu() > 0.0 {
                    return (p.lambda(), p.mu());
                }
            }
        }
        if let Some(a) = r.alpha_hat {
            let base = 0.5 * a.abs().max(0.01);
            return (base + a.max(0.0), base + (-a).max(0.0));
        }
    }
    (0.1, 0.1)
}

/// Maximize the saddlepoint log-likelihood over `(ln lambda, ln mu)` with a
/// Nelder-Mead simplex started from the approximate-MLE rates.
pub fn saddlepoint_mle(series: &[ObservationSeries], cfg: &SolverConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let all = transitions_of(series)?;
    let tr: Vec<Transition> = all.iter().copied().filter(|t| t.from > 0.0).collect();
    let dropped = all.len() - tr.len();
    if tr.is_empty() {
        return Err(Error::DegenerateData(
            "every interval starts from zero".into(),
        ));
    }
    let (l0, m0) = starting_rates(series, cfg);
    let objective = |v: &[f64]| match RateParams::new(v[0].exp(), v[1].exp()) {
        Ok(p) => -loglik(p, &tr).0,
        Err(_) => f64::INFINITY,
    };
    let res = nelder_mead(objective, &[l0.ln(), m0.ln()], 0.3, 1e-12, cfg.max_evals);
    if !res.converged {
        return Err(Error::NonConvergence(res.evaluations));
    }
    let p = RateParams::new(res.x[0].exp(), res.x[1].exp())?;
    let (_, failures) = loglik(p, &tr);
    let alpha = p.alpha();
    let sigma2 = if alpha.abs() >= cfg.alpha_floor {
        Some((p.lambda() + p.mu()) / alpha)
    } else {
        None
    };
    let mut out = EstimateResult::from_growth(Method::Saddlepoint, alpha, sigma2, res.evaluations);
    out.lambda_hat = Some(p.lambda());
    out.mu_hat = Some(p.mu());
    if failures > 0 {
        out.warnings.push(FitWarning::InnerSolveFailures(failures));
    }
    if series.iter().any(|s| s.has_interior_zero()) {
        out.warnings.push(FitWarning::InteriorZeros);
    }
    if dropped > 0 {
        out.warnings.push(FitWarning::DroppedZeroIntervals(dropped));
    }
    Ok(out)
}
