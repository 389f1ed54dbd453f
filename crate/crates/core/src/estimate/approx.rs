use crate::error::{Error, Result};
use crate::optim::brent_root;
use crate::types::{EstimateResult, Method, ObservationSeries, Transition};

use super::{transitions_of, SolverConfig};

/// `sum t (X_{i+1} - X_i e^{alpha t}) / (e^{alpha t} - 1)` over all intervals.
///
/// Evaluated as `t (X_{i+1} - X_i) / expm1(alpha t) - t X_i`, which stays
/// finite for large `|alpha t|`. Returns NaN at `alpha = 0`.
pub fn h_function(alpha: f64, series: &[ObservationSeries]) -> f64 {
    let tr: Vec<Transition> = series.iter().flat_map(|s| s.transitions()).collect();
    h_pooled(alpha, &tr)
}

pub(crate) fn h_pooled(alpha: f64, tr: &[Transition]) -> f64 {
    if alpha == 0.0 {
        return f64::NAN;
    }
    tr.iter()
        .map(|t| {
            let em1 = (alpha * t.dt).exp_m1();
            t.dt * (t.to - t.from) / em1 - t.dt * t.from
        })
        .sum()
}

/// Crude starting value: net change per unit of trapezoidal size-time.
pub fn initial_guess(tr: &[Transition]) -> f64 {
    let d: f64 = tr.iter().map(|t| t.to - t.from).sum();
    let exposure: f64 = tr.iter().map(|t| 0.5 * t.dt * (t.from + t.to)).sum();
    d / exposure
}

/// Root of [`h_function`] on the half-line picked by the sign of the pooled
/// net change `D`; `D = 0` gives `alpha = 0`.
///
/// The bracket starts from [`initial_guess`] and is widened or narrowed by
/// `bracket_expand` until `h` is positive at the inner end and negative at
/// the outer end; Brent's method then refines it to `root_tol`.
/// `iterations` counts evaluations of `h`.
pub fn approx_mle(series: &[ObservationSeries], cfg: &SolverConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let tr = transitions_of(series)?;
    let d: f64 = tr.iter().map(|t| t.to - t.from).sum();
    let total: f64 = tr.iter().map(|t| t.to + t.from).sum();
    if d.abs() <= 1e-14 * total {
        return Ok(EstimateResult::from_growth(Method::ApproxMle, 0.0, None, 0));
    }
    let sign = d.signum();
    let h = |u: f64| h_pooled(sign * u, &tr);

    let guess = initial_guess(&tr).abs();
    let mut u = if guess.is_finite() && guess > 0.0 {
        guess
    } else {
        1.0
    };
    let mut hu = h(u);
    let mut evals = 1;
    let (mut inner, mut h_inner, mut outer, mut h_outer);
    if hu > 0.0 {
        (inner, h_inner) = (u, hu);
        let mut steps = 0;
        loop {
            u *= cfg.bracket_expand;
            hu = h(u);
            evals += 1;
            steps += 1;
            if hu < 0.0 {
                (outer, h_outer) = (u, hu);
                break;
            }
            (inner, h_inner) = (u, hu);
            if steps >= cfg.max_iter || !u.is_finite() {
                return Err(Error::NoRoot(steps));
            }
        }
    } else {
        (outer, h_outer) = (u, hu);
        let mut steps = 0;
        loop {
            u /= cfg.bracket_expand;
            hu = h(u);
            evals += 1;
            steps += 1;
            if hu >= 0.0 {
                (inner, h_inner) = (u, hu);
                break;
            }
            (outer, h_outer) = (u, hu);
            if steps >= cfg.max_iter || u < cfg.alpha_floor {
                return Err(Error::NoRoot(steps));
            }
        }
    }
    if h_outer.is_nan() || h_inner.is_nan() {
        return Err(Error::NoRoot(evals));
    }
    let sol = brent_root(
        |a| h_pooled(a, &tr),
        sign * inner,
        sign * outer,
        h_inner,
        h_outer,
        cfg.root_tol,
        cfg.max_iter,
    )?;
    evals += sol.evaluations;
    let alpha = sol.x;
    let sigma2 = sigma2_of(alpha, &tr, cfg);
    Ok(EstimateResult::from_growth(
        Method::ApproxMle,
        alpha,
        sigma2,
        evals,
    ))
}

/// Mean over intervals with `X_i > 0` of
/// `(X_{i+1} - X_i e^{alpha t})^2 / (X_i e^{alpha t} (e^{alpha t} - 1))`.
pub fn sigma2_plugin(alpha: f64, series: &[ObservationSeries]) -> Result<f64> {
    let tr: Vec<Transition> = series.iter().flat_map(|s| s.transitions()).collect();
    sigma2_pooled(alpha, &tr)
}

pub(crate) fn sigma2_pooled(alpha: f64, tr: &[Transition]) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::Undefined("sigma^2 at alpha = 0".into()));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for t in tr.iter().filter(|t| t.from > 0.0) {
        let g = (alpha * t.dt).exp();
        let r = t.to - t.from * g;
        sum += r * r / (t.from * g * (alpha * t.dt).exp_m1());
        n += 1;
    }
    if n == 0 {
        return Err(Error::Undefined(
            "no interval starts from a positive count".into(),
        ));
    }
    Ok(sum / n as f64)
}

pub(crate) fn sigma2_of(alpha: f64, tr: &[Transition], cfg: &SolverConfig) -> Option<f64> {
    if alpha.abs() < cfg.alpha_floor {
        return None;
    }
    sigma2_pooled(alpha, tr).ok().filter(|s| s.is_finite())
}
