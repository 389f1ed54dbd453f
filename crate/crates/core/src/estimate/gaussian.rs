use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::types::{EstimateResult, FitWarning, Method, ObservationSeries, Transition};

use super::approx::{initial_guess, sigma2_of};
use super::{transitions_of, SolverConfig};

/// `(e^{alpha t} - 1) / alpha`, equal to `t` at `alpha = 0`.
fn growth_integral(alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        t
    } else {
        (alpha * t).exp_m1() / alpha
    }
}

/// Gaussian log-likelihood with `sigma^2` profiled out, and the profiled
/// `alpha sigma^2`.
///
/// Writing the variance as `(alpha sigma^2) q_i` with
/// `q_i = X_i e^{alpha t} (e^{alpha t} - 1) / alpha > 0` keeps the profile
/// continuous through `alpha = 0`.
fn profile(alpha: f64, tr: &[Transition]) -> (f64, f64) {
    let n = tr.len() as f64;
    let mut ss = 0.0;
    let mut log_q = 0.0;
    for t in tr {
        let g = (alpha * t.dt).exp();
        let q = t.from * g * growth_integral(alpha, t.dt);
        let r = t.to - t.from * g;
        ss += r * r / q;
        log_q += q.ln();
    }
    let s = ss / n;
    let ll = -0.5 * n * ((2.0 * PI).ln() + 1.0 + s.ln()) - 0.5 * log_q;
    if ll.is_nan() {
        (f64::NEG_INFINITY, s)
    } else {
        (ll, s)
    }
}

/// Profile log-likelihood of the Gaussian approximation at `alpha`, over
/// intervals that start from a positive count.
pub fn gaussian_profile_loglik(alpha: f64, series: &[ObservationSeries]) -> f64 {
    let tr: Vec<Transition> = series
        .iter()
        .flat_map(|s| s.transitions())
        .filter(|t| t.from > 0.0)
        .collect();
    profile(alpha, &tr).0
}

/// Maximum-likelihood fit of the Gaussian approximation.
///
/// `sigma^2` is profiled out and the profile is maximized over `alpha` by
/// golden-section search on a bracket grown from [`super::initial_guess`].
/// Intervals starting at zero are dropped.
pub fn gaussian_mle(series: &[ObservationSeries], cfg: &SolverConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let all = transitions_of(series)?;
    let tr: Vec<Transition> = all.iter().copied().filter(|t| t.from > 0.0).collect();
    let dropped = all.len() - tr.len();
    if tr.is_empty() {
        return Err(Error::DegenerateData(
            "every interval starts from zero".into(),
        ));
    }
    let f = |a: f64| profile(a, &tr).0;

    let guess = initial_guess(&tr);
    let a0 = if guess.is_finite() { guess } else { 0.0 };
    let width = a0.abs().max(0.1);
    let (mut a, mut b) = (a0 - width, a0);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut evals = 2;
    if fa > fb {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + (b - a);
    let mut fc = f(c);
    evals += 1;
    let mut steps = 0;
    while fc > fb {
        (a, b) = (b, c);
        fb = fc;
        c = b + cfg.bracket_expand * (b - a);
        fc = f(c);
        evals += 1;
        steps += 1;
        if steps >= cfg.max_iter {
            return Err(Error::NonConvergence(steps));
        }
    }
    let (lo, hi) = if a < c { (a, c) } else { (c, a) };
    let sol = golden_max(f, lo, hi, cfg.root_tol, cfg.max_iter)?;
    evals += sol.evaluations;

    let alpha = sol.x;
    // an exact exponential fit sends the profile to +inf at a zero variance
    let worst = tr
        .iter()
        .map(|t| ((t.to - t.from * (alpha * t.dt).exp()) / t.to.max(t.from)).abs())
        .fold(0.0, f64::max);
    if worst.is_nan() || worst <= 1e-8 {
        let (_, s) = profile(alpha, &tr);
        return Err(Error::DegenerateVariance(format!(
            "profile variance {s:e} at alpha = {alpha}"
        )));
    }
    let sigma2 = sigma2_of(alpha, &tr, cfg);
    let mut res = EstimateResult::from_growth(Method::GaussianMle, alpha, sigma2, evals);
    if series.iter().any(|s| s.has_interior_zero()) {
        res.warnings.push(FitWarning::InteriorZeros);
    }
    if dropped > 0 {
        res.warnings.push(FitWarning::DroppedZeroIntervals(dropped));
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{gaussian_joint_loglik, gw_estimate, sigma2_plugin};
    use crate::simulate::{gillespie, observe, sample_schedule};
    use crate::types::RateParams;

    fn series(times: &[f64], counts: &[f64]) -> ObservationSeries {
        ObservationSeries::new(times.to_vec(), counts.to_vec()).unwrap()
    }

    #[test]
    fn profile_matches_joint_likelihood() {
        let s = [series(&[0.0, 0.5, 1.7, 2.0], &[100.0, 108.0, 131.0, 129.0])];
        for alpha in [-0.2, 0.05, 0.15] {
            let s2 = sigma2_plugin(alpha, &s).unwrap();
            let joint = gaussian_joint_loglik(alpha, s2, &s).unwrap();
            let prof = gaussian_profile_loglik(alpha, &s);
            assert!(
                (joint - prof).abs() < 1e-10 * joint.abs(),
                "{joint} vs {prof}"
            );
            // profiled sigma^2 maximizes the joint likelihood
            for k in [0.9, 1.1] {
                assert!(gaussian_joint_loglik(alpha, k * s2, &s).unwrap() < joint);
            }
        }
    }

    #[test]
    fn profile_is_continuous_at_zero() {
        let s = [series(&[0.0, 1.0, 2.5], &[100.0, 103.0, 104.0])];
        let at0 = gaussian_profile_loglik(0.0, &s);
        let near = gaussian_profile_loglik(1e-9, &s);
        let below = gaussian_profile_loglik(-1e-9, &s);
        assert!((at0 - near).abs() < 1e-6 && (at0 - below).abs() < 1e-6);
    }

    #[test]
    fn equidistant_matches_gw() {
        let s = [series(
            &[0.0, 1.0, 2.0, 3.0, 4.0],
            &[100.0, 117.0, 125.0, 151.0, 160.0],
        )];
        let g = gw_estimate(&s).unwrap().alpha_hat.unwrap();
        let r = gaussian_mle(&s, &SolverConfig::default()).unwrap();
        assert!((r.alpha_hat.unwrap() - g).abs() < 1e-6);
    }

    #[test]
    fn exponential_fixture() {
        let times = [0.0f64, 0.7, 1.9, 3.2];
        let counts: Vec<f64> = times
            .iter()
            .map(|t| (1000.0 * (0.1 * t).exp()).round())
            .collect();
        let r = gaussian_mle(&[series(&times, &counts)], &SolverConfig::default()).unwrap();
        assert!((r.alpha_hat.unwrap() - 0.1).abs() < 2e-3);
    }

    #[test]
    fn exact_geometric_data_has_no_variance() {
        let s = [series(&[0.0, 1.0, 2.0], &[100.0, 110.0, 121.0])];
        assert!(matches!(
            gaussian_mle(&s, &SolverConfig::default()),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn flags_interior_zeros() {
        let s = [series(&[0.0, 1.0, 2.0, 3.0], &[50.0, 0.0, 40.0, 60.0])];
        let r = gaussian_mle(&s, &SolverConfig::default()).unwrap();
        assert!(r.warnings.contains(&FitWarning::InteriorZeros));
        assert!(r.warnings.contains(&FitWarning::DroppedZeroIntervals(1)));
    }

    #[test]
    fn large_population_recovers_alpha() {
        let p = RateParams::new(0.2, 0.1).unwrap();
        let times = sample_schedule(10, 1.0, 1.0, 5).unwrap();
        let t_max = *times.last().unwrap();
        let series: Vec<ObservationSeries> = (0..10)
            .map(|k| observe(&gillespie(p, 10_000, t_max, 100 + k).unwrap(), &times).unwrap())
            .collect();
        let r = gaussian_mle(&series, &SolverConfig::default()).unwrap();
        // continuous-observation bound: var = (lambda + mu) / E[integral of the summed sizes]
        let exposure = 1e5 * (0.1 * t_max).exp_m1() / 0.1;
        let se = (0.3 / exposure).sqrt();
        assert!(
            (r.alpha_hat.unwrap() - 0.1).abs() < 3.0 * se,
            "{:?} se {se}",
            r.alpha_hat
        );
    }
}
