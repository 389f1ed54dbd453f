//! Growth estimation when the per-capita rates vary in time,
//! `lambda(t; theta)` and `mu(t; theta)`.
//!
//! Over an interval `[T_i, T_{i+1}]` the size is approximately Gaussian with
//! mean `X_i m_i(theta)` and variance `X_i v_i(theta)`, where
//! `m_i = exp(∫ (lambda - mu))` and
//! `v_i = m_i^2 ∫ (lambda + mu)(u) exp(-∫_{T_i}^u (lambda - mu)) du`.
//! The estimator solves `sum (dm_i/dtheta / v_i) (X_{i+1} - X_i m_i) = 0`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimate::SolverConfig;
use crate::quadrature::{integrate, integrate_nested};
use crate::types::{EstimateResult, Method, ObservationSeries, Transition};

/// Quadrature relative tolerance for every moment integral.
pub const QUAD_TOL: f64 = 1e-9;
/// Relative step of the central differences in `theta`.
pub const FD_STEP: f64 = 1e-6;

pub type RateFn = Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// `(T_i, T_{i+1}, theta) -> dm_i/dtheta`.
pub type MeanGradientFn = Box<dyn Fn(f64, f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// A parametric family of birth and death rates.
pub struct RateFunctionSpec {
    birth: RateFn,
    death: RateFn,
    bounds: Vec<(f64, f64)>,
    mean_gradient: Option<MeanGradientFn>,
}

impl std::fmt::Debug for RateFunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateFunctionSpec")
            .field("bounds", &self.bounds)
            .field("analytic_gradient", &self.mean_gradient.is_some())
            .finish()
    }
}

impl RateFunctionSpec {
    /// `bounds[k]` is the closed interval allowed for `theta[k]`.
    pub fn new(
        birth: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        death: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidParams(
                "theta needs at least one component".into(),
            ));
        }
        if let Some(k) = bounds
            .iter()
            .position(|&(lo, hi)| lo.is_nan() || hi.is_nan() || lo >= hi)
        {
            return Err(Error::InvalidParams(format!("empty bounds for theta[{k}]")));
        }
        Ok(Self {
            birth: Box::new(birth),
            death: Box::new(death),
            bounds,
            mean_gradient: None,
        })
    }

    /// Supply `dm_i/dtheta` in closed form instead of finite differences.
    pub fn with_mean_gradient(
        mut self,
        g: impl Fn(f64, f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.mean_gradient = Some(Box::new(g));
        self
    }

    pub fn theta_dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn birth(&self, t: f64, theta: &[f64]) -> f64 {
        (self.birth)(t, theta)
    }

    pub fn death(&self, t: f64, theta: &[f64]) -> f64 {
        (self.death)(t, theta)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.mean_gradient.is_some()
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.bounds.len() {
            return Err(Error::InvalidParams(format!(
                "theta has {} components, expected {}",
                theta.len(),
                self.bounds.len()
            )));
        }
        for (k, (&v, &(lo, hi))) in theta.iter().zip(&self.bounds).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds(k));
            }
        }
        Ok(())
    }

    /// Constant rates `lambda = theta[0] + death`, `mu = death`, so that
    /// `theta[0]` is the growth rate.
    pub fn constant_growth(death: f64) -> Self {
        let bound = if death > 0.0 { -death } else { 0.0 };
        Self::new(
            move |_, th| th[0] + death,
            move |_, _| death,
            vec![(bound, 1e3)],
        )
        .expect("valid bounds")
        .with_mean_gradient(|t0, t1, th| {
            let dt = t1 - t0;
            vec![dt * (th[0] * dt).exp()]
        })
    }

    /// `lambda(t) = theta[0] + theta[1] t`, constant `mu`.
    pub fn linear_birth(death: f64) -> Self {
        Self::new(
            |t, th| th[0] + th[1] * t,
            move |_, _| death,
            vec![(0.0, 1e3), (0.0, 1e3)],
        )
        .expect("valid bounds")
        .with_mean_gradient(move |t0, t1, th| {
            let dt = t1 - t0;
            let m = (th[0] * dt + 0.5 * th[1] * (t1 * t1 - t0 * t0) - death * dt).exp();
            vec![m * dt, m * 0.5 * (t1 * t1 - t0 * t0)]
        })
    }

    /// Declining fitness `lambda(t) = a e^{-b t}` with constant `mu`;
    /// `theta = (a, b)`.
    pub fn exp_decay(death: f64) -> Self {
        Self::new(
            |t, th| th[0] * (-th[1] * t).exp(),
            move |_, _| death,
            vec![(0.0, 1e3), (1e-8, 1e2)],
        )
        .expect("valid bounds")
        .with_mean_gradient(move |t0, t1, th| {
            let (a, b) = (th[0], th[1]);
            let (e0, e1) = ((-b * t0).exp(), (-b * t1).exp());
            // ∫ e^{-bs} ds over [t0, t1], written to stay accurate for small b
            let dt = t1 - t0;
            let q = e0 * -(-b * dt).exp_m1() / b;
            let m = (a * q - death * dt).exp();
            let dq_db = (t1 * e1 - t0 * e0) / b - q / b;
            vec![m * q, m * a * dq_db]
        })
    }
}

/// Per-interval moment multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunctions {
    /// `m_i = exp(∫ (lambda - mu))`.
    pub mean: Vec<f64>,
    /// `∫ (lambda + mu)(u) exp(-∫_{T_i}^u (lambda - mu)) du`.
    pub variance_integral: Vec<f64>,
    /// `m_i^2` times the integral: the variance of `X(T_{i+1})` per ancestor.
    pub variance: Vec<f64>,
}

fn net_rate<'a>(spec: &'a RateFunctionSpec, theta: &'a [f64]) -> impl Fn(f64) -> f64 + 'a {
    move |s| spec.birth(s, theta) - spec.death(s, theta)
}

fn check_rates(spec: &RateFunctionSpec, theta: &[f64], t0: f64, t1: f64) -> Result<()> {
    for s in [t0, 0.5 * (t0 + t1), t1] {
        let (b, d) = (spec.birth(s, theta), spec.death(s, theta));
        if !(b >= 0.0 && d >= 0.0 && b.is_finite() && d.is_finite()) {
            return Err(Error::Domain(format!("rates ({b}, {d}) at t = {s}")));
        }
    }
    Ok(())
}

/// `m_i` over `[t0, t1]`.
pub fn mean_multiplier(spec: &RateFunctionSpec, theta: &[f64], t0: f64, t1: f64) -> Result<f64> {
    Ok(integrate(net_rate(spec, theta), t0, t1, QUAD_TOL)?.exp())
}

fn interval_moments(
    spec: &RateFunctionSpec,
    theta: &[f64],
    t0: f64,
    t1: f64,
) -> Result<(f64, f64)> {
    check_rates(spec, theta, t0, t1)?;
    let mean = mean_multiplier(spec, theta, t0, t1)?;
    let total = |s: f64| spec.birth(s, theta) + spec.death(s, theta);
    let integral = integrate_nested(&total, &net_rate(spec, theta), t0, t1, QUAD_TOL)?;
    Ok((mean, integral))
}

/// Mean and variance multipliers for each interval of `times`.
pub fn moment_functions(
    spec: &RateFunctionSpec,
    theta: &[f64],
    times: &[f64],
) -> Result<MomentFunctions> {
    spec.check_theta(theta)?;
    let n = times.len().saturating_sub(1);
    let mut out = MomentFunctions {
        mean: Vec::with_capacity(n),
        variance_integral: Vec::with_capacity(n),
        variance: Vec::with_capacity(n),
    };
    for w in times.windows(2) {
        let (m, v) = interval_moments(spec, theta, w[0], w[1])?;
        out.mean.push(m);
        out.variance_integral.push(v);
        out.variance.push(m * m * v);
    }
    Ok(out)
}

fn fd_step(v: f64) -> f64 {
    FD_STEP * v.abs().max(1e-3)
}

/// `dm_i/dtheta` as `m_i` times a central difference of `∫ (lambda - mu)`.
pub fn mean_gradient_fd(
    spec: &RateFunctionSpec,
    theta: &[f64],
    t0: f64,
    t1: f64,
) -> Result<Vec<f64>> {
    let m = mean_multiplier(spec, theta, t0, t1)?;
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        let h = fd_step(theta[k]);
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        up[k] += h;
        down[k] -= h;
        let i_up = integrate(net_rate(spec, &up), t0, t1, QUAD_TOL)?;
        let i_down = integrate(net_rate(spec, &down), t0, t1, QUAD_TOL)?;
        grad.push(m * (i_up - i_down) / (2.0 * h));
    }
    Ok(grad)
}

/// `dm_i/dtheta`, analytic when the model provides it.
pub fn mean_gradient(spec: &RateFunctionSpec, theta: &[f64], t0: f64, t1: f64) -> Result<Vec<f64>> {
    match &spec.mean_gradient {
        Some(g) => Ok(g(t0, t1, theta)),
        None => mean_gradient_fd(spec, theta, t0, t1),
    }
}

struct IntervalTerms {
    grad: Vec<f64>,
    mean: f64,
    variance: f64,
}

fn interval_terms(
    spec: &RateFunctionSpec,
    theta: &[f64],
    t0: f64,
    t1: f64,
) -> Result<IntervalTerms> {
    let (mean, integral) = interval_moments(spec, theta, t0, t1)?;
    Ok(IntervalTerms {
        grad: mean_gradient(spec, theta, t0, t1)?,
        mean,
        variance: mean * mean * integral,
    })
}

fn residual_of(spec: &RateFunctionSpec, theta: &[f64], tr: &[Transition]) -> Result<Vec<f64>> {
    let mut r = vec![0.0; theta.len()];
    for t in tr {
        let it = interval_terms(spec, theta, t.start, t.start + t.dt)?;
        let resid = t.to - t.from * it.mean;
        for (rk, gk) in r.iter_mut().zip(&it.grad) {
            *rk += gk / it.variance * resid;
        }
    }
    Ok(r)
}

/// Left side of the estimating equation at `theta`, pooled over all series.
pub fn estimating_equation(
    spec: &RateFunctionSpec,
    theta: &[f64],
    series: &[ObservationSeries],
) -> Result<Vec<f64>> {
    spec.check_theta(theta)?;
    let tr: Vec<Transition> = series.iter().flat_map(|s| s.transitions()).collect();
    residual_of(spec, theta, &tr)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve `J x = b` by Gaussian elimination with partial pivoting.
fn solve_linear(mut j: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| j[p][col].abs().total_cmp(&j[q][col].abs()))?;
        if j[piv][col] == 0.0 || !j[piv][col].is_finite() {
            return None;
        }
        j.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = j[row][col] / j[col][col];
            let (top, bottom) = j.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| j[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / j[row][row];
    }
    Some(x)
}

/// Damped Newton on the estimating equation from `theta_init`, with a
/// central-difference Jacobian.
///
/// Steps are halved until the residual norm decreases and the iterate stays
/// within the bounds. Several roots may exist; the one reached from
/// `theta_init` is returned with its residual norm.
pub fn generalized_estimate(
    spec: &RateFunctionSpec,
    series: &[ObservationSeries],
    theta_init: &[f64],
    cfg: &SolverConfig,
) -> Result<EstimateResult> {
    let start = Instant::now();
    cfg.validate()?;
    spec.check_theta(theta_init)?;
    let tr: Vec<Transition> = series.iter().flat_map(|s| s.transitions()).collect();
    if tr.is_empty() {
        return Err(Error::DegenerateData("no observation intervals".into()));
    }
    let d = theta_init.len();
    let mut theta = theta_init.to_vec();
    let mut r = residual_of(spec, &theta, &tr)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        if norm(&r) == 0.0 {
            converged = true;
            break;
        }
        let mut jac = vec![vec![0.0; d]; d];
        for k in 0..d {
            let h = fd_step(theta[k]);
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[k] += h;
            down[k] -= h;
            let (ru, rd) = (residual_of(spec, &up, &tr)?, residual_of(spec, &down, &tr)?);
            for i in 0..d {
                jac[i][k] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = solve_linear(jac, neg_r).ok_or(Error::NonConvergence(iterations))?;

        let mut scale = 1.0;
        let mut accepted = None;
        let mut left_bounds = None;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(&step)
                .map(|(t, s)| t + scale * s)
                .collect();
            match spec.check_theta(&cand) {
                Err(Error::OutOfBounds(k)) => left_bounds = Some(k),
                Err(e) => return Err(e),
                Ok(()) => {
                    if let Ok(rc) = residual_of(spec, &cand, &tr) {
                        if norm(&rc) < norm(&r)
                            || scale * norm(&step) <= 1e-14 * (1.0 + norm(&theta))
                        {
                            accepted = Some((cand, rc));
                            break;
                        }
                    }
                }
            }
            scale *= 0.5;
        }
        let Some((cand, rc)) = accepted else {
            return match left_bounds {
                Some(k) => Err(Error::OutOfBounds(k)),
                None => Err(Error::NonConvergence(iterations)),
            };
        };
        let moved = theta
            .iter()
            .zip(&cand)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = cand;
        r = rc;
        let size = theta.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if moved <= cfg.root_tol * (1.0 + size) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(iterations));
    }
    let mut res = EstimateResult::failed(Method::Generalized, iterations);
    res.converged = true;
    res.residual_norm = Some(norm(&r));
    res.theta_hat = Some(theta);
    res.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Per-interval weights `dm_i(theta0)/dtheta / v_i(theta0) * m_i(theta0) * prod_{j<i} m_j(theta0)`
/// summed: the normalizer shared by [`g_generalized`] and [`g_star_generalized`].
fn normalizer(spec: &RateFunctionSpec, theta0: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; theta0.len()];
    let mut growth = 1.0;
    for w in times.windows(2) {
        let it = interval_terms(spec, theta0, w[0], w[1])?;
        for (a, g) in acc.iter_mut().zip(&it.grad) {
            *a += g / it.variance * it.mean * growth;
        }
        growth *= it.mean;
    }
    Ok(acc)
}

/// Estimating equation of one series divided componentwise by
/// `X_1` times the normalizer at `theta0`.
pub fn g_generalized(
    theta: &[f64],
    theta0: &[f64],
    spec: &RateFunctionSpec,
    series: &ObservationSeries,
) -> Result<Vec<f64>> {
    spec.check_theta(theta)?;
    spec.check_theta(theta0)?;
    let tr: Vec<Transition> = series.transitions().collect();
    let r = residual_of(spec, theta, &tr)?;
    let n = normalizer(spec, theta0, series.times())?;
    let x1 = series.counts()[0];
    Ok(r.iter().zip(&n).map(|(r, n)| r / (x1 * n)).collect())
}

/// Limit of [`g_generalized`] as the initial size grows, for data drawn at `theta0`.
pub fn g_star_generalized(
    theta: &[f64],
    theta0: &[f64],
    spec: &RateFunctionSpec,
    times: &[f64],
) -> Result<Vec<f64>> {
    spec.check_theta(theta)?;
    spec.check_theta(theta0)?;
    let n = normalizer(spec, theta0, times)?;
    let mut acc = vec![0.0; theta.len()];
    let mut growth0 = 1.0;
    for w in times.windows(2) {
        let it = interval_terms(spec, theta, w[0], w[1])?;
        let m0 = mean_multiplier(spec, theta0, w[0], w[1])?;
        for (a, g) in acc.iter_mut().zip(&it.grad) {
            *a += g / it.variance * (m0 - it.mean) * growth0;
        }
        growth0 *= m0;
    }
    Ok(acc.iter().zip(&n).map(|(a, n)| a / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{approx_mle, g_star};

    fn fd_only(spec: RateFunctionSpec) -> RateFunctionSpec {
        RateFunctionSpec {
            mean_gradient: None,
            ..spec
        }
    }

    #[test]
    fn constant_rate_moments() {
        let (l, m) = (0.7, 0.25);
        let spec = RateFunctionSpec::new(move |_, _| l, move |_, _| m, vec![(0.0, 1.0)]).unwrap();
        let times = [0.0, 0.4, 1.9, 5.0];
        let mf = moment_functions(&spec, &[0.5], &times).unwrap();
        for (i, w) in times.windows(2).enumerate() {
            let t = w[1] - w[0];
            let a = l - m;
            assert!((mf.mean[i] - (a * t).exp()).abs() < 1e-9 * mf.mean[i]);
            let closed = (l + m) / a * (1.0 - (-a * t).exp());
            assert!((mf.variance_integral[i] - closed).abs() < 1e-9 * closed);
            let exact = (l + m) / a * (a * t).exp() * (a * t).exp_m1();
            assert!((mf.variance[i] - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn balanced_rates_do_not_grow() {
        let spec = RateFunctionSpec::new(
            |t, _| 0.3 + 0.1 * t.sin(),
            |t, _| 0.3 + 0.1 * t.sin(),
            vec![(0.0, 1.0)],
        )
        .unwrap();
        let mf = moment_functions(&spec, &[0.5], &[0.0, 2.0, 7.0]).unwrap();
        assert!(mf.mean.iter().all(|&m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn mean_is_multiplicative() {
        let spec = RateFunctionSpec::linear_birth(0.1);
        let th = [0.3, 0.05];
        let whole = mean_multiplier(&spec, &th, 1.0, 4.0).unwrap();
        let parts = mean_multiplier(&spec, &th, 1.0, 2.2).unwrap()
            * mean_multiplier(&spec, &th, 2.2, 4.0).unwrap();
        assert!((whole - parts).abs() < 1e-9 * whole);
    }

    #[test]
    fn analytic_gradients_match_differences() {
        for (spec, th) in [
            (RateFunctionSpec::linear_birth(0.1), vec![0.3, 0.05]),
            (RateFunctionSpec::exp_decay(0.05), vec![0.4, 0.2]),
            (RateFunctionSpec::exp_decay(0.05), vec![0.4, 1e-5]),
            (RateFunctionSpec::constant_growth(0.5), vec![-0.2]),
        ] {
            for &(t0, t1) in &[(0.0, 1.0), (2.5, 3.1), (4.0, 9.0)] {
                let a = mean_gradient(&spec, &th, t0, t1).unwrap();
                let f = mean_gradient_fd(&spec, &th, t0, t1).unwrap();
                for (x, y) in a.iter().zip(&f) {
                    assert!(
                        (x - y).abs() <= 1e-5 * x.abs().max(1e-12),
                        "{th:?} [{t0},{t1}]: {a:?} vs {f:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let spec = RateFunctionSpec::linear_birth(0.1);
        assert!(matches!(
            moment_functions(&spec, &[-0.1, 0.0], &[0.0, 1.0]),
            Err(Error::OutOfBounds(0))
        ));
        assert!(RateFunctionSpec::new(|_, _| 1.0, |_, _| 1.0, vec![(1.0, 0.0)]).is_err());
    }

    fn fixture() -> ObservationSeries {
        let times = vec![0.0, 0.7, 1.9, 3.2, 3.5, 5.0];
        let counts = vec![1000.0, 1080.0, 1205.0, 1399.0, 1410.0, 1650.0];
        ObservationSeries::new(times, counts).unwrap()
    }

    #[test]
    fn constant_rate_reduces_to_approx_mle() {
        let s = [fixture()];
        let cfg = SolverConfig::default();
        let a = approx_mle(&s, &cfg).unwrap().alpha_hat.unwrap();
        for spec in [
            RateFunctionSpec::constant_growth(0.5),
            fd_only(RateFunctionSpec::constant_growth(0.5)),
        ] {
            let r = generalized_estimate(&spec, &s, &[0.05], &cfg).unwrap();
            let th = r.theta_hat.unwrap()[0];
            assert!((th - a).abs() < 1e-6, "{th} vs {a}");
        }
    }

    #[test]
    fn mean_path_is_a_root() {
        let spec = RateFunctionSpec::linear_birth(0.1);
        let th0 = [0.3, 0.05];
        let times = [0.0, 1.0, 2.5, 3.0, 4.2];
        let mf = moment_functions(&spec, &th0, &times).unwrap();
        let mut counts = vec![1e5];
        for m in &mf.mean {
            counts.push(counts.last().unwrap() * m);
        }
        let s = [ObservationSeries::new(times.to_vec(), counts).unwrap()];
        let r = estimating_equation(&spec, &th0, &s).unwrap();
        let scale = estimating_equation(&spec, &[0.31, 0.05], &s).unwrap();
        assert!(norm(&r) < 1e-7 * norm(&scale), "{r:?} vs {scale:?}");
        let fit = generalized_estimate(&spec, &s, &[0.2, 0.1], &SolverConfig::default()).unwrap();
        let th = fit.theta_hat.unwrap();
        assert!(
            (th[0] - 0.3).abs() < 1e-6 && (th[1] - 0.05).abs() < 1e-6,
            "{th:?}"
        );
    }

    #[test]
    fn g_star_vanishes_at_truth() {
        let spec = RateFunctionSpec::linear_birth(0.1);
        let th0 = [0.3, 0.05];
        let times = [0.0, 1.0, 2.5, 3.0, 4.2];
        let g = g_star_generalized(&th0, &th0, &spec, &times).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn g_star_constant_rate_matches_scalar_limit_up_to_scale() {
        let spec = RateFunctionSpec::constant_growth(0.5);
        let times = [0.0, 0.5, 1.7, 2.0, 3.6];
        let a0 = 0.1;
        // the variance scale (lambda + mu)/alpha = (a + 1)/a varies with theta
        let ratios: Vec<f64> = [0.02, 0.05, 0.2, 0.4]
            .iter()
            .map(|&a| {
                let sigma2 = (a + 1.0) / a;
                sigma2 * g_star_generalized(&[a], &[a0], &spec, &times).unwrap()[0]
                    / g_star(a, a0, &times)
            })
            .collect();
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).abs() < 1e-8, "{ratios:?}");
        }
    }

    #[test]
    fn g_matches_g_star_on_mean_path() {
        let spec = RateFunctionSpec::linear_birth(0.1);
        let th0 = [0.3, 0.05];
        let times = [0.0, 1.0, 2.5, 3.0, 4.2];
        let mf = moment_functions(&spec, &th0, &times).unwrap();
        let mut counts = vec![1e6];
        for m in &mf.mean {
            counts.push(counts.last().unwrap() * m);
        }
        let s = ObservationSeries::new(times.to_vec(), counts).unwrap();
        for th in [[0.25, 0.05], [0.3, 0.08]] {
            let g = g_generalized(&th, &th0, &spec, &s).unwrap();
            let gs = g_star_generalized(&th, &th0, &spec, &times).unwrap();
            for (a, b) in g.iter().zip(&gs) {
                assert!((a - b).abs() < 1e-9, "{g:?} vs {gs:?}");
            }
        }
    }
}
