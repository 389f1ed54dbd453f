//! Transition law of the constant-rate process.
//!
//! Three algebraically equivalent forms of `P[X(t) = m | X(0) = n]` are
//! provided, each evaluated in log space:
//!
//! * [`log_transition_keiding`]: the classical sum over surviving ancestors
//!   with weights `(1 - A - B)^j`,
//! * [`log_transition_alternative`]: a sum of nonnegative terms built from
//!   geometric progeny of `j` surviving ancestors,
//! * [`log_transition_2f1`]: a terminating Gauss hypergeometric series.
//!
//! The Gaussian approximation with matching first two moments is
//! [`gaussian_logpdf`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{ln_choose, log_sum_exp, signed_log_sum_exp, xlogy};
use crate::types::{GrowthParams, RateParams};

/// Below this `|alpha t|` the critical-limit series is used for `(e^{alpha t} - 1)/alpha`.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Negative `1 - A - B` of at most this size is rounding noise and is clamped.
const CLAMP_TOLERANCE: f64 = 1e-14;

/// Coefficients `A(t)` and `B(t)` of the transition law over an interval `t`.
///
/// `A` is the probability that a single ancestor leaves no descendants;
/// given survival its progeny is geometric with parameter `B`. The
/// complements are stored separately because they are computed without
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCoeffs {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    one_minus_a: f64,
    one_minus_b: f64,
    one_minus_a_minus_b: f64,
}

impl TransitionCoeffs {
    pub fn one_minus_a(&self) -> f64 {
        self.one_minus_a
    }

    pub fn one_minus_b(&self) -> f64 {
        self.one_minus_b
    }

    /// `1 - A - B`; negative when `|alpha t|` exceeds `|ln(lambda/mu)|`.
    pub fn one_minus_a_minus_b(&self) -> f64 {
        self.one_minus_a_minus_b
    }
}

/// `(e^{alpha t} - 1) / alpha`, continuous through `alpha = 0`.
fn growth_integral(alpha: f64, t: f64) -> f64 {
    let x = alpha * t;
    if x.abs() < SERIES_THRESHOLD {
        t * (1.0 + x / 2.0 + x * x / 6.0)
    } else {
        x.exp_m1() / alpha
    }
}

/// `A(t)` and `B(t)` for rates `p` over an interval of length `t > 0`.
///
/// With `phi = (e^{alpha t} - 1)/alpha` both coefficients reduce to
/// `A = mu phi / (1 + lambda phi)` and `B = lambda phi / (1 + lambda phi)`,
/// which covers the critical limit (`phi = t`) and pure birth (`A = 0`)
/// without special cases.
pub fn coeffs(p: RateParams, t: f64) -> Result<TransitionCoeffs> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "interval must be positive, got {t}"
        )));
    }
    let (lambda, mu) = (p.lambda(), p.mu());
    let phi = growth_integral(p.alpha(), t);
    let (a, b, one_minus_a, one_minus_b, c) = if phi.is_finite() {
        let d = 1.0 + lambda * phi;
        (
            mu * phi / d,
            lambda * phi / d,
            (1.0 + p.alpha() * phi) / d,
            1.0 / d,
            (1.0 - mu * phi) / d,
        )
    } else {
        // e^{alpha t} overflowed: B -> 1, A -> mu / lambda.
        let a = mu / lambda;
        (a, 1.0, 1.0 - a, 0.0, -a)
    };
    Ok(TransitionCoeffs {
        a,
        b,
        t,
        one_minus_a,
        one_minus_b,
        one_minus_a_minus_b: c,
    })
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParams(
            "initial size n must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `ln P[X(t)=m | X(0)=n]` from the sum over `j = 0..min(m, n)` of
/// `C(n,j) C(n+m-j-1, n-1) A^{n-j} B^{m-j} (1-A-B)^j`.
pub fn log_transition_keiding(n: u64, m: u64, c: &TransitionCoeffs) -> Result<f64> {
    check_n(n)?;
    if m == 0 {
        return Ok(xlogy(n as f64, c.a));
    }
    let mut w = c.one_minus_a_minus_b;
    if w < 0.0 {
        if w < -CLAMP_TOLERANCE {
            return Err(Error::Domain(format!(
                "1 - A - B = {w} is negative; use the alternative form"
            )));
        }
        w = 0.0;
    }
    let terms: Vec<f64> = (0..=m.min(n))
        .map(|j| {
            ln_choose(n, j)
                + ln_choose(n + m - j - 1, n - 1)
                + xlogy((n - j) as f64, c.a)
                + xlogy((m - j) as f64, c.b)
                + xlogy(j as f64, w)
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// `ln P[X(t)=m | X(0)=n]` from the sum over surviving ancestors
/// `j = 1..min(n, m)` of `C(m-1,j-1) C(n,j) A^{n-j} B^{m-j} [(1-A)(1-B)]^j`.
/// Every summand is nonnegative. `m = 0` is the extinction probability `A^n`.
pub fn log_transition_alternative(n: u64, m: u64, c: &TransitionCoeffs) -> Result<f64> {
    check_n(n)?;
    if m == 0 {
        return Ok(xlogy(n as f64, c.a));
    }
    let log_survive = c.one_minus_a.ln() + c.one_minus_b.ln();
    let terms: Vec<f64> = (1..=m.min(n))
        .map(|j| {
            ln_choose(m - 1, j - 1)
                + ln_choose(n, j)
                + xlogy((n - j) as f64, c.a)
                + xlogy((m - j) as f64, c.b)
                + j as f64 * log_survive
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Largest estimated rounding error accepted from the hypergeometric series.
pub const SERIES_TOL: f64 = 1e-10;

/// Argument of the hypergeometric form, `(A + B - 1) / (A B)`.
pub fn hypergeometric_argument(c: &TransitionCoeffs) -> f64 {
    -c.one_minus_a_minus_b / (c.a * c.b)
}

/// `ln P[X(t)=m | X(0)=n]` as `A^n B^m C(n+m-1, m) 2F1(-m, -n; 1-n-m; z)`
/// with `z = (A + B - 1)/(A B)`, the series terminating after `min(n, m)`
/// terms. Terms are accumulated by their ratio recurrence in log-magnitude.
///
/// Fails with [`Error::OverflowGuard`] when `A` or `B` vanishes (the
/// argument is infinite) or when cancellation in the alternating series
/// would leave an error above [`SERIES_TOL`] in the result; the alternative
/// form has no such loss.
pub fn log_transition_2f1(n: u64, m: u64, c: &TransitionCoeffs) -> Result<f64> {
    check_n(n)?;
    if m == 0 {
        return Ok(xlogy(n as f64, c.a));
    }
    if !(c.a > 0.0 && c.b > 0.0) {
        return Err(Error::OverflowGuard);
    }
    let w = c.one_minus_a_minus_b;
    let prefactor = n as f64 * c.a.ln() + m as f64 * c.b.ln() + ln_choose(n + m - 1, m);
    if w == 0.0 {
        return Ok(prefactor);
    }
    let log_abs_z = w.abs().ln() - c.a.ln() - c.b.ln();
    if !log_abs_z.is_finite() || !prefactor.is_finite() {
        return Err(Error::OverflowGuard);
    }
    // sign of the ratio T_{k+1}/T_k: (k-m)(k-n) > 0, (k+1-n-m) < 0, so -sign(z) = sign(w)
    let step_sign = w.signum();
    let kmax = m.min(n);
    let mut terms = Vec::with_capacity(kmax as usize + 1);
    let (mut log_t, mut sign) = (0.0f64, 1.0f64);
    terms.push((log_t, sign));
    let (nf, mf) = (n as f64, m as f64);
    for k in 0..kmax {
        let kf = k as f64;
        log_t += (mf - kf).ln() + (nf - kf).ln() - (nf + mf - 1.0 - kf).ln() - (kf + 1.0).ln()
            + log_abs_z;
        sign *= step_sign;
        if !log_t.is_finite() {
            return Err(Error::OverflowGuard);
        }
        terms.push((log_t, sign));
    }
    let (log_sum, s) = signed_log_sum_exp(&terms);
    if s <= 0.0 {
        return Err(Error::OverflowGuard);
    }
    // each log-term carries about k ulps of its magnitude; cancellation
    // amplifies that by sum|T| / |sum T|
    let logs: Vec<f64> = terms.iter().map(|&(l, _)| l).collect();
    let largest = logs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let amplification = (log_sum_exp(&logs) - log_sum).exp();
    let error = amplification * f64::EPSILON * (kmax + 1) as f64 * (1.0 + largest);
    if error.is_nan() || error > SERIES_TOL {
        return Err(Error::OverflowGuard);
    }
    Ok(prefactor + log_sum)
}

/// Default log transition probability: the nonnegative-term form.
pub fn log_transition(n: u64, m: u64, c: &TransitionCoeffs) -> Result<f64> {
    log_transition_alternative(n, m, c)
}

/// Log-density of the Gaussian approximation to `X(t) | X(0) = x` with mean
/// `x e^{alpha t}` and variance `sigma2 x e^{alpha t} (e^{alpha t} - 1)`.
pub fn gaussian_logpdf(x_next: f64, x: f64, g: GrowthParams, t: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidParams(format!("x must be positive, got {x}")));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
    }
    if g.alpha == 0.0 {
        return Err(Error::InvalidParams("alpha must be nonzero".into()));
    }
    let growth = (g.alpha * t).exp();
    let mean = x * growth;
    let var = g.sigma2 * x * growth * (g.alpha * t).exp_m1();
    if !var.is_finite() || var <= 0.0 {
        return Err(Error::DegenerateVariance(format!("variance {var}")));
    }
    let r = x_next - mean;
    Ok(-0.5 * (2.0 * PI * var).ln() - r * r / (2.0 * var))
}
