//! Log-space helpers used by the transition kernels.

use statrs::function::factorial::ln_binomial;

/// `log(sum(exp(x)))`, exact for an all `-inf` input (returns `-inf`).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Log-magnitude of a signed sum `sum(sign_i * exp(log_abs_i))`.
///
/// Returns `(log|S|, sign(S))`; a sum that cancels to zero (or below) is
/// reported with sign `0` or `-1` and the caller decides what to do with it.
pub fn signed_log_sum_exp(terms: &[(f64, f64)]) -> (f64, f64) {
    let max = terms
        .iter()
        .map(|&(l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, 0.0);
    }
    let s: f64 = terms.iter().map(|&(l, sign)| sign * (l - max).exp()).sum();
    if s == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (max + s.abs().ln(), s.signum())
    }
}

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        ln_binomial(n, k)
    }
}

/// `k * ln(y)` with the convention `0 * ln(0) = 0`.
pub fn xlogy(k: f64, y: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * y.ln()
    }
}
