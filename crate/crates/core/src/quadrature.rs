//! Adaptive Gauss-Legendre quadrature, including the nested form
//! `∫ g(s) exp(-∫_a^s r) ds` used by the time-varying moment functions.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * x
        .iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
}

/// Each panel must meet the relative tolerance on its own value or its share
/// `abs_tol` of the global error budget.
fn accept(whole: f64, split: f64, rel_tol: f64, abs_tol: f64) -> bool {
    (whole - split).abs() <= (rel_tol * split.abs()).max(abs_tol)
}

/// `∫_a^b f` to relative tolerance `rel_tol`, refining panels by bisection.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b);
    let abs_tol = rel_tol * whole.abs();
    refine(&mut f, a, b, whole, rel_tol, abs_tol, 0)
}

fn refine(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let split = left + right;
    if !split.is_finite() {
        return Err(Error::QuadratureFailure { a, b });
    }
    if accept(whole, split, rel_tol, abs_tol) {
        return Ok(split);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure { a, b });
    }
    let half = 0.5 * abs_tol;
    Ok(refine(f, a, m, left, rel_tol, half, depth + 1)?
        + refine(f, m, b, right, rel_tol, half, depth + 1)?)
}

/// `∫_a^b g(s) exp(-∫_a^s r(u) du) ds`.
///
/// The inner integral is carried along the outer recursion: each outer panel
/// knows `∫_a^p r` at its left edge and integrates `r` only from there to its
/// own nodes.
pub fn integrate_nested(
    g: &impl Fn(f64) -> f64,
    r: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = nested_panel(g, r, a, b, 0.0, rel_tol)?;
    let abs_tol = rel_tol * whole.abs();
    nested_refine(g, r, a, b, 0.0, whole, rel_tol, abs_tol, 0)
}

fn nested_panel(
    g: &impl Fn(f64) -> f64,
    r: &impl Fn(f64) -> f64,
    p: f64,
    q: f64,
    inner_at_p: f64,
    rel_tol: f64,
) -> Result<f64> {
    let (x, w) = rule();
    let half = 0.5 * (q - p);
    let mid = 0.5 * (p + q);
    let mut sum = 0.0;
    for (&xi, &wi) in x.iter().zip(w) {
        let s = mid + half * xi;
        let inner = inner_at_p + integrate(r, p, s, rel_tol)?;
        sum += wi * g(s) * (-inner).exp();
    }
    Ok(half * sum)
}

#[allow(clippy::too_many_arguments)]
fn nested_refine(
    g: &impl Fn(f64) -> f64,
    r: &impl Fn(f64) -> f64,
    p: f64,
    q: f64,
    inner_at_p: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (p + q);
    let inner_at_m = inner_at_p + integrate(r, p, m, rel_tol)?;
    let left = nested_panel(g, r, p, m, inner_at_p, rel_tol)?;
    let right = nested_panel(g, r, m, q, inner_at_m, rel_tol)?;
    let split = left + right;
    if !split.is_finite() {
        return Err(Error::QuadratureFailure { a: p, b: q });
    }
    if accept(whole, split, rel_tol, abs_tol) {
        return Ok(split);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure { a: p, b: q });
    }
    let half = 0.5 * abs_tol;
    Ok(
        nested_refine(g, r, p, m, inner_at_p, left, rel_tol, half, depth + 1)?
            + nested_refine(g, r, m, q, inner_at_m, right, rel_tol, half, depth + 1)?,
    )
}
