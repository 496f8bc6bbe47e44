//! Local interpolation and fitting on non-uniform grids.

use nalgebra::{DMatrix, DVector};

use crate::quadrature::gl3;

/// Index i with xs[i] <= x <= xs[i+1], clamped to the valid range.
pub(crate) fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    }
}

/// Four-point Lagrange stencil start for interval i.
fn stencil(n: usize, i: usize) -> usize {
    if n < 4 {
        0
    } else {
        i.saturating_sub(1).min(n - 4)
    }
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..xs.len() {
        let mut l = 1.0;
        for k in 0..xs.len() {
            if k != j {
                l *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        sum += l * ys[j];
    }
    sum
}

/// Piecewise cubic (local four-point Lagrange) interpolant.
pub(crate) fn cubic_at(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 2 {
        return ys.first().copied().unwrap_or(0.0);
    }
    let i = locate(xs, x);
    let s = stencil(n, i);
    let e = (s + 4).min(n);
    lagrange(&xs[s..e], &ys[s..e], x)
}

/// Cumulative integral of the piecewise cubic interpolant: out[i] = ∫_{xs[0]}^{xs[i]}.
pub(crate) fn cumulative_cubic(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n];
    let rule = gl3();
    for i in 0..n.saturating_sub(1) {
        let s = stencil(n, i);
        let e = (s + 4).min(n);
        let piece = rule.integrate(xs[i], xs[i + 1], |x| lagrange(&xs[s..e], &ys[s..e], x));
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Least-squares polynomial of the given degree through the window
/// xs[lo..hi], returning its value and first three derivatives at `at`.
/// The second element is the condition estimate of the normal matrix.
pub(crate) fn poly_fit_derivatives(xs: &[f64], ys: &[f64], at: f64, degree: usize) -> ([f64; 4], f64) {
    let n = xs.len();
    let cols = degree + 1;
    let scale = xs.iter().map(|x| (x - at).abs()).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut a = DMatrix::<f64>::zeros(n, cols);
    let mut b = DVector::<f64>::zeros(n);
    for (r, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let t = (x - at) / scale;
        let mut p = 1.0;
        for c in 0..cols {
            a[(r, c)] = p;
            p *= t;
        }
        b[r] = y;
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min().max(f64::MIN_POSITIVE);
    let coef = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(cols));
    let get = |k: usize| if k < cols { coef[k] } else { 0.0 };
    ([get(0), get(1) / scale, 2.0 * get(2) / (scale * scale), 6.0 * get(3) / (scale * scale * scale)], cond)
}
