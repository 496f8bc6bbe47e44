//! Closed-form states: the harmonic oscillator (m = 1) and the infinite well.

use std::f64::consts::PI;

use super::{EigenSolution, Representation};
use crate::error::Result;
use crate::potential::Exponent;
use crate::special::{hermite, ln_gamma};

const DEFAULT_POINTS: usize = 801;

/// ψ_n(x) = N_n H_n(x) e^{-x²/2} and derivatives, signed so that ψ(0) > 0
/// (even n) or ψ'(0) > 0 (odd n).
pub(crate) fn harmonic_psi(n: usize, x: f64) -> Result<[f64; 4]> {
    let nf = n as f64;
    let ln_norm = -0.5 * (0.5 * PI.ln() + nf * std::f64::consts::LN_2 + ln_gamma(nf + 1.0)?);
    let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let h = |k: usize| -> Result<f64> { hermite(k, x) };
    let h0 = h(n)?;
    let h1 = if n >= 1 { 2.0 * nf * h(n - 1)? } else { 0.0 };
    let h2 = if n >= 2 { 4.0 * nf * (nf - 1.0) * h(n - 2)? } else { 0.0 };
    let h3 = if n >= 3 { 8.0 * nf * (nf - 1.0) * (nf - 2.0) * h(n - 3)? } else { 0.0 };
    let e = sign * (ln_norm - 0.5 * x * x).exp();
    Ok([
        e * h0,
        e * (h1 - x * h0),
        e * (h2 - 2.0 * x * h1 + (x * x - 1.0) * h0),
        e * (h3 - 3.0 * x * h2 + 3.0 * (x * x - 1.0) * h1 - (x * x * x - 3.0 * x) * h0),
    ])
}

/// ψ_n(x) = sin(k(x + 1)) with k = π(n+1)/2 on |x| < 1.
pub(crate) fn box_psi(n: usize, x: f64) -> [f64; 4] {
    if x >= 1.0 {
        return [0.0; 4];
    }
    let k = PI * (n as f64 + 1.0) / 2.0;
    let (s, c) = (k * (x + 1.0)).sin_cos();
    let sgn = sign_of_origin(n, k);
    [sgn * s, sgn * k * c, -sgn * k * k * s, -sgn * k * k * k * c]
}

/// Sign making ψ(0) > 0 (even n) or ψ'(0) > 0 (odd n).
fn sign_of_origin(n: usize, k: f64) -> f64 {
    if n.is_multiple_of(2) {
        k.sin().signum()
    } else {
        k.cos().signum()
    }
}

fn sample(
    n: usize,
    m: Exponent,
    epsilon: f64,
    grid: Vec<f64>,
    repr: Representation,
    psi_of: impl Fn(f64) -> Result<[f64; 4]>,
) -> Result<EigenSolution> {
    let mut psi = Vec::with_capacity(grid.len());
    let mut rho = Vec::with_capacity(grid.len());
    let mut drho = Vec::with_capacity(grid.len());
    for &x in &grid {
        let d = psi_of(x)?;
        psi.push(d[0]);
        rho.push(d[0] * d[0]);
        drho.push(2.0 * d[0] * d[1]);
    }
    Ok(EigenSolution { n, m, epsilon, grid, psi, rho, drho, accuracy_estimate: 0.0, repr, table: Default::default() })
}

/// Harmonic state with ε = 2n + 1 on a uniform grid over [0, √(2n+1) + 8].
pub fn analytic_harmonic(n: usize) -> EigenSolution {
    let x_max = (2.0 * n as f64 + 1.0).sqrt() + 8.0;
    let grid = (0..DEFAULT_POINTS).map(|i| x_max * i as f64 / (DEFAULT_POINTS - 1) as f64).collect();
    analytic_harmonic_on(n, grid).expect("Hermite values are finite for moderate n")
}

/// Harmonic state sampled on a caller-supplied grid of x >= 0.
pub fn analytic_harmonic_on(n: usize, grid: Vec<f64>) -> Result<EigenSolution> {
    sample(n, Exponent::Finite(1), 2.0 * n as f64 + 1.0, grid, Representation::Harmonic, |x| harmonic_psi(n, x))
}

/// Infinite-well state on (-1, 1): ε = π²(n+1)²/4, ρ = sin²(π(n+1)(x+1)/2).
pub fn analytic_box(n: usize) -> EigenSolution {
    let grid = (0..DEFAULT_POINTS).map(|i| i as f64 / (DEFAULT_POINTS - 1) as f64).collect();
    analytic_box_on(n, grid).expect("grid inside the well")
}

pub fn analytic_box_on(n: usize, grid: Vec<f64>) -> Result<EigenSolution> {
    let k = PI * (n as f64 + 1.0) / 2.0;
    sample(n, Exponent::Infinite, k * k, grid, Representation::Box, |x| Ok(box_psi(n, x)))
}
