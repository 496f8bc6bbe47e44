use rayon::prelude::*;
use serde::Serialize;

use super::distribution::EnergyDistribution;
use super::grid::EnergyGrid;
use super::period;
use crate::eigen::EigenSolution;
use crate::error::{Error, Result};
use crate::potential::Exponent;
use crate::quadrature::{gl10, integrate_adaptive, AdaptiveConfig, GaussLegendre};

/// Relative accuracy of each inverse-transform quadrature.
const ABEL_REL_TOL: f64 = 1e-10;

/// The transform is truncated where ρ falls below this fraction of its peak.
const ABEL_TAIL: f64 = 1e-14;

/// √(x^{2m} - ε) at x = x0 + s², x0 = ε^{1/(2m)}, without cancellation.
fn gap_root(eps: f64, x0: f64, s: f64, m: f64) -> f64 {
    let l = 2.0 * m * (s * s / x0).ln_1p();
    let d = if l < 1.0 { eps * l.exp_m1() } else { (eps.ln() + l).exp() * -(-l).exp_m1() };
    d.sqrt()
}

/// φ(ε) = -(1/π)∫_{x0}^{X} ρ'(x)/√(x^{2m} - ε) dx with x = x0 + s².
fn phi_at(sol: &EigenSolution, eps: f64, m: f64, x_end: f64) -> Result<f64> {
    let x0 = eps.powf(0.5 / m);
    if x0 >= x_end {
        return Ok(0.0);
    }
    let s_end = (x_end - x0).sqrt();
    let integrand = |s: f64| {
        let x = x0 + s * s;
        if s == 0.0 {
            return 2.0 * sol.drho(x0) / (2.0 * m * eps / x0).sqrt();
        }
        2.0 * s * sol.drho(x) / gap_root(eps, x0, s, m)
    };
    // Geometric breakpoints follow the crossover s² ~ x0/(2m) of the root.
    let mut breaks = vec![0.0];
    let mut s = (x0 / (8.0 * m)).sqrt();
    while s < s_end {
        breaks.push(s);
        s *= 2.0;
    }
    breaks.push(s_end);
    let rough: f64 = breaks.windows(2).map(|w| gl10().integrate(w[0], w[1], |s| integrand(s).abs())).sum();
    let q = integrate_adaptive(
        integrand,
        &breaks,
        AdaptiveConfig { rel_tol: ABEL_REL_TOL, abs_tol: 1e-13 * rough, max_panels: 4000 },
    )?;
    Ok(-q.value / std::f64::consts::PI)
}

/// f_n(ε) = -T(ε)/π ∫_ε^∞ (dρ/dv)/√(v - ε) dv on every grid point.
///
/// The integral is carried out in x = v^{1/(2m)} with dρ/dx from the
/// solver's spectral derivative, and x = x0 + s² removes the endpoint
/// singularity. The box has no classical representation: its limiting
/// distribution behaves like 1/ε and is rejected as non-integrable.
pub fn inverse_abel(sol: &EigenSolution, grid: &EnergyGrid) -> Result<EnergyDistribution> {
    let m = match sol.m {
        Exponent::Finite(m) => m,
        Exponent::Infinite => return Err(Error::Integrability { exponent: -1.0 }),
    };
    if sol.drho.is_empty() {
        return Err(Error::domain("solution carries no density derivative data"));
    }
    let mf = m as f64;
    let x_end = sol.density_cutoff(ABEL_TAIL);
    // Build the derivative table once before the parallel section.
    sol.drho(0.0);
    let f = grid
        .points
        .par_iter()
        .map(|&eps| Ok(period(eps, sol.m)? * phi_at(sol, eps, mf, x_end)?))
        .collect::<Result<Vec<f64>>>()?;
    EnergyDistribution::from_samples(sol.n, sol.m, sol.epsilon, grid.clone(), f)
}

/// Density reconstructed by the forward transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardAbel {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    /// Accuracy caveats, e.g. a large share of the density coming from the
    /// extrapolated region below the first grid point.
    pub warnings: Vec<String>,
}

/// Share of the normalization carried by the power-law extrapolation above
/// which the reconstruction near x = 0 is flagged.
const TAIL_SHARE_WARNING: f64 = 1e-3;

/// ρ(x) = ∫_{x^{2m}}^∞ [f(ε)/T(ε)]/√(ε - x^{2m}) dε with ε = v + t².
pub fn forward_abel(f: &EnergyDistribution, xs: &[f64]) -> Result<ForwardAbel> {
    let m = f.m_value();
    let mf = m as f64;
    let sample = f.sampler();
    let phi = |e: f64| sample(e) / period(e, f.m).unwrap_or(f64::INFINITY);
    let grid = &f.eps_grid;
    let rule = GaussLegendre::new(8);
    let eps_max = *grid.last().unwrap();
    let tail = f.low_tail;
    // φ ∝ ε^γ below the grid.
    let gamma = tail.exponent + (mf - 1.0) / (2.0 * mf);
    let phi0 = tail.f0 / period(tail.eps0, f.m)?;

    let rho = xs
        .par_iter()
        .map(|&x| {
            let v = (2.0 * mf * x.abs().ln()).exp();
            if v >= eps_max {
                return Ok(0.0);
            }
            let t_of = |e: f64| (e - v).max(0.0).sqrt();
            let mut total = 0.0;
            // Grid intervals above v.
            let first = grid.partition_point(|&e| e <= v);
            let mut lower = if first == 0 { grid[0] } else { v };
            for &upper in &grid[first..] {
                let (ta, tb) = (t_of(lower), t_of(upper));
                total += rule.integrate(ta, tb, |t| 2.0 * phi(v + t * t));
                lower = upper;
            }
            if v < grid[0] {
                let ta = t_of(grid[0]);
                total += if v == 0.0 {
                    // ∫₀^{ta} 2φ0 (t²/ε0)^γ dt in closed form.
                    2.0 * phi0 * ta * (ta * ta / tail.eps0).powf(gamma) / (2.0 * gamma + 1.0)
                } else {
                    let mut breaks = vec![0.0];
                    let mut t = ta;
                    while t > v.sqrt() * 1e-3 && breaks.len() < 200 {
                        breaks.push(t);
                        t *= 0.5;
                    }
                    breaks.push(ta);
                    breaks.sort_by(f64::total_cmp);
                    breaks.dedup();
                    integrate_adaptive(
                        |t| 2.0 * phi0 * ((v + t * t) / tail.eps0).powf(gamma),
                        &breaks,
                        AdaptiveConfig { rel_tol: 1e-10, ..Default::default() },
                    )?
                    .value
                };
            }
            Ok(total)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut warnings = Vec::new();
    let share = (tail.integral() / f.integral).abs();
    if share > TAIL_SHARE_WARNING {
        warnings.push(format!(
            "{:.2}% of the normalization lies below the first grid point ε = {:e}; density near x = 0 relies on extrapolation",
            100.0 * share,
            tail.eps0
        ));
    }
    Ok(ForwardAbel { x: xs.to_vec(), rho, warnings })
}
