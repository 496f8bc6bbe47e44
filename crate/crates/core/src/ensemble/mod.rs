//! Classical ensembles and the energy distributions f_n(ε).
//!
//! A state with density ρ_n(x) is represented by trajectories of energy ε
//! distributed with f_n(ε):
//!
//! ρ_n(x) = ∫_{x^{2m}}^∞ q(ε, x) f_n(ε) dε,   q = 1/(T(ε)√(ε - x^{2m})),
//!
//! an Abel transform in v = x^{2m}. [`inverse_abel`] recovers f_n from a
//! solved state, [`forward_abel`] maps a distribution back to a density.

mod abel;
mod asymptotic;
mod distribution;
mod grid;

use crate::error::{Error, Result};
use crate::potential::Exponent;
use crate::special::beta;

pub use abel::{forward_abel, inverse_abel, ForwardAbel};
pub use asymptotic::{
    asymptotic_f, asymptotic_term, c_np, limit_nodes, AsymptoticCase, AsymptoticForm, AsymptoticOrder,
};
pub use distribution::{
    cumulative, mean_energy, mean_energy_below, nodes, scaled_distribution, to_physical, CumulativeDistribution,
    EnergyDistribution, PhysicalDistribution, PowerTail, ScaledPoint,
};
pub use grid::{EnergyGrid, GridConfig, GridType};

/// Classical period T(ε) = B(1/(2m), 1/2) ε^{(1-m)/(2m)} / m.
pub fn period(epsilon: f64, m: Exponent) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("period needs ε > 0, got {epsilon}")));
    }
    let m = m.finite()? as f64;
    Ok(beta(0.5 / m, 0.5)? * ((1.0 - m) / (2.0 * m) * epsilon.ln()).exp() / m)
}

/// Classical position density q(ε, x) = 1/(T(ε)√(ε - x^{2m})) inside the
/// allowed region |x| < ε^{1/(2m)}.
pub fn classical_density(epsilon: f64, x: f64, m: Exponent) -> Result<f64> {
    let t = period(epsilon, m)?;
    let mf = m.finite()? as f64;
    let xt = epsilon.powf(0.5 / mf);
    let v = (2.0 * mf * x.abs().ln()).exp();
    if x.abs() >= xt || v >= epsilon {
        return Err(Error::domain(format!("x = {x} is at or beyond the turning point {xt}")));
    }
    Ok(1.0 / (t * (epsilon - v).sqrt()))
}
