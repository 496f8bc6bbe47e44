//! Bound states of the scaled power-law potentials v(x) = x^{2m} and their
//! classical energy-distribution representation.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: gamma/beta, Hermite and Laguerre polynomials, the Gauss
//!   hypergeometric function on z <= 0 and the auxiliary series S_mp.
//! * [`eigen`]: a double-exponential Sinc collocation eigensolver for
//!   ψ'' + (ε - x^{2m})ψ = 0, a Numerov shooting cross-check and the
//!   analytic harmonic (m = 1) and box (m → ∞) solutions.
//! * [`wkb`]: zeroth- and second-order WKB eigenvalues and their large-m forms.
//! * [`ensemble`]: classical period and position density, the forward and
//!   inverse Abel transforms relating ρ_n(x) to the energy distribution
//!   f_n(ε), cumulative distributions, moments, nodes and small-ε asymptotics.
//! * [`classrep`]: the kernel Q(ε̃, ε) of the integrodifferential equation
//!   obeyed by φ_n = f_n/T and residual checks of both governing equations.
//!
//! ```
//! use classrep::eigen::{solve, SolverConfig};
//! use classrep::ensemble::{inverse_abel, EnergyGrid};
//! use classrep::Potential;
//!
//! let states = solve(&Potential::power(1), 0, &SolverConfig::default()).unwrap();
//! let ground = &states[0];
//! assert!((ground.epsilon - 1.0).abs() < 1e-9);
//!
//! let grid = EnergyGrid::for_state(ground, &Default::default()).unwrap();
//! let f = inverse_abel(ground, &grid).unwrap();
//! assert!((f.integral - 1.0).abs() < 1e-3);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN takes the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classrep;
pub mod eigen;
pub mod ensemble;
mod error;
pub(crate) mod interp;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod wkb;

pub use error::{Error, Result};
pub use potential::{Exponent, Potential};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/eigenstates.md")]
    mod eigenstates {}
    #[doc = include_str!("../../../book/src/wkb.md")]
    mod wkb {}
    #[doc = include_str!("../../../book/src/abel.md")]
    mod abel {}
    #[doc = include_str!("../../../book/src/singularities.md")]
    mod singularities {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
}
