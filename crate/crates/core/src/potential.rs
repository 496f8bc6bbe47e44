//! The confining potential λ z^{2m} and its reduction to dimensionless form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent m of the potential x^{2m}. The infinite-square-well limit is a
/// separate variant: it has analytic solutions and no classical
/// representation, so it must never be approximated by a large integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Exponent {
    Finite(u32),
    Infinite,
}

impl Exponent {
    pub fn finite(self) -> Result<u32> {
        match self {
            Exponent::Finite(m) => Ok(m),
            Exponent::Infinite => {
                Err(Error::domain("operation requires a finite exponent; the box limit is handled analytically"))
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(m) => write!(f, "{m}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "infinity" => Ok(Exponent::Infinite),
            other => match other.parse::<u32>() {
                Ok(m) if m >= 1 => Ok(Exponent::Finite(m)),
                _ => Err(Error::domain(format!("invalid exponent {other:?}: expected m >= 1 or \"inf\""))),
            },
        }
    }
}

/// Physical potential λ z^{2m} for a particle of mass μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub exponent: Exponent,
    pub lambda: f64,
    pub mu: f64,
    pub hbar: f64,
}

impl Potential {
    /// λ = μ = ħ = 1.
    pub fn power(m: u32) -> Self {
        Potential { exponent: Exponent::Finite(m), lambda: 1.0, mu: 1.0, hbar: 1.0 }
    }

    pub fn infinite_well() -> Self {
        Potential { exponent: Exponent::Infinite, lambda: 1.0, mu: 1.0, hbar: 1.0 }
    }

    pub fn new(exponent: Exponent, lambda: f64, mu: f64, hbar: f64) -> Result<Self> {
        if let Exponent::Finite(0) = exponent {
            return Err(Error::domain("exponent m must be >= 1"));
        }
        for (name, v) in [("lambda", lambda), ("mu", mu), ("hbar", hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Potential { exponent, lambda, mu, hbar })
    }

    /// Harmonic oscillator μω²z²/2, i.e. m = 1 and λ = μω²/2.
    pub fn harmonic(mu: f64, omega: f64, hbar: f64) -> Result<Self> {
        Potential::new(Exponent::Finite(1), 0.5 * mu * omega * omega, mu, hbar)
    }

    /// Length scale β with z = βx.
    pub fn beta(&self) -> f64 {
        let base = self.hbar * self.hbar / (2.0 * self.mu * self.lambda);
        match self.exponent {
            Exponent::Finite(m) => base.powf(1.0 / (2.0 * m as f64 + 2.0)),
            Exponent::Infinite => 1.0,
        }
    }

    /// Energy scale γ = λβ^{2m} with E = γε.
    pub fn gamma(&self) -> f64 {
        match self.exponent {
            Exponent::Finite(m) => self.lambda * self.beta().powi(2 * m as i32),
            Exponent::Infinite => self.lambda,
        }
    }
}
