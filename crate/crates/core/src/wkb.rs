//! Zeroth- and second-order WKB levels for x^{2m}.
//!
//! With B₁ = B(1/(2m), 3/2) and B₂ = B(1 - 1/(2m), 1/2):
//!
//! * order 0: ε^{(m+1)/(2m)} = πm(n + 1/2)/B₁
//! * order 2: ε^{(m+1)/(2m)} = πm/(2B₁)·[n + 1/2 + √((n + 1/2)² + B₁B₂(2m-1)(m-1)/(6π²m²))]

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::beta;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkbResult {
    pub n: usize,
    pub m: u32,
    pub order: u8,
    pub epsilon: f64,
    pub b1: f64,
    pub b2: f64,
}

fn b_constants(m: u32) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::domain("exponent m must be >= 1"));
    }
    let mf = m as f64;
    Ok((beta(0.5 / mf, 1.5)?, beta(1.0 - 0.5 / mf, 0.5)?))
}

fn from_power(rhs: f64, m: u32) -> f64 {
    let mf = m as f64;
    // Work in logs: for m ~ 10^6 the exponent is ~2 and rhs is large.
    (rhs.ln() * 2.0 * mf / (mf + 1.0)).exp()
}

pub fn wkb0(n: usize, m: u32) -> Result<WkbResult> {
    let (b1, b2) = b_constants(m)?;
    let rhs = PI * m as f64 * (n as f64 + 0.5) / b1;
    Ok(WkbResult { n, m, order: 0, epsilon: from_power(rhs, m), b1, b2 })
}

pub fn wkb2(n: usize, m: u32) -> Result<WkbResult> {
    let (b1, b2) = b_constants(m)?;
    let mf = m as f64;
    let nh = n as f64 + 0.5;
    let corr = b1 * b2 * (2.0 * mf - 1.0) * (mf - 1.0) / (6.0 * PI * PI * mf * mf);
    let rhs = PI * mf / (2.0 * b1) * (nh + (nh * nh + corr).sqrt());
    Ok(WkbResult { n, m, order: 2, epsilon: from_power(rhs, m), b1, b2 })
}

/// Large-m forms: (π²(n+1/2)²/4, π²/16·{n + 1/2 + [(n+1/2)² + 4m/(3π²)]^{1/2}}²).
///
/// The second keeps its m-dependence: the order-2 level has no finite limit.
pub fn wkb_limits(n: usize, m: f64) -> (f64, f64) {
    let nh = n as f64 + 0.5;
    let first = PI * PI * nh * nh / 4.0;
    let root = (nh * nh + 4.0 * m / (3.0 * PI * PI)).sqrt();
    let second = PI * PI / 16.0 * (nh + root).powi(2);
    (first, second)
}
