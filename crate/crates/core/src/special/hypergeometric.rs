//! Gauss hypergeometric function on the non-positive real axis.
//!
//! Every evaluation is mapped to a power series in a variable of modulus at
//! most one half: the Pfaff transformation sends z <= 0 to w = z/(z-1) in
//! [0, 1), and when w > 1/2 the connection formulas around w = 1 (including
//! the logarithmic cases where the exponent difference is an integer) take
//! over with 1 - w = 1/(1 - z).

use crate::error::{Error, Result};
use crate::special::gamma::{digamma, gamma, rgamma};
use crate::special::MAX_SERIES_TERMS;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Plain Gauss series Σ (a)_k (b)_k / ((c)_k k!) y^k for |y| <= 1/2
/// or terminating parameters.
fn series(a: f64, b: f64, c: f64, y: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * y;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if k > 2 && term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::numeric(format!("2F1 series ({a}, {b}; {c}; {y}) did not converge"), term.abs()))
}

/// F(a, b; c; z) for z <= 0.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!("2F1 undefined for c = {c} (non-positive integer)")));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("2F1 implemented for z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    // Terminating cases: summed directly, all terms share a sign pattern
    // that keeps the sum well conditioned on z < 0.
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return terminating(a, b, c, z);
    }
    let w = z / (z - 1.0);
    let one_minus_z = 1.0 - z;
    // Pfaff: F(a,b;c;z) = (1-z)^{-b} F(c-a, b; c; w)
    let prefactor = one_minus_z.powf(-b);
    let big_a = c - a;
    let big_b = b;
    if is_nonpositive_integer(big_a) || w <= 0.5 {
        return Ok(prefactor * series(big_a, big_b, c, w)?);
    }
    let y = 1.0 / one_minus_z; // = 1 - w
    Ok(prefactor * near_one(big_a, big_b, c, y)?)
}

fn terminating(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let n = if is_nonpositive_integer(a) { -a } else { -b } as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(Error::Range(format!("2F1 polynomial overflows at z = {z}")))
    }
}

/// F(A, B; C; 1 - y) for 0 < y < 1/2 via the connection formulas around 1.
fn near_one(a: f64, b: f64, c: f64, y: f64) -> Result<f64> {
    let delta = c - a - b;
    let ell = delta.round();
    if (delta - ell).abs() > 1e-9 {
        // Non-degenerate connection formula.
        let g1 = gamma(c)? * gamma(delta)? * rgamma(c - a) * rgamma(c - b);
        let t1 = if g1 == 0.0 { 0.0 } else { g1 * series(a, b, 1.0 - delta, y)? };
        let g2 = gamma(c)? * gamma(-delta)? * rgamma(a) * rgamma(b);
        let t2 = if g2 == 0.0 { 0.0 } else { g2 * y.powf(delta) * series(c - a, c - b, 1.0 + delta, y)? };
        return Ok(t1 + t2);
    }
    let ell = ell as i64;
    if ell < 0 {
        // Euler: F(A,B;C;w) = (1-w)^{C-A-B} F(C-A, C-B; C; w)
        let aa = c - a;
        let bb = c - b;
        if is_nonpositive_integer(aa) || is_nonpositive_integer(bb) {
            return Ok(y.powf(delta) * series(aa, bb, c, 1.0 - y)?);
        }
        return Ok(y.powf(delta) * log_case(aa, bb, (-ell) as usize, y)?);
    }
    log_case(a, b, ell as usize, y)
}

/// F(A, B; A+B+ℓ; 1-y) for integer ℓ >= 0, A and B not non-positive integers.
fn log_case(a: f64, b: f64, ell: usize, y: f64) -> Result<f64> {
    let lf = ell as f64;
    let c = a + b + lf;
    let ln_y = y.ln();
    let mut finite_part = 0.0;
    if ell > 0 {
        let pref = gamma(lf)? * gamma(c)? * rgamma(a + lf) * rgamma(b + lf);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..ell - 1 {
            let nf = n as f64;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - lf + nf)) * y;
            sum += term;
        }
        finite_part = pref * sum;
    }

    let pref = gamma(c)? * rgamma(a) * rgamma(b);
    let sign = if ell.is_multiple_of(2) { 1.0 } else { -1.0 };
    // (w - 1)^ℓ = (-y)^ℓ
    let outer = sign * y.powi(ell as i32) * pref;

    // Running coefficient (A+ℓ)_n (B+ℓ)_n / (n! (n+ℓ)!) y^n
    let mut coeff = 1.0 / (1..=ell).fold(1.0, |acc, j| acc * j as f64);
    let mut sum = 0.0;
    let mut psi_n1 = digamma(1.0)?;
    let mut psi_nl1 = digamma(lf + 1.0)?;
    let mut psi_a = digamma(a + lf)?;
    let mut psi_b = digamma(b + lf)?;
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        let bracket = ln_y - psi_n1 - psi_nl1 + psi_a + psi_b;
        let contribution = coeff * bracket;
        sum += contribution;
        if n > 2 && contribution.abs() <= 1e-17 * sum.abs() {
            let value = finite_part - outer * sum;
            return Ok(value);
        }
        coeff *= (a + lf + nf) * (b + lf + nf) / ((nf + 1.0) * (nf + lf + 1.0)) * y;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_nl1 += 1.0 / (nf + lf + 1.0);
        psi_a += 1.0 / (a + lf + nf);
        psi_b += 1.0 / (b + lf + nf);
    }
    Err(Error::numeric("logarithmic 2F1 series did not converge", coeff.abs()))
}
