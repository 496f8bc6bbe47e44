use crate::error::{Error, Result};

/// Physicists' Hermite polynomial H_n(x), by the three-term recurrence
/// H_{k+1} = 2x H_k - 2k H_{k-1}.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if cur.is_finite() {
        Ok(cur)
    } else {
        Err(Error::Range(format!("H_{n}({x}) overflows")))
    }
}

/// Laguerre polynomial L_n(x), by (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Power-series coefficients of L_n(scale·x), lowest order first.
pub(crate) fn laguerre_coefficients(n: usize, scale: f64) -> Vec<f64> {
    // L_n(y) = Σ_k (-1)^k C(n,k) y^k / k!
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut binom = 1.0;
    let mut fact = 1.0;
    let mut pow = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
            fact *= k as f64;
            pow *= scale;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(sign * binom * pow / fact);
    }
    coeffs
}
