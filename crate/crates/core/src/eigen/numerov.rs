//! Independent eigenvalue check: Numerov shooting from the origin with
//! parity boundary conditions and bisection on the node count.

use crate::error::{Error, Result};

/// Step of the shooting integration.
pub const NUMEROV_STEP: f64 = 1e-4;

/// Counts sign changes of ψ on (0, x_end] for trial energy `eps`.
/// Integration stops early once the solution is clearly diverging in the
/// classically forbidden region, where no further node can appear.
fn count_nodes(m: u32, eps: f64, odd: bool, h: f64) -> usize {
    let two_m = 2 * m as i32;
    let x_tp = eps.powf(1.0 / (2.0 * m as f64));
    let x_end = x_tp + 10.0 * eps.powf(-((m as f64) - 1.0) / (2.0 * m as f64));
    let steps = (x_end / h).ceil() as usize;
    let k = |x: f64| x.powi(two_m) - eps;
    let h2 = h * h / 12.0;

    // Summed form of Numerov: w = (1 - h²k/12)ψ with the increments
    // d = w_{i+1} - w_i accumulated directly, which keeps round-off from
    // growing like 1/h² in the three-term recursion.
    let (psi0, psi1) = if odd {
        // ψ(h) = h + k(0)h³/6 + (k(0)² + 3k''(0))h⁵/120 for an odd state
        let k0 = k(0.0);
        let k2 = if m == 1 { 2.0 } else { 0.0 };
        (0.0, h * (1.0 + k0 * h * h / 6.0 + (k0 * k0 + 3.0 * k2) * h.powi(4) / 120.0))
    } else {
        let k0 = k(0.0);
        let k1 = k(h);
        (1.0, (1.0 + 5.0 * h2 * k0) / (1.0 - h2 * k1))
    };
    let mut k_cur = k(h);
    let mut w = (1.0 - h2 * k_cur) * psi1;
    let mut d = w - (1.0 - h2 * k(0.0)) * psi0;
    let mut cur = psi1;
    let mut nodes = 0usize;
    if psi0 * psi1 < 0.0 {
        nodes += 1;
    }
    for i in 1..steps {
        d += h * h * k_cur * cur;
        w += d;
        let x = (i + 1) as f64 * h;
        k_cur = k(x);
        let next = w / (1.0 - h2 * k_cur);
        if next == 0.0 || next.signum() != cur.signum() && cur != 0.0 {
            nodes += 1;
        }
        cur = next;
        // Past the turning point with |ψ| growing away from zero: settled.
        if x > x_tp && k_cur > 0.0 && cur.abs() > 1e30 {
            break;
        }
        if !cur.is_finite() {
            break;
        }
    }
    nodes
}

/// Eigenvalue ε_n of ψ'' + (ε - x^{2m})ψ = 0 by Numerov shooting.
pub fn oracle_solve(m: u32, n: usize) -> Result<f64> {
    oracle_solve_with_step(m, n, NUMEROV_STEP)
}

pub fn oracle_solve_with_step(m: u32, n: usize, h: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("exponent m must be >= 1"));
    }
    let odd = n % 2 == 1;
    // The k-th state of a parity block has k nodes on x > 0.
    let k = n / 2;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while count_nodes(m, hi, odd, h) <= k {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::numeric(format!("no bracket found for n = {n}, m = {m}"), hi));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_nodes(m, mid, odd, h) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
