//! The auxiliary series S_mp = Σ_k (2k-1)!! / [(2k)!! ((2k+1)m - 2p)].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::special::gamma::ln_gamma;
use crate::special::MAX_SERIES_TERMS;

/// A summed series with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    /// Estimated error of `value` (explicit terms plus tail estimate).
    pub tail_bound: f64,
}

const TAIL_TOLERANCE: f64 = 1e-12;

/// Largest p for which the p-th singular term survives: the exponent
/// -1/2 + p/m of the small-energy expansion must stay negative.
pub fn p_max(m: u32) -> u32 {
    if m.is_multiple_of(2) {
        (m / 2).saturating_sub(1)
    } else {
        (m - 1) / 2
    }
}

/// (2k-1)!!/(2k)!! = Γ(k+1/2)/(√π Γ(k+1)), continued to real k.
///
/// For large k the difference of log-gammas loses all precision, so the
/// asymptotic expansion of the ratio is used instead.
fn central_ratio(k: f64) -> f64 {
    const C: [f64; 7] =
        [1.0, -1.0 / 8.0, 1.0 / 128.0, 5.0 / 1024.0, -21.0 / 32768.0, -399.0 / 262144.0, 869.0 / 4194304.0];
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    if k >= 50.0 {
        let x = 1.0 / k;
        let poly = C.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        return poly * inv_sqrt_pi / k.sqrt();
    }
    (ln_gamma(k + 0.5).unwrap() - ln_gamma(k + 1.0).unwrap()).exp() * inv_sqrt_pi
}

/// Evaluate S_mp by explicit summation of the leading terms and an
/// Euler–Maclaurin estimate of the remainder. The terms decay only like
/// k^{-3/2}, so plain truncation would need ~10^24 terms for 1e-12.
pub fn s_series(m: u32, p: u32) -> Result<SeriesResult> {
    if m == 0 || p == 0 {
        return Err(Error::domain(format!("S_mp needs m, p >= 1 (got m={m}, p={p})")));
    }
    if p > p_max(m) {
        return Err(Error::domain(format!("p = {p} exceeds p_max({m}) = {}", p_max(m))));
    }
    let mf = m as f64;
    let pf = p as f64;
    if mf - 2.0 * pf <= 0.0 {
        return Err(Error::domain(format!("vanishing or negative denominator for m={m}, p={p}")));
    }
    let term = |k: f64| central_ratio(k) / ((2.0 * k + 1.0) * mf - 2.0 * pf);

    let rule = GaussLegendre::new(30);
    let rule_check = GaussLegendre::new(60);
    let mut cutoff = 64usize;
    let mut partial = 0.0;
    let mut ratio = 1.0;
    let mut summed = 0usize;
    loop {
        // Extend the explicit partial sum up to `cutoff` terms.
        while summed < cutoff {
            let k = summed as f64;
            partial += ratio / ((2.0 * k + 1.0) * mf - 2.0 * pf);
            ratio *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
            summed += 1;
        }
        // Σ_{k>=K} t(k) ≈ ∫_K^∞ t + t(K)/2 - t'(K)/12 + t'''(K)/720
        let kk = cutoff as f64;
        // k = K/u², dk = 2K/u³ du, u in (0, 1]
        let integrand = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            term(kk / (u * u)) * 2.0 * kk / (u * u * u)
        };
        let integral = rule.integrate(0.0, 1.0, integrand);
        let integral_check = rule_check.integrate(0.0, 1.0, integrand);
        let t0 = term(kk);
        let d1 = (8.0 * (term(kk + 1.0) - term(kk - 1.0)) - (term(kk + 2.0) - term(kk - 2.0))) / 12.0;
        let d3 = (term(kk + 2.0) - 2.0 * term(kk + 1.0) + 2.0 * term(kk - 1.0) - term(kk - 2.0)) / 2.0;
        let tail = integral + t0 / 2.0 - d1 / 12.0 + d3 / 720.0;
        // Next Euler–Maclaurin term scales like t^(5)/30240 ~ d3 · (35/4)/K² / 30240.
        let bound = (integral - integral_check).abs() + (d3 * 10.0 / (kk * kk * 30240.0)).abs() + 1e-16 * tail.abs();
        if bound < TAIL_TOLERANCE {
            return Ok(SeriesResult { value: partial + tail, terms_used: summed, tail_bound: bound });
        }
        if cutoff >= MAX_SERIES_TERMS {
            return Err(Error::numeric(
                format!("S_{{{m},{p}}} tail not below {TAIL_TOLERANCE:e} after {cutoff} terms"),
                bound,
            ));
        }
        cutoff = (cutoff * 2).min(MAX_SERIES_TERMS);
    }
}
