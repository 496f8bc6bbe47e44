use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Exponent;
use crate::special::{beta, ln_gamma, p_max, s_series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AsymptoticCase {
    /// m = 1: f_n(0) = (-1)^n.
    FiniteValue,
    /// m = 2: ε^{-1/4} log ε^{-1/4}.
    Logarithmic,
    /// m > 2: ε^{-1+3/(2m)} and higher powers.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AsymptoticOrder {
    /// Only the p = 1 term.
    Leading,
    /// All terms p <= p_max; the higher coefficients need ε_n.
    Full { epsilon_n: f64 },
}

/// Small-ε form of f_n. `coefficient` and `exponent` describe the leading
/// term; `terms` lists every (coefficient, exponent) pair that is summed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticForm {
    pub n: usize,
    pub m: u32,
    pub case: AsymptoticCase,
    pub coefficient: f64,
    pub exponent: f64,
    pub terms: Vec<(f64, f64)>,
}

impl AsymptoticForm {
    pub fn value(&self, epsilon: f64) -> f64 {
        match self.case {
            AsymptoticCase::FiniteValue => self.coefficient,
            AsymptoticCase::Logarithmic => self.coefficient * (-0.25 * epsilon.ln()) * epsilon.powf(self.exponent),
            AsymptoticCase::Power => self.terms.iter().map(|(c, a)| c * epsilon.powf(*a)).sum(),
        }
    }
}

fn parity_sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// c_np = (-4ε_n)^{p-1} c_n1/(2p-1)!, the Taylor coefficients of dρ/dx
/// at the origin. Valid for 1 <= p <= m, where ψ'' = -ε_n ψ still holds to
/// the required order.
pub fn c_np(c_n1: f64, epsilon_n: f64, p: u32, m: u32) -> Result<f64> {
    if p == 0 || p > m {
        return Err(Error::domain(format!("c_np is defined for 1 <= p <= m (p={p}, m={m})")));
    }
    let k = (p - 1) as i32;
    Ok((-4.0 * epsilon_n).powi(k) * c_n1 / ln_gamma(2.0 * p as f64)?.exp())
}

/// The p-th power term -(1/(mπ))B(1/(2m),1/2) c_np S_mp ε^{-1+(2p+1)/(2m)}
/// for m > 2. `c_n1` is signed, i.e. ρ''(0).
pub fn asymptotic_term(epsilon: f64, m: u32, c_n1: f64, epsilon_n: f64, p: u32) -> Result<f64> {
    let (c, a) = power_term(m, c_n1, epsilon_n, p)?;
    Ok(c * epsilon.powf(a))
}

fn power_term(m: u32, c_n1: f64, epsilon_n: f64, p: u32) -> Result<(f64, f64)> {
    if m <= 2 {
        return Err(Error::domain("power-law terms exist only for m > 2"));
    }
    if p > p_max(m) {
        return Err(Error::domain(format!("p = {p} exceeds p_max({m}) = {}", p_max(m))));
    }
    let mf = m as f64;
    let b = beta(0.5 / mf, 0.5)?;
    let s = s_series(m, p)?.value;
    let c = -b * c_np(c_n1, epsilon_n, p, m)? * s / (mf * std::f64::consts::PI);
    Ok((c, -1.0 + (2.0 * p as f64 + 1.0) / (2.0 * mf)))
}

/// Small-ε behaviour of f_n and its value at `epsilon`.
///
/// Only |c_n1| enters: the sign of ρ''(0) is (-1)^{n+1} for every state.
pub fn asymptotic_f(
    epsilon: f64,
    n: usize,
    m: Exponent,
    c_n1: f64,
    order: AsymptoticOrder,
) -> Result<(AsymptoticForm, f64)> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("asymptotic form needs ε > 0, got {epsilon}")));
    }
    let m = match m {
        Exponent::Finite(m) => m,
        Exponent::Infinite => return Err(Error::Integrability { exponent: -1.0 }),
    };
    let sign = parity_sign(n);
    let mf = m as f64;
    let form = match m {
        1 => AsymptoticForm {
            n,
            m,
            case: AsymptoticCase::FiniteValue,
            coefficient: sign,
            exponent: 0.0,
            terms: vec![(sign, 0.0)],
        },
        2 => {
            let coefficient = sign * c_n1.abs() * beta(0.25, 0.5)? / (2.0 * std::f64::consts::PI);
            AsymptoticForm {
                n,
                m,
                case: AsymptoticCase::Logarithmic,
                coefficient,
                exponent: -0.25,
                terms: vec![(coefficient, -0.25)],
            }
        }
        _ => {
            let signed = -sign * c_n1.abs();
            let terms = match order {
                AsymptoticOrder::Leading => vec![power_term(m, signed, 0.0, 1)?],
                AsymptoticOrder::Full { epsilon_n } => {
                    (1..=p_max(m)).map(|p| power_term(m, signed, epsilon_n, p)).collect::<Result<Vec<_>>>()?
                }
            };
            AsymptoticForm {
                n,
                m,
                case: AsymptoticCase::Power,
                coefficient: terms[0].0,
                exponent: -1.0 + 1.5 / mf,
                terms,
            }
        }
    };
    let value = form.value(epsilon);
    Ok((form, value))
}

/// Limiting node positions ε_k^{1/(2m)} = k/(n+1), k = 1..n, for m → ∞.
pub fn limit_nodes(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}
