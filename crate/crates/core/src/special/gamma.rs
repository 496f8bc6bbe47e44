//! Gamma, beta, digamma and double factorials.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x >= 0.5 (Lanczos, g = 7).
fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Natural logarithm of Γ(x) for positive `x`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    // Exact at the points where ln Γ vanishes.
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx), with sin(πx) > 0 on (0, 0.5).
        (PI / (PI * x).sin()).ln() - ln_gamma_lanczos(1.0 - x)
    } else {
        ln_gamma_lanczos(x)
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Γ(x) for real `x`; poles at the non-positive integers are domain errors.
pub fn gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    let value = if x > 0.0 {
        if x == x.round() && x <= 171.0 {
            (1..x as u64).fold(1.0, |acc, k| acc * k as f64)
        } else {
            ln_gamma_pos(x).exp()
        }
    } else {
        let s = (PI * x).sin();
        PI / (s * ln_gamma_pos(1.0 - x).exp())
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Range(format!("gamma({x}) overflows")))
    }
}

/// 1/Γ(x), which is entire: zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else if x > 0.0 {
        (-ln_gamma_pos(x)).exp()
    } else {
        (PI * x).sin() * ln_gamma_pos(1.0 - x).exp() / PI
    }
}

/// Beta function B(p, q) = Γ(p)Γ(q)/Γ(p+q).
pub fn beta(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::domain(format!("beta requires positive arguments, got ({p}, {q})")));
    }
    Ok((ln_gamma_pos(p) + ln_gamma_pos(q) - ln_gamma_pos(p + q)).exp())
}

/// Digamma ψ(x) = d ln Γ / dx. Poles at the non-positive integers are domain errors.
pub fn digamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::domain(format!("digamma has a pole at {x}")));
    }
    if x < 0.5 {
        // ψ(1-x) - ψ(x) = π cot(πx)
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    // Bernoulli terms B_2k / (2k y^2k)
    let tail =
        inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(acc + y.ln() - 0.5 / y - tail)
}

/// ln(k!!) for k >= -1.
pub fn ln_double_factorial(k: i64) -> Result<f64> {
    if k < -1 {
        return Err(Error::domain(format!("double factorial needs k >= -1, got {k}")));
    }
    if k <= 0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    if k % 2 == 0 {
        // (2j)!! = 2^j j!
        let j = kf / 2.0;
        Ok(j * 2f64.ln() + ln_gamma_pos(j + 1.0))
    } else {
        // (2j-1)!! = 2^j Γ(j + 1/2) / √π
        let j = (kf + 1.0) / 2.0;
        Ok(j * 2f64.ln() + ln_gamma_pos(j + 0.5) - 0.5 * PI.ln())
    }
}

/// k!! with the convention (-1)!! = 0!! = 1.
pub fn double_factorial(k: i64) -> Result<f64> {
    if k < -1 {
        return Err(Error::domain(format!("double factorial needs k >= -1, got {k}")));
    }
    if k <= 0 {
        return Ok(1.0);
    }
    if k <= 60 {
        let mut acc = 1.0;
        let mut j = k;
        while j > 1 {
            acc *= j as f64;
            j -= 2;
        }
        return Ok(acc);
    }
    let v = ln_double_factorial(k)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{k}!! overflows f64")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_relative_eq!(ln_gamma(0.5).unwrap(), 0.5 * PI.ln(), max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(6.0).unwrap(), 120f64.ln(), max_relative = 1e-13);
        // Γ(n + 1/2) = (2n-1)!! √π / 2^n
        for n in 1..20 {
            let exact = ln_double_factorial(2 * n - 1).unwrap() + 0.5 * PI.ln() - n as f64 * 2f64.ln();
            assert_relative_eq!(ln_gamma(n as f64 + 0.5).unwrap(), exact, max_relative = 1e-13);
        }
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-2.5).is_err());
    }

    #[test]
    fn gamma_reflection_and_poles() {
        assert_relative_eq!(gamma(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(-1.5).unwrap(), 4.0 * PI.sqrt() / 3.0, max_relative = 1e-13);
        assert!(gamma(-3.0).is_err());
        assert_eq!(rgamma(-3.0), 0.0);
        assert_relative_eq!(rgamma(-0.5) * gamma(-0.5).unwrap(), 1.0, max_relative = 1e-13);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta(0.5, 0.5).unwrap(), PI, max_relative = 1e-12);
        assert_relative_eq!(beta(0.5, 1.5).unwrap(), PI / 2.0, max_relative = 1e-12);
        assert!(beta(0.0, 1.0).is_err());
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert_relative_eq!(digamma(1.0).unwrap(), -euler, max_relative = 1e-13);
        assert_relative_eq!(digamma(0.5).unwrap(), -euler - 2.0 * 2f64.ln(), max_relative = 1e-13);
        // ψ(x+1) = ψ(x) + 1/x, including negative non-integers.
        for &x in &[-2.7, -0.3, 0.1, 3.3, 17.0] {
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-13);
        }
        assert!(digamma(-2.0).is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), 1.0);
        assert_eq!(double_factorial(0).unwrap(), 1.0);
        assert_eq!(double_factorial(5).unwrap(), 15.0);
        assert_eq!(double_factorial(6).unwrap(), 48.0);
        assert!(double_factorial(-2).is_err());
        assert_relative_eq!(
            ln_double_factorial(101).unwrap(),
            (1..=101).step_by(2).map(|j| (j as f64).ln()).sum::<f64>(),
            max_relative = 1e-13
        );
        assert!(matches!(double_factorial(400), Err(Error::Range(_))));
    }
}
