//! The equation obeyed by φ_n(ε) = f_n(ε)/T(ε) and residual checks.
//!
//! Eliminating ρ from the third-order density equation
//!
//! ρ''' − 4(v − ε_n)ρ' − 2v'ρ = 0
//!
//! gives the integrodifferential equation
//!
//! (ε − ε_n) φ(ε) = 2/(15π) ∫_ε^∞ Q(ε̃, ε) φ'''(ε̃) dε̃
//!
//! with Q(ε̃, ε) = ∫ (x^{2m} − ε)^{-1/2} ∂³_x (ε̃ − x^{2m})^{5/2} dx taken
//! between the two turning points. [`kernel_q`] evaluates Q through three
//! Gauss hypergeometric terms. Nothing here solves the equation: it is used
//! to verify distributions obtained from the Abel inversion.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{density_derivatives, DensityDerivatives, EigenSolution};
use crate::ensemble::{period, EnergyDistribution, EnergyGrid};
use crate::error::{Error, Result};
use crate::interp::{cubic_at, poly_fit_derivatives};
use crate::potential::Exponent;
use crate::quadrature::GaussLegendre;
use crate::special::{beta, gauss_2f1, laguerre, laguerre_coefficients};

/// Points per local fit of φ in ln ε.
const STENCIL: usize = 7;
const FIT_DEGREE: usize = 5;
/// Fits whose design matrix is worse conditioned than this are rejected.
const MAX_CONDITION: f64 = 1e8;
/// φ''' is dropped beyond the last point where it exceeds this fraction of its bulk maximum.
const TRUNCATION: f64 = 1e-12;
/// Probes are the grid points where |φ| exceeds this fraction of max |φ|.
const PROBE_SUPPORT: f64 = 1e-8;
/// Probes start at this multiple of ε_n. Below it the ε̃ integral is a
/// near-cancellation of terms growing like ε^{-1/2+1/m} and tests nothing.
const PROBE_FLOOR: f64 = 1e-8;
const MAX_PROBES: usize = 240;
/// Span in grid panels used to measure the decay of the integrand at the end
/// of the grid. Tail estimates above TAIL_LIMIT of the residual scale are errors.
const TAIL_PANELS: usize = 8;
const TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhiSource {
    /// Built from a sampled distribution; φ''' from local quintic fits.
    Sampled,
    /// Closed-form harmonic solution; all derivatives exact.
    Harmonic,
}

/// φ_n(ε) = f_n(ε)/T(ε) with its third ε-derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiFunction {
    pub n: usize,
    pub m: Exponent,
    pub eps_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub third_derivative: Vec<f64>,
    pub source: PhiSource,
    /// Small-ε exponent β with φ ~ ε^β, factored out before fitting.
    pub power: f64,
    /// Largest condition estimate among the local fits (1 for closed forms).
    pub condition: f64,
}

impl PhiFunction {
    /// φ''' at any ε inside the grid: exact for closed forms, otherwise a
    /// local cubic in ln ε through ε^{3−β} φ''', which is slowly varying even
    /// on coarse geometric steps.
    pub fn third_at(&self, eps: f64) -> f64 {
        self.third_interpolant().eval(self, eps)
    }

    fn third_interpolant(&self) -> ThirdInterpolant {
        let u: Vec<f64> = self.eps_grid.iter().map(|e| e.ln()).collect();
        let k = 3.0 - self.power;
        let scaled = self.third_derivative.iter().zip(&u).map(|(d, u)| d * (k * u).exp()).collect();
        ThirdInterpolant { u, scaled, k }
    }
}

struct ThirdInterpolant {
    u: Vec<f64>,
    scaled: Vec<f64>,
    k: f64,
}

impl ThirdInterpolant {
    fn eval(&self, phi: &PhiFunction, eps: f64) -> f64 {
        match phi.source {
            PhiSource::Harmonic => harmonic_derivatives(phi.n, eps)[3],
            PhiSource::Sampled => {
                let u = eps.ln();
                cubic_at(&self.u, &self.scaled, u) * (-self.k * u).exp()
            }
        }
    }
}

/// Exponent β of the small-ε power law φ ~ ε^β: −1/2 + 1/m for m >= 3.
/// For m = 1 φ is finite and for m = 2 logarithmic, both smooth in ln ε.
fn leading_power(m: u32) -> f64 {
    if m >= 3 {
        -0.5 + 1.0 / m as f64
    } else {
        0.0
    }
}

/// φ = f/T with φ''' from 7-point least-squares quintics in u = ln ε.
///
/// The fits act on g = φ e^{-βu}, which stays slowly varying where the grid
/// is coarse and geometric; φ_u, φ_uu, φ_uuu follow from g by the product
/// rule and φ_εεε = (φ_uuu − 3φ_uu + 2φ_u)/ε³.
pub fn phi_from_f(f: &EnergyDistribution) -> Result<PhiFunction> {
    let eps = &f.eps_grid;
    if eps.len() < STENCIL {
        return Err(Error::numeric(
            format!("{} grid points cannot support a {STENCIL}-point third derivative", eps.len()),
            f64::INFINITY,
        ));
    }
    let phi = eps.iter().zip(&f.f).map(|(&e, &v)| Ok(v / period(e, f.m)?)).collect::<Result<Vec<f64>>>()?;
    let u: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let beta = leading_power(f.m_value());
    let g: Vec<f64> = phi.iter().zip(&u).map(|(p, u)| p * (-beta * u).exp()).collect();
    let fits: Vec<(f64, f64)> = (0..eps.len())
        .into_par_iter()
        .map(|i| {
            let lo = i.saturating_sub(STENCIL / 2).min(eps.len() - STENCIL);
            let (d, cond) = poly_fit_derivatives(&u[lo..lo + STENCIL], &g[lo..lo + STENCIL], u[i], FIT_DEGREE);
            let p1 = d[1] + beta * d[0];
            let p2 = d[2] + 2.0 * beta * d[1] + beta * beta * d[0];
            let p3 = d[3] + 3.0 * beta * d[2] + 3.0 * beta * beta * d[1] + beta.powi(3) * d[0];
            let scale = (beta * u[i]).exp() / eps[i].powi(3);
            ((p3 - 3.0 * p2 + 2.0 * p1) * scale, cond)
        })
        .collect();
    let condition = fits.iter().fold(1.0f64, |a, p| a.max(p.1));
    if !(condition <= MAX_CONDITION) {
        return Err(Error::numeric("local fits for φ''' are ill conditioned", condition));
    }
    Ok(PhiFunction {
        n: f.n,
        m: f.m,
        eps_grid: eps.clone(),
        phi,
        third_derivative: fits.into_iter().map(|p| p.0).collect(),
        source: PhiSource::Sampled,
        power: beta,
        condition,
    })
}

/// Coefficients of P with φ_n = e^{-ε} P(ε) = (−1)^n e^{-ε} L_n(2ε)/π.
fn harmonic_poly(n: usize) -> Vec<f64> {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 } / std::f64::consts::PI;
    laguerre_coefficients(n, 2.0).into_iter().map(|c| sign * c).collect()
}

/// φ_n and its first three derivatives for m = 1.
fn harmonic_derivatives(n: usize, eps: f64) -> [f64; 4] {
    let mut p = harmonic_poly(n);
    let mut vals = [0.0; 4];
    // d/dε (e^{-ε}P) = e^{-ε}(P' − P)
    for v in vals.iter_mut() {
        *v = p.iter().rev().fold(0.0, |acc, &c| acc * eps + c) * (-eps).exp();
        let mut next = vec![0.0; p.len()];
        for (k, &c) in p.iter().enumerate() {
            next[k] -= c;
            if k > 0 {
                next[k - 1] += k as f64 * c;
            }
        }
        p = next;
    }
    vals
}

/// The harmonic solution φ_n = (−1)^n e^{-ε} L_n(2ε)/π, ε_n = 2n + 1.
pub fn harmonic_ode_solution(n: usize, grid: &EnergyGrid) -> PhiFunction {
    let pi = std::f64::consts::PI;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let phi = grid.points.iter().map(|&e| sign * (-e).exp() * laguerre(n, 2.0 * e) / pi).collect();
    let third_derivative = grid.points.iter().map(|&e| harmonic_derivatives(n, e)[3]).collect();
    PhiFunction {
        n,
        m: Exponent::Finite(1),
        eps_grid: grid.points.clone(),
        phi,
        third_derivative,
        source: PhiSource::Harmonic,
        power: 0.0,
        condition: 1.0,
    }
}

/// sup |εφ'' + φ' − (ε − ε_n)φ| over the grid, relative to max |(ε − ε_n)φ|.
/// Only closed-form m = 1 functions carry the derivatives this needs.
pub fn residual_harmonic_ode(phi: &PhiFunction) -> Result<f64> {
    if phi.source != PhiSource::Harmonic {
        return Err(Error::domain("the m = 1 differential form needs closed-form derivatives"));
    }
    let en = 2.0 * phi.n as f64 + 1.0;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for &e in &phi.eps_grid {
        let d = harmonic_derivatives(phi.n, e);
        worst = worst.max((e * d[2] + d[1] - (e - en) * d[0]).abs());
        scale = scale.max(((e - en) * d[0]).abs());
    }
    Ok(worst / scale)
}

/// Q(ε̃, ε) and its three hypergeometric terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub eps_tilde: f64,
    pub eps: f64,
    pub m: u32,
    pub value: f64,
    pub terms: [f64; 3],
}

/// c_k(m) for k = 1, 2, 3.
pub fn kernel_coefficients(m: u32) -> [f64; 3] {
    let m = m as f64;
    [-7.5 * m * m, 22.5 * m * (2.0 * m - 1.0), -5.0 * (2.0 * m - 1.0) * (m - 1.0)]
}

/// Q(ε̃, ε) = Σ_k c_k(m) I_k with
/// I_k = ε^{3−k−1/m} (ε̃−ε)^{k−1} B(k−½, ½) F(k−3+1/m, ½; k; −(ε̃−ε)/ε).
pub fn kernel_q(eps_tilde: f64, eps: f64, m: Exponent) -> Result<KernelEvaluation> {
    let mu = match m {
        Exponent::Finite(m) => m,
        Exponent::Infinite => {
            return Err(Error::domain("the kernel diverges in the box limit; use kernel_q_box_limit"))
        }
    };
    if !(eps > 0.0 && eps_tilde > eps) {
        return Err(Error::domain(format!("kernel needs 0 < ε < ε̃, got ε = {eps}, ε̃ = {eps_tilde}")));
    }
    let inv = 1.0 / mu as f64;
    let gap = eps_tilde - eps;
    let coef = kernel_coefficients(mu);
    let mut terms = [0.0; 3];
    for (i, t) in terms.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        if coef[i] == 0.0 {
            continue;
        }
        let hyp = gauss_2f1(k - 3.0 + inv, 0.5, k, -gap / eps)?;
        let pre = ((3.0 - k - inv) * eps.ln()).exp() * gap.powi(i as i32) * beta(k - 0.5, 0.5)?;
        *t = coef[i] * pre * hyp;
    }
    Ok(KernelEvaluation { eps_tilde, eps, m: mu, value: terms.iter().sum(), terms })
}

/// Q(ε, ε) = c₁ π ε^{2−1/m}: only the k = 1 term survives at ε̃ = ε.
fn kernel_on_diagonal(eps: f64, m: u32) -> f64 {
    kernel_coefficients(m)[0] * std::f64::consts::PI * ((2.0 - 1.0 / m as f64) * eps.ln()).exp()
}

/// Large-m form −(15πm²/16)(ε̃² − 18ε̃ε + 25ε²).
pub fn kernel_q_box_limit(eps_tilde: f64, eps: f64, m: u32) -> f64 {
    let m = m as f64;
    -15.0 * std::f64::consts::PI * m * m / 16.0 * (eps_tilde * eps_tilde - 18.0 * eps_tilde * eps + 25.0 * eps * eps)
}

/// Residual of the density equation over given samples.
///
/// Returns sup |ρ''' − 4(v−ε)ρ' − 2v'ρ| relative to max |ρ'''|. When ρ''' vanishes
/// everywhere the largest term magnitude is used instead, so inputs that
/// violate the equation still report an O(1) residual.
pub fn density_ode_residual(samples: &[(f64, DensityDerivatives)], epsilon: f64, m: Exponent) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("no density derivatives to check"));
    }
    let pot = |x: f64| -> (f64, f64) {
        match m {
            Exponent::Finite(m) => {
                let k = 2 * m as i32;
                (x.powi(k), k as f64 * x.powi(k - 1))
            }
            Exponent::Infinite => (0.0, 0.0),
        }
    };
    let (mut worst, mut d3max, mut termmax) = (0.0f64, 0.0f64, 0.0f64);
    for &(x, d) in samples {
        let (v, dv) = pot(x);
        let a = 4.0 * (v - epsilon) * d.d1;
        let b = 2.0 * dv * d.rho;
        worst = worst.max((d.d3 - a - b).abs());
        d3max = d3max.max(d.d3.abs());
        termmax = termmax.max(a.abs()).max(b.abs());
    }
    let scale = if d3max > 0.0 { d3max } else { termmax };
    if !(scale > 0.0) {
        return Err(Error::domain("density and its derivatives vanish on every sample"));
    }
    Ok(worst / scale)
}

/// Density-equation residual on the interior of the solution grid.
pub fn residual_density_ode(sol: &EigenSolution) -> Result<f64> {
    if sol.grid.len() < 3 {
        return Err(Error::domain("solution grid has no interior points"));
    }
    let interior = &sol.grid[1..sol.grid.len() - 1];
    let samples = interior.par_iter().map(|&x| Ok((x, density_derivatives(sol, x)?))).collect::<Result<Vec<_>>>()?;
    density_ode_residual(&samples, sol.epsilon, sol.m)
}

/// Outcome of [`residual_integro`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegroResidual {
    /// sup over probes of |LHS − RHS| / max |(ε − ε_n)φ|.
    pub residual: f64,
    /// Probe energy where the residual is attained.
    pub worst_eps: f64,
    /// Estimate of the dropped ∫ beyond the truncation point, same scaling.
    pub tail_bound: f64,
    /// max over probes of 2/(15π)∫|Q φ'''| dε̃, same scaling: how far the
    /// integral is from a pure cancellation.
    pub cancellation: f64,
    pub probes: usize,
}

/// Checks (ε − ε_n)φ(ε) = 2/(15π) ∫_ε^∞ Q(ε̃, ε) φ'''(ε̃) dε̃ on probe energies
/// in the support of φ, from 1e-8·ε_n up and away from the grid ends where
/// the φ''' fits are one-sided. The integral runs over the grid panels in
/// ln ε with an 8-point Gauss rule. Since Q grows like m² ε̃^{2−1/m}, it
/// stops where the weight ε̃^{3−1/m}|φ'''| (the integrand scale per unit
/// ln ε̃) has fallen below 1e-12 of its maximum over ε ≥ ε_n/10.
pub fn residual_integro(phi: &PhiFunction, epsilon_n: f64, m: Exponent) -> Result<IntegroResidual> {
    let mu = m.finite()?;
    if phi.m != m {
        return Err(Error::domain(format!("φ belongs to m = {}, not {m}", phi.m)));
    }
    let eps = &phi.eps_grid;
    let len = eps.len();
    if len < 2 {
        return Err(Error::domain("φ needs at least two grid points"));
    }
    let growth = 3.0 - 1.0 / mu as f64;
    let weight: Vec<f64> =
        phi.third_derivative.iter().zip(eps).map(|(d, e)| d.abs() * (growth * e.ln()).exp()).collect();
    let bulk = weight.iter().zip(eps).filter(|(_, &e)| e >= 0.1 * epsilon_n).fold(0.0f64, |a, (w, _)| a.max(*w));
    let end = weight.iter().rposition(|w| *w >= TRUNCATION * bulk).map_or(len - 1, |i| (i + 1).min(len - 1));

    let half = STENCIL / 2;
    let candidates: Vec<usize> = (half..end.min(len - half)).filter(|&i| eps[i] >= PROBE_FLOOR * epsilon_n).collect();
    let phi_max = candidates.iter().fold(0.0f64, |a, &i| a.max(phi.phi[i].abs()));
    let support: Vec<usize> = candidates.into_iter().filter(|&i| phi.phi[i].abs() > PROBE_SUPPORT * phi_max).collect();
    if support.is_empty() {
        return Err(Error::domain("φ has no support to probe"));
    }
    let stride = support.len().div_ceil(MAX_PROBES);
    let probes: Vec<usize> = support.iter().copied().step_by(stride).collect();

    let interp = phi.third_interpolant();
    let u = &interp.u;
    let rule = GaussLegendre::new(8);
    let norm = 2.0 / (15.0 * std::f64::consts::PI);
    let results = probes
        .par_iter()
        .map(|&i| -> Result<(f64, f64, f64, f64)> {
            let e = eps[i];
            let (mut integral, mut magnitude) = (0.0, 0.0);
            for j in i..end {
                let mut piece = 0.0;
                for (t, w) in rule.mapped(u[j], u[j + 1]) {
                    let et = t.exp();
                    let q = if et > e { kernel_q(et, e, m)?.value } else { kernel_on_diagonal(e, mu) };
                    let g = w * q * interp.eval(phi, et) * et;
                    piece += g;
                    magnitude += g.abs();
                }
                integral += piece;
            }
            // Beyond the grid the integrand is continued with the decay rate
            // it shows over the last TAIL_PANELS panels.
            let tail = if i + TAIL_PANELS <= end {
                let (w0, w1) = (weight[end - TAIL_PANELS], weight[end]);
                let rate = (w0 / w1).ln() / (u[end] - u[end - TAIL_PANELS]);
                let g1 = (kernel_q(eps[end], e, m)?.value * phi.third_derivative[end] * eps[end]).abs();
                if rate > 0.0 {
                    g1 / rate
                } else {
                    f64::INFINITY
                }
            } else {
                0.0
            };
            let lhs = (e - epsilon_n) * phi.phi[i];
            Ok(((lhs - norm * integral).abs(), norm * tail, lhs.abs(), norm * magnitude))
        })
        .collect::<Result<Vec<_>>>()?;

    let scale = results.iter().fold(0.0f64, |a, r| a.max(r.2));
    if !(scale > 0.0) {
        return Err(Error::domain("(ε − ε_n)φ vanishes on every probe"));
    }
    let (k, worst) =
        results.iter().enumerate().fold((0, 0.0f64), |(bk, bv), (k, r)| if r.0 > bv { (k, r.0) } else { (bk, bv) });
    let tail_bound = results.iter().fold(0.0f64, |a, r| a.max(r.1)) / scale;
    let cancellation = results.iter().fold(0.0f64, |a, r| a.max(r.3)) / scale;
    if tail_bound > TAIL_LIMIT {
        return Err(Error::numeric("the ε̃ integral is not converged at the end of the grid", tail_bound));
    }
    Ok(IntegroResidual {
        residual: worst / scale,
        worst_eps: eps[probes[k]],
        tail_bound,
        cancellation,
        probes: probes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::analytic_harmonic;
    use crate::ensemble::GridConfig;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_kernel_is_affine() {
        let q = kernel_q(3.0, 1.0, Exponent::Finite(1)).unwrap();
        assert_relative_eq!(q.value, 7.5 * PI, max_relative = 1e-13);
        assert_eq!(q.terms[2], 0.0);
        assert_relative_eq!(q.terms.iter().sum::<f64>(), q.value, max_relative = 1e-15);
        let z = kernel_q(2.0, 1.0, Exponent::Finite(1)).unwrap();
        assert!(z.value.abs() < 1e-12);
    }

    #[test]
    fn kernel_domain() {
        assert!(kernel_q(1.0, 1.0, Exponent::Finite(2)).is_err());
        assert!(kernel_q(1.0, 0.0, Exponent::Finite(2)).is_err());
        assert!(kernel_q(2.0, 1.0, Exponent::Infinite).is_err());
    }

    #[test]
    fn diagonal_limit_is_continuous() {
        for m in [1, 2, 5] {
            let e = 0.7;
            let near = kernel_q(e * (1.0 + 1e-10), e, Exponent::Finite(m)).unwrap().value;
            assert_relative_eq!(near, kernel_on_diagonal(e, m), max_relative = 1e-8);
        }
    }

    #[test]
    fn box_limit_roots_and_growth() {
        let r = 9.0 + 2.0 * 14f64.sqrt();
        assert!(kernel_q_box_limit(r, 1.0, 50).abs() < 1e-9 * kernel_q_box_limit(2.0, 1.0, 50).abs());
        assert_relative_eq!(
            kernel_q_box_limit(2.0, 0.5, 40) / kernel_q_box_limit(2.0, 0.5, 20),
            4.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn harmonic_polynomial_derivatives() {
        // φ₁ = −e^{-ε}(1 − 2ε)/π
        let d = harmonic_derivatives(1, 0.4);
        let e = (-0.4f64).exp() / PI;
        assert_relative_eq!(d[0], -e * 0.2, max_relative = 1e-14);
        assert_relative_eq!(d[1], -e * (-2.0 - 0.2), max_relative = 1e-14);
        assert_relative_eq!(d[3], -e * (-6.0 - 0.2), max_relative = 1e-14);
    }

    #[test]
    fn harmonic_boundary_values() {
        let grid = EnergyGrid::from_points((0..10).map(|i| 0.5 * i as f64 + 1e-300).collect()).unwrap();
        let p0 = harmonic_ode_solution(0, &grid);
        let p1 = harmonic_ode_solution(1, &grid);
        assert_relative_eq!(p0.phi[0], 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(p1.phi[0], -1.0 / PI, max_relative = 1e-14);
        assert!(p1.phi[1].abs() < 1e-16);
        for n in 0..4 {
            let r = residual_harmonic_ode(&harmonic_ode_solution(n, &grid)).unwrap();
            assert!(r < 1e-12, "n = {n}: {r}");
        }
    }

    #[test]
    fn density_residual_flags_constant_density() {
        let flat: Vec<(f64, DensityDerivatives)> =
            (1..20).map(|i| (0.1 * i as f64, DensityDerivatives { rho: 1.0, d1: 0.0, d2: 0.0, d3: 0.0 })).collect();
        let r = density_ode_residual(&flat, 1.0, Exponent::Finite(2)).unwrap();
        assert!(r >= 0.5, "{r}");
        assert!(density_ode_residual(&[], 1.0, Exponent::Finite(2)).is_err());
    }

    #[test]
    fn analytic_harmonic_density_residual() {
        let r = residual_density_ode(&analytic_harmonic(0)).unwrap();
        assert!(r < 1e-10, "{r}");
        let wrong = residual_density_ode(&analytic_harmonic(0).with_epsilon(1.1)).unwrap();
        assert!(wrong > 1e-3, "{wrong}");
    }

    #[test]
    fn harmonic_integro_residual() {
        let sol = analytic_harmonic(2);
        let grid = EnergyGrid::for_state(&sol, &GridConfig::default()).unwrap();
        let phi = harmonic_ode_solution(2, &grid);
        let r = residual_integro(&phi, 5.0, Exponent::Finite(1)).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        assert!(residual_integro(&phi, 5.0, Exponent::Finite(2)).is_err());
    }
}
