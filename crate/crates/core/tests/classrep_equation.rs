use std::f64::consts::PI;

use classrep::classrep::{
    harmonic_ode_solution, kernel_coefficients, kernel_q, kernel_q_box_limit, phi_from_f, residual_density_ode,
    residual_harmonic_ode, residual_integro, PhiFunction,
};
use classrep::eigen::{analytic_harmonic, solve, SolverConfig};
use classrep::ensemble::{inverse_abel, period, EnergyDistribution, EnergyGrid, GridConfig};
use classrep::quadrature::{integrate_adaptive, AdaptiveConfig};
use classrep::{Exponent, Potential};

/// Q(ε̃, ε) by quadrature of its defining integral
/// ∫_{x0}^{x1} (x^{2m} − ε)^{-1/2} ∂³_x (ε̃ − x^{2m})^{5/2} dx.
/// The map x = x0 + L(1 − cos θ)/2 cancels both endpoint singularities, and
/// both radicands are formed from the distance to their own endpoint.
fn kernel_by_quadrature(eps_tilde: f64, eps: f64, m: u32) -> f64 {
    let mf = m as f64;
    let (x0, x1) = (eps.powf(0.5 / mf), eps_tilde.powf(0.5 / mf));
    let len = x1 - x0;
    let g = |th: f64| {
        let d0 = len * (0.5 * th).sin().powi(2);
        let d1 = len * (0.5 * th).cos().powi(2);
        let x = if d0 < d1 { x0 + d0 } else { x1 - d1 };
        let below = eps * (2.0 * mf * (d0 / x0).ln_1p()).exp_m1();
        let w = -eps_tilde * (2.0 * mf * (-d1 / x1).ln_1p()).exp_m1();
        let w1 = -2.0 * mf * x.powf(2.0 * mf - 1.0);
        let w2 = -2.0 * mf * (2.0 * mf - 1.0) * x.powf(2.0 * mf - 2.0);
        let w3 = -2.0 * mf * (2.0 * mf - 1.0) * (2.0 * mf - 2.0) * x.powf(2.0 * mf - 3.0);
        let third = 1.875 * w1.powi(3) / w.sqrt() + 11.25 * w.sqrt() * w1 * w2 + 2.5 * w.powf(1.5) * w3;
        third / below.sqrt() * 0.5 * len * th.sin()
    };
    let cfg = AdaptiveConfig { rel_tol: 1e-12, abs_tol: 0.0, max_panels: 20_000 };
    integrate_adaptive(g, &[0.0, 0.5 * PI, PI], cfg).unwrap().value
}

#[test]
fn closed_form_matches_the_defining_integral() {
    let eps: Vec<f64> = (0..10).map(|i| 0.05 * 1.7f64.powi(i)).collect();
    let gaps: Vec<f64> = (0..10).map(|j| 0.02 * 2.0f64.powi(j)).collect();
    let mut worst = 0.0f64;
    for m in [1, 2, 3, 10, 60] {
        for &e in &eps {
            for &gap in &gaps {
                let et = e * (1.0 + gap);
                let q = kernel_q(et, e, Exponent::Finite(m)).unwrap().value;
                let oracle = kernel_by_quadrature(et, e, m);
                // m = 1 has a zero at ε̃ = 2ε; measure against the term scale there.
                let scale = if m == 1 { 7.5 * PI * (et + 2.0 * e) } else { q.abs() };
                let rel = (q - oracle).abs() / scale;
                worst = worst.max(rel);
                assert!(rel <= 1e-8, "m = {m}, ε̃ = {et}, ε = {e}: {q} vs {oracle}");
            }
        }
    }
    eprintln!("largest relative kernel deviation {worst:e}");
}

#[test]
fn harmonic_kernel_is_affine() {
    assert_eq!(kernel_coefficients(1)[2], 0.0);
    for i in 0..20 {
        let e = 0.1 + 0.37 * i as f64;
        let et = e + 0.05 + 0.61 * ((7 * i) % 20) as f64;
        let q = kernel_q(et, e, Exponent::Finite(1)).unwrap();
        let exact = 7.5 * PI * (et - 2.0 * e);
        assert!((q.value - exact).abs() <= 1e-12 * exact.abs().max(1.0), "ε̃ = {et}, ε = {e}");
        assert_eq!(q.terms[2], 0.0);
    }
}

#[test]
fn kernel_coefficients_closed_form() {
    for m in 1..30u32 {
        let mf = m as f64;
        let c = kernel_coefficients(m);
        assert_eq!(c[0], -7.5 * mf * mf);
        assert_eq!(c[1], 22.5 * mf * (2.0 * mf - 1.0));
        assert_eq!(c[2], -5.0 * (2.0 * mf - 1.0) * (mf - 1.0));
    }
}

#[test]
fn box_limit_ratio() {
    let r = kernel_q(2.0, 0.5, Exponent::Finite(200)).unwrap().value / kernel_q_box_limit(2.0, 0.5, 200);
    assert!((r - 1.0).abs() < 0.02, "{r}");
    let far = kernel_q(2.0, 0.5, Exponent::Finite(2000)).unwrap().value / kernel_q_box_limit(2.0, 0.5, 2000);
    assert!((far - 1.0).abs() < (r - 1.0).abs());
}

#[test]
fn harmonic_density_equation() {
    for n in 0..=6 {
        let r = residual_density_ode(&analytic_harmonic(n)).unwrap();
        assert!(r < 1e-10, "n = {n}: {r:e}");
    }
}

#[test]
fn numerical_density_equation() {
    for m in [2, 5, 100] {
        let states = solve(&Potential::power(m), 4, &SolverConfig::default()).unwrap();
        for st in states.iter().step_by(2) {
            let r = residual_density_ode(st).unwrap();
            assert!(r < 1e-6, "m = {m}, n = {}: {r:e}", st.n);
        }
    }
}

fn harmonic_grid() -> EnergyGrid {
    EnergyGrid::for_state(&analytic_harmonic(6), &GridConfig::default()).unwrap()
}

#[test]
fn harmonic_integro_equation() {
    let grid = harmonic_grid();
    for n in 0..=2 {
        let phi = harmonic_ode_solution(n, &grid);
        let r = residual_integro(&phi, 2.0 * n as f64 + 1.0, Exponent::Finite(1)).unwrap();
        assert!(r.residual < 1e-6, "n = {n}: {r:?}");
        // the differential form and the integral form agree in verdict
        assert!(residual_harmonic_ode(&phi).unwrap() < 1e-6);
    }
}

#[test]
fn wrong_level_is_rejected_by_both_forms() {
    let grid = harmonic_grid();
    let phi = harmonic_ode_solution(1, &grid);
    let r = residual_integro(&phi, 3.2, Exponent::Finite(1)).unwrap();
    assert!(r.residual > 1e-3, "{r:?}");
}

fn pipeline_phi(m: u32, n: usize) -> (f64, EnergyDistribution, PhiFunction) {
    let states = solve(&Potential::power(m), n, &SolverConfig::default()).unwrap();
    let st = &states[n];
    let f = inverse_abel(st, &EnergyGrid::for_state(st, &GridConfig::default()).unwrap()).unwrap();
    let phi = phi_from_f(&f).unwrap();
    (st.epsilon, f, phi)
}

#[test]
fn quartic_ground_state_integro_equation() {
    let (e0, _, phi) = pipeline_phi(2, 0);
    let r = residual_integro(&phi, e0, Exponent::Finite(2)).unwrap();
    assert!(r.residual < 1e-3, "{r:?}");
    assert!(r.tail_bound >= 0.0 && r.probes > 10);
}

#[test]
fn phi_is_the_ratio_to_the_period() {
    let (_, f, phi) = pipeline_phi(3, 2);
    for ((e, v), p) in f.eps_grid.iter().zip(&f.f).zip(&phi.phi) {
        let t = period(*e, Exponent::Finite(3)).unwrap();
        assert!((p - v / t).abs() <= 1e-10 * (v / t).abs().max(1e-300), "ε = {e}");
    }
    // φ → 0 at large ε
    let last = phi.phi.last().unwrap().abs();
    let peak = phi.phi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(last < 1e-6 * peak);
}

fn slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

#[test]
fn phi_small_energy_structure() {
    for m in [1, 2, 3, 5, 10] {
        for n in [0, 1] {
            let (_, _, phi) = pipeline_phi(m, n);
            let e0 = phi.eps_grid[0];
            let low: Vec<(f64, f64)> =
                phi.eps_grid.iter().zip(&phi.phi).filter(|(e, _)| **e <= 10.0 * e0).map(|(e, p)| (*e, *p)).collect();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            match m {
                1 => assert!((low[0].1 - sign / PI).abs() < 1e-6, "n = {n}: {}", low[0].1),
                2 => {
                    let pts: Vec<(f64, f64)> = low.iter().map(|(e, p)| (-0.25 * e.ln(), *p)).collect();
                    let (s, r2) = slope(&pts);
                    assert!(r2 > 0.99 && s * sign > 0.0, "n = {n}: slope {s}, R² {r2}");
                }
                _ => {
                    let pts: Vec<(f64, f64)> = low.iter().map(|(e, p)| (e.ln(), p.abs().ln())).collect();
                    let (s, _) = slope(&pts);
                    let expect = -0.5 + 1.0 / m as f64;
                    assert!((s - expect).abs() < 0.05, "m = {m}, n = {n}: {s} vs {expect}");
                    assert!(low[0].1 * sign > 0.0);
                }
            }
        }
    }
}
