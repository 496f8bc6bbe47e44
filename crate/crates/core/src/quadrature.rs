//! Gauss–Legendre rules and a globally adaptive panel integrator.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 10-point rule used by the adaptive integrator.
pub(crate) fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Shared 3-point rule for integrating local cubic interpolants exactly.
pub(crate) fn gl3() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(3))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig { rel_tol: 1e-9, abs_tol: 1e-300, max_panels: 4000 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn evaluate_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let rule = gl10();
    let mid = 0.5 * (a + b);
    let whole = rule.integrate(a, b, &mut *f);
    let left = rule.integrate(a, mid, &mut *f);
    let right = rule.integrate(mid, b, &mut *f);
    let value = left + right;
    Panel { a, b, value, error: (value - whole).abs() }
}

/// Globally adaptive Gauss–Legendre integration of `f` over the panels
/// delimited by `breakpoints` (sorted, at least two entries). The panel with
/// the largest error estimate is bisected until the summed estimate drops
/// below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    config: AdaptiveConfig,
) -> Result<Quadrature> {
    if breakpoints.len() < 2 {
        return Err(Error::domain("adaptive integration needs at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    for pair in breakpoints.windows(2) {
        if pair[1] > pair[0] {
            heap.push(evaluate_panel(&mut f, pair[0], pair[1]));
        }
    }
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value", f64::INFINITY));
        }
        let target = config.abs_tol.max(config.rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature { value, error, panels: heap.len() });
        }
        if heap.len() >= config.max_panels {
            return Err(Error::numeric(format!("adaptive quadrature exhausted {} panels", config.max_panels), error));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point; accept it.
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        heap.push(evaluate_panel(&mut f, worst.a, mid));
        heap.push(evaluate_panel(&mut f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(7);
        let weight_sum: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert_relative_eq!(weight_sum, 2.0, max_relative = 1e-15);
        // degree 13 is exact for 7 nodes
        let v = rule.integrate(0.0, 2.0, |x| x.powi(13));
        assert_relative_eq!(v, 2f64.powi(14) / 14.0, max_relative = 1e-14);
    }

    #[test]
    fn large_rule_nodes_are_accurate() {
        let rule = GaussLegendre::new(200);
        let v = rule.integrate(0.0, PI, f64::sin);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2: bisection alone converges, slowly, with the
        // error estimate lagging the true error by a small factor.
        let q = integrate_adaptive(|x| x.powf(-0.5), &[0.0, 1.0], AdaptiveConfig::default()).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-8);
        // After x = t² the integrand is constant.
        let q = integrate_adaptive(|t| 2.0 * t / t.max(1e-300), &[0.0, 1.0], AdaptiveConfig::default()).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_reports_exhaustion() {
        let config = AdaptiveConfig { rel_tol: 1e-15, abs_tol: 0.0, max_panels: 3 };
        let r = integrate_adaptive(|x| x.powf(-0.9), &[0.0, 1.0], config);
        assert!(matches!(r, Err(Error::Numeric { .. })));
    }
}
