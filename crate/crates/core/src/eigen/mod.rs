//! Bound states of ψ'' + (ε - x^{2m})ψ = 0.
//!
//! [`solve`] uses double-exponential Sinc collocation and refines the basis
//! until successive eigenvalues agree. [`oracle_solve`] is an independent
//! Numerov shooting check. [`analytic_harmonic`] and [`analytic_box`] give
//! the closed-form m = 1 and m → ∞ states.
//!
//! All grids hold x >= 0 only; values at x < 0 follow from parity.

mod analytic;
mod numerov;
mod sinc;
mod table;

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::potential::{Exponent, Potential};
use crate::special::beta;

pub use analytic::{analytic_box, analytic_box_on, analytic_harmonic, analytic_harmonic_on};
pub use numerov::{oracle_solve, oracle_solve_with_step, NUMEROV_STEP};
pub use sinc::{Parity, SincExpansion};

use sinc::{solve_block, DeMap};
use table::ChebTable;

/// Parameters of the Sinc collocation.
///
/// `basis_size` is the initial number of collocation points on t >= 0 and
/// `de_step` the initial Sinc step; each refinement doubles the first and
/// halves the second, so the truncated t-interval stays fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub basis_size: usize,
    pub de_step: f64,
    pub target_states: usize,
    /// Required agreement between successive refinements.
    pub oracle_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { basis_size: 48, de_step: 1.0 / 48.0, target_states: 11, oracle_tolerance: 1e-10 }
    }
}

/// Largest half-size tried before giving up.
pub const MAX_HALF_SIZE: usize = 3072;

#[derive(Debug, Clone)]
pub(crate) enum Representation {
    Sinc(Arc<SincExpansion>),
    Harmonic,
    Box,
}

/// A normalized eigenstate sampled on x >= 0.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub n: usize,
    pub m: Exponent,
    pub epsilon: f64,
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    /// Relative change of ε between the last two basis refinements
    /// (zero for analytic states).
    pub accuracy_estimate: f64,
    pub(crate) repr: Representation,
    pub(crate) table: Arc<OnceLock<ChebTable>>,
}

/// ρ and its first three x-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDerivatives {
    pub rho: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl EigenSolution {
    pub fn parity(&self) -> Parity {
        Parity::of(self.n)
    }

    /// Right end of the sampled support.
    pub fn support(&self) -> f64 {
        match &self.repr {
            Representation::Sinc(e) => e.x_max(),
            Representation::Harmonic => *self.grid.last().unwrap(),
            Representation::Box => 1.0,
        }
    }

    /// ψ, ψ', ψ'', ψ''' at |x| <= support, with the parity continuation.
    pub fn psi_derivatives(&self, x: f64) -> Result<[f64; 4]> {
        let ax = x.abs();
        if !(ax <= self.support()) {
            return Err(Error::domain(format!(
                "x = {x} lies outside the solution support [-{s}, {s}]",
                s = self.support()
            )));
        }
        let d = match &self.repr {
            Representation::Sinc(e) => e.psi_derivatives(ax),
            Representation::Harmonic => analytic::harmonic_psi(self.n, ax)?,
            Representation::Box => analytic::box_psi(self.n, ax),
        };
        if x >= 0.0 {
            return Ok(d);
        }
        let s = self.parity() == Parity::Even;
        // ψ(-x) = ±ψ(x): derivatives of order r pick up (-1)^r.
        let sg = |r: usize| {
            let base = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
            if s {
                base
            } else {
                -base
            }
        };
        Ok([d[0] * sg(0), d[1] * sg(1), d[2] * sg(2), d[3] * sg(3)])
    }

    /// dρ/dx at 0 <= x <= support. Numerical states go through a cached
    /// piecewise Chebyshev table of the exact Sinc derivative, accurate to
    /// 1e-11 of its peak or to the round-off of the Sinc sum if larger.
    pub fn drho(&self, x: f64) -> f64 {
        match &self.repr {
            Representation::Sinc(e) => {
                let table = self.table.get_or_init(|| {
                    let exact = |x: f64| {
                        let [p, dp] = e.psi_slope(x);
                        2.0 * p * dp
                    };
                    let scale = self.drho.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    ChebTable::build(&exact, 0.0, e.x_max(), 1e-11, 1e-11 * scale)
                });
                table.eval(x.min(e.x_max()))
            }
            Representation::Harmonic => {
                let d = analytic::harmonic_psi(self.n, x).unwrap_or([0.0; 4]);
                2.0 * d[0] * d[1]
            }
            Representation::Box => {
                let d = analytic::box_psi(self.n, x);
                2.0 * d[0] * d[1]
            }
        }
    }

    /// Smallest x >= 0 beyond which ρ stays below `rel`·max ρ.
    pub fn density_cutoff(&self, rel: f64) -> f64 {
        if let Representation::Box = self.repr {
            return 1.0;
        }
        let rho_at = |x: f64| self.psi_derivatives(x).map(|d| d[0] * d[0]).unwrap_or(0.0);
        let max = self.rho.iter().fold(0.0f64, |a, &v| a.max(v));
        let threshold = rel * max;
        let last = match self.rho.iter().rposition(|&r| r >= threshold) {
            Some(i) => i,
            None => return self.support(),
        };
        if last + 1 >= self.grid.len() {
            return self.support();
        }
        let (mut lo, mut hi) = (self.grid[last], self.grid[last + 1]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if rho_at(mid) >= threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut s = self.clone();
        s.epsilon = epsilon;
        s
    }
}

/// Density and its derivatives at x, including x < 0 by parity.
pub fn density_derivatives(sol: &EigenSolution, x: f64) -> Result<DensityDerivatives> {
    let [p0, p1, p2, p3] = sol.psi_derivatives(x)?;
    Ok(DensityDerivatives {
        rho: p0 * p0,
        d1: 2.0 * p0 * p1,
        d2: 2.0 * (p1 * p1 + p0 * p2),
        d3: 2.0 * (3.0 * p1 * p2 + p0 * p3),
    })
}

/// ρ''(0) from the eigenvalue and the state at the origin:
/// -2ε ρ(0) for even n, 2ψ'(0)² for odd n.
pub fn c_n1(sol: &EigenSolution) -> Result<f64> {
    let d = sol.psi_derivatives(0.0)?;
    Ok(match sol.parity() {
        Parity::Even => -2.0 * sol.epsilon * d[0] * d[0],
        Parity::Odd => 2.0 * d[1] * d[1],
    })
}

/// Classical turning point ε^{1/(2m)}; 1 for the box.
pub fn turning_point(epsilon: f64, m: Exponent) -> f64 {
    match m {
        Exponent::Finite(m) => epsilon.powf(1.0 / (2.0 * m as f64)),
        Exponent::Infinite => 1.0,
    }
}

/// Lowest-order semiclassical level, used only to size the domain.
fn rough_level(m: u32, n: usize) -> f64 {
    let mf = m as f64;
    let b1 = beta(1.0 / (2.0 * mf), 1.5).unwrap_or(1.0);
    (std::f64::consts::PI * mf * (n as f64 + 0.5) / b1).powf(2.0 * mf / (mf + 1.0))
}

/// Point beyond which every state up to the sizing energy has decayed
/// by e^{-DECAY}: ∫_{x_tp}^{X} √(y^{2m} - ε) dy = DECAY.
fn domain_edge(m: u32, eps: f64) -> f64 {
    const DECAY: f64 = 20.0;
    let two_m = 2 * m as i32;
    let x_tp = eps.powf(1.0 / (2.0 * m as f64));
    let mut x = x_tp;
    let mut action = 0.0;
    let dx = x_tp * 1e-4;
    let mut prev = 0.0;
    while action < DECAY {
        x += dx;
        let cur = (x.powi(two_m) - eps).max(0.0).sqrt();
        action += 0.5 * (prev + cur) * dx;
        prev = cur;
    }
    x
}

/// Sinc truncation t_max = basis_size·de_step and the map scale c that puts
/// the last collocation point at the domain edge.
fn map_for(x_max: f64, t_max: f64) -> DeMap {
    DeMap { c: x_max.asinh() / t_max.sinh() }
}

struct Level {
    values: Vec<f64>,
    norm: f64,
    expansions: Vec<SincExpansion>,
}

fn solve_level(m: u32, map: DeMap, h: f64, half: usize, count: usize) -> Result<Level> {
    let n_even = count.div_ceil(2);
    let n_odd = count / 2;
    let (even, odd) = rayon::join(
        || solve_block(m, map, h, half, Parity::Even, n_even),
        || solve_block(m, map, h, half, Parity::Odd, n_odd),
    );
    let (even, odd) = (even?, odd?);
    let norm = even.norm.max(odd.norm);
    let mut values = Vec::with_capacity(count);
    let mut expansions = Vec::with_capacity(count);
    let (mut ev, mut od) = (even.values.into_iter(), odd.values.into_iter());
    let (mut ee, mut oe) = (even.expansions.into_iter(), odd.expansions.into_iter());
    for n in 0..count {
        if n % 2 == 0 {
            values.push(ev.next().unwrap());
            expansions.push(ee.next().unwrap());
        } else {
            values.push(od.next().unwrap());
            expansions.push(oe.next().unwrap());
        }
    }
    Ok(Level { values, norm, expansions })
}

/// Lowest n_max + 1 eigenstates of the scaled potential x^{2m}.
///
/// Eigenvalues are dimensionless; multiply by [`Potential::gamma`] for
/// physical energies.
pub fn solve(potential: &Potential, n_max: usize, config: &SolverConfig) -> Result<Vec<EigenSolution>> {
    let m = match potential.exponent {
        Exponent::Finite(m) if m >= 1 => m,
        Exponent::Finite(_) => return Err(Error::domain("exponent m must be >= 1")),
        Exponent::Infinite => return Err(Error::domain("the infinite well has analytic solutions; use analytic_box")),
    };
    if !(config.de_step > 0.0) || config.basis_size < 4 {
        return Err(Error::domain("solver config needs de_step > 0 and basis_size >= 4"));
    }
    let count = n_max + 1;
    if config.basis_size < 4 * count.min(config.target_states.max(1)) {
        return Err(Error::domain(format!(
            "basis_size {} is below 4 x the number of requested states",
            config.basis_size
        )));
    }
    let x_max = domain_edge(m, rough_level(m, n_max + 1));
    let t_max = config.basis_size as f64 * config.de_step;
    let map = map_for(x_max, t_max);

    let mut half = config.basis_size;
    let mut h = config.de_step;
    let mut prev: Option<Level> = None;
    let tol = config.oracle_tolerance;
    loop {
        let level = solve_level(m, map, h, half, count)?;
        if let Some(p) = &prev {
            // Converged when successive levels agree to the tolerance, or to
            // the round-off level ε_mach·‖A‖ of the discrete operator, below
            // which further doubling only adds noise.
            let floor = f64::EPSILON * level.norm;
            let mut worst = 0.0f64;
            let mut ok = true;
            for (a, b) in level.values.iter().zip(&p.values) {
                let d = (a - b).abs();
                worst = worst.max(d / a.abs().max(1.0));
                if d > (tol * a.abs().max(1.0)).max(floor) {
                    ok = false;
                }
            }
            if ok {
                let errs: Vec<f64> =
                    level.values.iter().zip(&p.values).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).collect();
                return Ok(level
                    .values
                    .into_iter()
                    .zip(level.expansions)
                    .zip(errs)
                    .enumerate()
                    .map(|(n, ((eps, exp), err))| from_expansion(n, m, eps, exp, err))
                    .collect());
            }
            if 2 * half > MAX_HALF_SIZE {
                return Err(Error::Convergence {
                    message: format!("basis limit {MAX_HALF_SIZE} reached for m = {m}"),
                    estimate: worst,
                });
            }
        }
        prev = Some(level);
        half *= 2;
        h *= 0.5;
    }
}

fn from_expansion(n: usize, m: u32, epsilon: f64, exp: SincExpansion, err: f64) -> EigenSolution {
    let grid = exp.nodes();
    let mut psi = Vec::with_capacity(grid.len());
    let mut rho = Vec::with_capacity(grid.len());
    let mut drho = Vec::with_capacity(grid.len());
    for (j, &x) in grid.iter().enumerate() {
        let d = exp.psi_derivatives(x);
        let p = exp.node_value(j);
        psi.push(p);
        rho.push(p * p);
        drho.push(2.0 * d[0] * d[1]);
    }
    EigenSolution {
        n,
        m: Exponent::Finite(m),
        epsilon,
        grid,
        psi,
        rho,
        drho,
        accuracy_estimate: err,
        repr: Representation::Sinc(Arc::new(exp)),
        table: Arc::new(OnceLock::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_levels() {
        let s = solve(&Potential::power(1), 6, &SolverConfig::default()).unwrap();
        for (n, st) in s.iter().enumerate() {
            assert_relative_eq!(st.epsilon, 2.0 * n as f64 + 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn turning_points() {
        assert_eq!(turning_point(1.0, Exponent::Finite(7)), 1.0);
        assert_relative_eq!(turning_point(9.0, Exponent::Finite(1)), 3.0, max_relative = 1e-15);
        assert_relative_eq!(turning_point(56.17, Exponent::Finite(100)), 1.020_348, max_relative = 1e-5);
    }

    #[test]
    fn box_is_rejected() {
        assert!(matches!(solve(&Potential::infinite_well(), 0, &SolverConfig::default()), Err(Error::Domain(_))));
    }
}
