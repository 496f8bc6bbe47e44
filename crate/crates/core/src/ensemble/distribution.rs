use serde::Serialize;

use super::grid::{EnergyGrid, GridType};
use crate::error::{Error, Result};
use crate::interp::{cubic_at, cumulative_cubic, locate};
use crate::potential::{Exponent, Potential};

/// Points of the low-energy end used for the power-law tail fit.
const TAIL_FIT_POINTS: usize = 6;

/// Samples whose |ε f| is below this fraction of the maximum are treated as
/// zero when counting sign changes.
pub const NODE_NOISE: f64 = 1e-9;

/// f(ε) ≈ f0·(ε/eps0)^exponent below the first grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTail {
    pub eps0: f64,
    pub f0: f64,
    pub exponent: f64,
}

impl PowerTail {
    fn fit(eps: &[f64], f: &[f64]) -> Self {
        let k = TAIL_FIT_POINTS.min(eps.len());
        let (eps0, f0) = (eps[0], f[0]);
        let pts: Vec<(f64, f64)> = (0..k)
            .filter(|&i| f[i] != 0.0 && f[i].signum() == f0.signum())
            .map(|i| (eps[i].ln(), f[i].abs().ln()))
            .collect();
        let exponent = if pts.len() < 2 {
            0.0
        } else {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        };
        PowerTail { eps0, f0, exponent }
    }

    pub fn value(&self, eps: f64) -> f64 {
        self.f0 * (eps / self.eps0).powf(self.exponent)
    }

    /// ∫₀^{eps0} f.
    pub fn integral(&self) -> f64 {
        self.eps0 * self.f0 / (self.exponent + 1.0)
    }

    /// ∫₀^{eps0} ε f.
    pub fn first_moment(&self) -> f64 {
        self.eps0 * self.eps0 * self.f0 / (self.exponent + 2.0)
    }
}

/// Sampled energy distribution f_n(ε) with its normalization and mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyDistribution {
    pub n: usize,
    pub m: Exponent,
    pub epsilon_n: f64,
    pub eps_grid: Vec<f64>,
    pub f: Vec<f64>,
    pub grid_type: GridType,
    pub integral: f64,
    pub mean_energy: f64,
    pub low_tail: PowerTail,
}

impl EnergyDistribution {
    /// Wrap samples of f on `grid`. Integrals use a local cubic in u = ln ε
    /// applied to ε f, plus the fitted power law below the first point.
    pub fn from_samples(n: usize, m: Exponent, epsilon_n: f64, grid: EnergyGrid, f: Vec<f64>) -> Result<Self> {
        m.finite()?;
        if grid.points.len() != f.len() {
            return Err(Error::domain("grid and samples differ in length"));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite distribution sample", f64::INFINITY));
        }
        let eps = grid.points;
        let low_tail = PowerTail::fit(&eps, &f);
        if low_tail.exponent <= -1.0 {
            return Err(Error::Integrability { exponent: low_tail.exponent });
        }
        let u: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let w: Vec<f64> = eps.iter().zip(&f).map(|(e, v)| e * v).collect();
        let w2: Vec<f64> = eps.iter().zip(&w).map(|(e, v)| e * v).collect();
        let integral = low_tail.integral() + cumulative_cubic(&u, &w).last().unwrap();
        let mean_energy = low_tail.first_moment() + cumulative_cubic(&u, &w2).last().unwrap();
        Ok(EnergyDistribution {
            n,
            m,
            epsilon_n,
            eps_grid: eps,
            f,
            grid_type: grid.grid_type,
            integral,
            mean_energy,
            low_tail,
        })
    }

    pub fn m_value(&self) -> u32 {
        match self.m {
            Exponent::Finite(m) => m,
            Exponent::Infinite => unreachable!("distributions are never built for the box"),
        }
    }

    fn log_grid(&self) -> Vec<f64> {
        self.eps_grid.iter().map(|e| e.ln()).collect()
    }

    fn weighted(&self) -> Vec<f64> {
        self.eps_grid.iter().zip(&self.f).map(|(e, v)| e * v).collect()
    }

    /// Interpolated f(ε): power-law tail below the grid, zero above it.
    pub fn value_at(&self, eps: f64) -> f64 {
        if eps < self.eps_grid[0] {
            return self.low_tail.value(eps);
        }
        if eps > *self.eps_grid.last().unwrap() {
            return 0.0;
        }
        let u = self.log_grid();
        cubic_at(&u, &self.weighted(), eps.ln()) / eps
    }

    /// Interpolator that avoids rebuilding the log grid for repeated calls.
    pub(crate) fn sampler(&self) -> impl Fn(f64) -> f64 + '_ {
        let u = self.log_grid();
        let w = self.weighted();
        let lo = self.eps_grid[0];
        let hi = *self.eps_grid.last().unwrap();
        move |eps: f64| {
            if eps < lo {
                self.low_tail.value(eps)
            } else if eps > hi {
                0.0
            } else {
                cubic_at(&u, &w, eps.ln()) / eps
            }
        }
    }

    /// Number of sign changes of f on the grid, ignoring noise-level samples.
    pub fn sign_changes(&self) -> usize {
        significant_signs(&self.weighted()).windows(2).filter(|p| p[0].1 != p[1].1).count()
    }
}

fn significant_signs(w: &[f64]) -> Vec<(usize, bool)> {
    let max = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    w.iter().enumerate().filter(|(_, v)| v.abs() > NODE_NOISE * max).map(|(i, v)| (i, *v > 0.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeDistribution {
    pub n: usize,
    pub m: Exponent,
    pub eps_grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// F(ε) = ∫₀^ε f on the distribution's grid.
pub fn cumulative(f: &EnergyDistribution) -> Result<CumulativeDistribution> {
    if f.low_tail.exponent <= -1.0 {
        return Err(Error::Integrability { exponent: f.low_tail.exponent });
    }
    let base = f.low_tail.integral();
    let values = cumulative_cubic(&f.log_grid(), &f.weighted()).into_iter().map(|c| base + c).collect();
    Ok(CumulativeDistribution { n: f.n, m: f.m, eps_grid: f.eps_grid.clone(), values })
}

/// ∫ ε f dε. Fails when the last samples still carry a visible share of the
/// mean, i.e. the grid was cut before the large-ε tail settled.
pub fn mean_energy(f: &EnergyDistribution) -> Result<f64> {
    let k = f.eps_grid.len() - 1;
    let u = f.log_grid();
    let last = f.eps_grid[k] * f.eps_grid[k] * f.f[k];
    // Share of one unit of ln ε at the level of the final sample.
    let remainder = last.abs() * (u[k] - u[k - 1]).max(1.0);
    if remainder > 1e-5 * f.mean_energy.abs() {
        return Err(Error::numeric(format!("mean-energy tail not settled at ε_max = {:e}", f.eps_grid[k]), remainder));
    }
    Ok(f.mean_energy)
}

/// ∫₀^cutoff ε f dε.
pub fn mean_energy_below(f: &EnergyDistribution, cutoff: f64) -> f64 {
    if cutoff <= f.low_tail.eps0 {
        let t = f.low_tail;
        return t.first_moment() * (cutoff / t.eps0).powf(t.exponent + 2.0);
    }
    let u = f.log_grid();
    let w2: Vec<f64> = f.eps_grid.iter().zip(&f.f).map(|(e, v)| e * e * v).collect();
    let k = locate(&f.eps_grid, cutoff);
    let cum = cumulative_cubic(&u[..=k], &w2[..=k]);
    let uc = cutoff.ln().min(*u.last().unwrap());
    let piece = crate::quadrature::gl10().integrate(u[k], uc, |x| cubic_at(&u, &w2, x));
    f.low_tail.first_moment() + cum[k] + piece
}

/// Sign changes of f, located by bisection on the cubic interpolant of εf
/// in ln ε between the bracketing samples.
pub fn nodes(f: &EnergyDistribution) -> Vec<f64> {
    let u = f.log_grid();
    let w = f.weighted();
    let signs = significant_signs(&w);
    let mut out = Vec::new();
    for pair in signs.windows(2) {
        let ((i, a), (j, b)) = (pair[0], pair[1]);
        if a == b {
            continue;
        }
        // The zero lies in the last interval of [i, j] whose ends differ in sign.
        let k = (i..j).find(|&k| (w[k] > 0.0) != (w[k + 1] > 0.0) && w[k + 1] != 0.0).unwrap_or(i);
        let (mut lo, mut hi) = (u[k], u[k + 1]);
        let positive_lo = cubic_at(&u, &w, lo) > 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (cubic_at(&u, &w, mid) > 0.0) == positive_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push((0.5 * (lo + hi)).exp());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledPoint {
    /// ε^{1/(2m)}
    pub s: f64,
    /// sgn(f)·|f|^{1/(2m)}
    pub value: f64,
}

pub fn scaled_distribution(f: &EnergyDistribution) -> Vec<ScaledPoint> {
    let inv = 0.5 / f.m_value() as f64;
    f.eps_grid
        .iter()
        .zip(&f.f)
        .map(|(&e, &v)| ScaledPoint {
            s: e.powf(inv),
            value: if v == 0.0 { 0.0 } else { v.signum() * v.abs().powf(inv) },
        })
        .collect()
}

/// Distribution over physical energies E = γε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalDistribution {
    pub gamma: f64,
    pub energy: Vec<f64>,
    pub f: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub mean_energy: f64,
}

/// f̃(E) = f(E/γ)/γ and F̃(E) = F(E/γ).
pub fn to_physical(f: &EnergyDistribution, potential: &Potential) -> Result<PhysicalDistribution> {
    potential.exponent.finite()?;
    let gamma = potential.gamma();
    let cum = cumulative(f)?;
    Ok(PhysicalDistribution {
        gamma,
        energy: f.eps_grid.iter().map(|e| gamma * e).collect(),
        f: f.f.iter().map(|v| v / gamma).collect(),
        cumulative: cum.values,
        mean_energy: gamma * f.mean_energy,
    })
}
