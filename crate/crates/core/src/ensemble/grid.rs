use serde::{Deserialize, Serialize};

use crate::eigen::EigenSolution;
use crate::error::{Error, Result};
use crate::potential::Exponent;

/// Smallest energy the grid may start at; keeps ε^{2} and ε·f representable.
const ABSOLUTE_FLOOR: f64 = 1e-290;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridType {
    /// Geometric near zero joined to a body uniform in ε^{1/(2m)}.
    LogLinear,
    /// Supplied by the caller.
    Custom,
}

/// Construction parameters for [`EnergyGrid::for_state`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// ε_min = min(floor_factor·ε_n, scaled_floor^{2m}).
    pub floor_factor: f64,
    /// The geometric segment stops at break_factor·ε_n.
    pub break_factor: f64,
    /// Bound on the scaled abscissa ε_min^{1/(2m)}.
    pub scaled_floor: f64,
    /// Step in ln ε of the geometric segment; `None` picks max(0.008m, ln10/40).
    pub log_step: Option<f64>,
    pub body_points: usize,
    /// The grid ends where ρ_n falls below this fraction of its maximum.
    pub tail_density: f64,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            floor_factor: 1e-8,
            break_factor: 0.1,
            scaled_floor: 0.001,
            log_step: None,
            body_points: 1500,
            tail_density: 1e-12,
            eps_min: None,
            eps_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub points: Vec<f64>,
    pub grid_type: GridType,
}

impl EnergyGrid {
    /// Grid adapted to one eigenstate: dense geometric steps resolve the
    /// ε → 0 singularity, the body is uniform in ε^{1/(2m)} where nodes sit.
    pub fn for_state(sol: &EigenSolution, config: &GridConfig) -> Result<Self> {
        let m = match sol.m {
            Exponent::Finite(m) => m as f64,
            Exponent::Infinite => return Err(Error::Integrability { exponent: -1.0 }),
        };
        let en = sol.epsilon;
        let scaled = (2.0 * m * config.scaled_floor.ln()).exp();
        let eps_min = config.eps_min.unwrap_or_else(|| (config.floor_factor * en).min(scaled)).max(ABSOLUTE_FLOOR);
        let eps_max = config.eps_max.unwrap_or_else(|| (2.0 * m * sol.density_cutoff(config.tail_density).ln()).exp());
        let eps_break = (config.break_factor * en).clamp(eps_min, eps_max);
        if !(eps_min > 0.0 && eps_max > eps_min) || config.body_points < 2 {
            return Err(Error::domain(format!(
                "invalid energy range [{eps_min:e}, {eps_max:e}] or body size {}",
                config.body_points
            )));
        }
        let step = config.log_step.unwrap_or((2.0 * m * 0.004).max(std::f64::consts::LN_10 / 40.0));
        let (u0, u1) = (eps_min.ln(), eps_break.ln());
        let count = ((u1 - u0) / step).ceil() as usize;
        let mut points: Vec<f64> = (0..count).map(|i| (u0 + (u1 - u0) * i as f64 / count as f64).exp()).collect();
        let (s0, s1) = (eps_break.powf(0.5 / m), eps_max.powf(0.5 / m));
        let body = config.body_points;
        for i in 0..body {
            let s = s0 + (s1 - s0) * i as f64 / (body - 1) as f64;
            points.push((2.0 * m * s.ln()).exp());
        }
        points.dedup_by(|b, a| *b <= *a);
        Ok(EnergyGrid { points, grid_type: GridType::LogLinear })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 8 {
            return Err(Error::domain("an energy grid needs at least 8 points"));
        }
        if !(points[0] > 0.0) || points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("energy grid must be positive and strictly increasing"));
        }
        Ok(EnergyGrid { points, grid_type: GridType::Custom })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::analytic_harmonic;

    #[test]
    fn harmonic_grid_shape() {
        let sol = analytic_harmonic(0);
        let g = EnergyGrid::for_state(&sol, &GridConfig::default()).unwrap();
        assert!(g.points.windows(2).all(|w| w[1] > w[0]));
        assert!((g.points[0] - 1e-8).abs() < 1e-20);
        let last = *g.points.last().unwrap();
        // ρ₀ = e^{-x²}/√π falls to 1e-12 of its peak near x² = 27.6.
        assert!(last > 25.0 && last < 30.0, "{last}");
    }

    #[test]
    fn large_m_floor_is_scaled() {
        let sol = analytic_harmonic(0);
        let cfg = GridConfig { eps_min: Some(1e-3), eps_max: Some(10.0), ..Default::default() };
        let g = EnergyGrid::for_state(&sol, &cfg).unwrap();
        assert!((g.points[0] - 1e-3).abs() < 1e-15);
        assert!((g.points.last().unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn custom_grids_are_validated() {
        assert!(EnergyGrid::from_points(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).is_err());
        assert!(EnergyGrid::from_points(vec![1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).is_err());
        assert!(EnergyGrid::from_points((1..9).map(|i| i as f64).collect()).is_ok());
    }
}
