//! The data-producing subcommands. Each returns an [`Outcome`] held in
//! memory; writing and verification happen in [`crate::manifest`].

use classrep::classrep::{kernel_q, kernel_q_box_limit, phi_from_f, residual_density_ode, residual_integro};
use classrep::eigen::{analytic_box, density_derivatives, solve, turning_point, EigenSolution, SolverConfig};
use classrep::ensemble::{
    cumulative, inverse_abel, nodes, scaled_distribution, EnergyDistribution, EnergyGrid, GridConfig,
};
use classrep::wkb::{wkb0, wkb2, wkb_limits};
use classrep::{Exponent, Potential};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::{Artifact, Failure, Outcome, StateSummary};
use crate::output::{Cell, Table};

pub const DEFAULT_M: [Exponent; 6] = [
    Exponent::Finite(1),
    Exponent::Finite(2),
    Exponent::Finite(3),
    Exponent::Finite(5),
    Exponent::Finite(10),
    Exponent::Finite(100),
];

/// Resolved configuration plus the worker pool that runs (m, n) tasks.
pub struct Context {
    pub cfg: RunConfig,
    pool: ThreadPool,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
        Ok(Context { cfg, pool })
    }

    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        self.pool.install(op)
    }

    fn grid_config(&self) -> GridConfig {
        GridConfig {
            eps_min: self.cfg.grid_min,
            eps_max: self.cfg.grid_max,
            body_points: self.cfg.points.unwrap_or(GridConfig::default().body_points),
            ..GridConfig::default()
        }
    }

    /// States 0..=n_max for every exponent, solved in parallel. The result
    /// order follows `ms`.
    pub fn solve_all(&self, ms: &[Exponent], n_max: usize) -> Vec<(Exponent, classrep::Result<Vec<EigenSolution>>)> {
        self.install(|| ms.par_iter().map(|&m| (m, states_for(m, n_max))).collect())
    }

    /// Energy distributions of the requested states, sorted by (m, n).
    pub fn distributions(&self, ms: &[Exponent], ns: &[usize]) -> Vec<StateResult> {
        let n_max = ns.iter().copied().max().unwrap_or(0);
        let solved = self.solve_all(ms, n_max);
        let grid = self.grid_config();
        let tasks: Vec<(Exponent, usize, std::result::Result<EigenSolution, String>)> = solved
            .into_iter()
            .flat_map(|(m, s)| {
                ns.iter()
                    .map(|&n| (m, n, s.as_ref().map(|v| v[n].clone()).map_err(|e| e.to_string())))
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out: Vec<StateResult> = self.install(|| {
            tasks
                .into_par_iter()
                .map(|(m, n, st)| {
                    let dist = match &st {
                        Ok(s) => distribution_for(s, &grid).map_err(|e| e.to_string()),
                        Err(e) => Err(e.clone()),
                    };
                    StateResult { m, n, state: st, dist }
                })
                .collect()
        });
        out.sort_by_key(|r| (r.m, r.n));
        out
    }
}

pub struct StateResult {
    pub m: Exponent,
    pub n: usize,
    pub state: std::result::Result<EigenSolution, String>,
    pub dist: std::result::Result<EnergyDistribution, String>,
}

pub fn states_for(m: Exponent, n_max: usize) -> classrep::Result<Vec<EigenSolution>> {
    match m {
        Exponent::Infinite => Ok((0..=n_max).map(analytic_box).collect()),
        Exponent::Finite(k) => solve(&Potential::power(k), n_max, &SolverConfig::default()),
    }
}

pub fn distribution_for(st: &EigenSolution, grid: &GridConfig) -> classrep::Result<EnergyDistribution> {
    let g = EnergyGrid::for_state(st, grid)?;
    inverse_abel(st, &g)
}

fn is_expected(m: Exponent) -> bool {
    m == Exponent::Infinite
}

fn failure(m: Exponent, n: Option<usize>, stage: &str, message: impl Into<String>) -> Failure {
    Failure { m: m.to_string(), n, stage: stage.into(), expected: is_expected(m), message: message.into() }
}

fn file_stem(kind: &str, m: Exponent, n: usize) -> String {
    format!("{kind}_m{m}_n{n}")
}

/// Density and derivatives on a symmetric x grid. Past the sampled support
/// (the box walls, or where ψ has underflowed) the density is zero.
fn density_rows(st: &EigenSolution, half_width: f64, points: usize, full: bool) -> classrep::Result<Table> {
    let mut t =
        if full { Table::new(&["x", "rho", "drho", "d2rho", "d3rho"]) } else { Table::new(&["x", "rho", "drho"]) };
    for i in 0..points {
        let x = -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64;
        let outside = x.abs() > st.support();
        let d = if outside {
            classrep::eigen::DensityDerivatives { rho: 0.0, d1: 0.0, d2: 0.0, d3: 0.0 }
        } else {
            density_derivatives(st, x)?
        };
        let mut row = vec![Cell::Float(x), d.rho.into(), d.d1.into()];
        if full {
            row.extend([d.d2.into(), d.d3.into()]);
        }
        t.push(row);
    }
    Ok(t)
}

fn half_width(st: &EigenSolution, cfg: &RunConfig) -> f64 {
    cfg.grid_max.unwrap_or_else(|| match st.m {
        Exponent::Infinite => 1.2,
        Exponent::Finite(_) => st.density_cutoff(1e-12),
    })
}

pub fn state_summary(st: &EigenSolution) -> StateSummary {
    StateSummary {
        m: st.m.to_string(),
        n: st.n,
        epsilon: Some(st.epsilon),
        turning_point: Some(turning_point(st.epsilon, st.m)),
        ..Default::default()
    }
}

/// Eigenvalues with both WKB orders, plus a density grid per state.
pub fn eigen(ctx: &Context) -> Result<Outcome> {
    let ms = ctx.cfg.m_or(&DEFAULT_M);
    let ns = ctx.cfg.n_or(&[0, 1, 2, 3, 4]);
    let points = ctx.cfg.points.unwrap_or(401);
    let mut out = Outcome::new("eigen");
    let mut table = Table::new(&["m", "n", "epsilon", "wkb0", "wkb2", "accuracy_estimate"]);
    for (m, states) in ctx.solve_all(&ms, *ns.last().unwrap()) {
        let states = match states {
            Ok(s) => s,
            Err(e) => {
                out.failures.extend(ns.iter().map(|&n| failure(m, Some(n), "eigen", e.to_string())));
                continue;
            }
        };
        for &n in &ns {
            let st = &states[n];
            let (w0, w2) = wkb_pair(n, m)?;
            table.push(vec![m.into(), n.into(), st.epsilon.into(), w0.into(), w2.into(), st.accuracy_estimate.into()]);
            match density_rows(st, half_width(st, &ctx.cfg), points, false) {
                Ok(t) => out.artifacts.push(Artifact { name: file_stem("density", m, n), table: t }),
                Err(e) => out.failures.push(failure(m, Some(n), "density", e.to_string())),
            }
            out.summary.push(state_summary(st));
        }
    }
    out.artifacts.push(Artifact { name: "eigenvalues".into(), table });
    Ok(out)
}

/// Order-0 and order-2 WKB levels; the box limit takes the m → ∞ forms.
fn wkb_pair(n: usize, m: Exponent) -> Result<(f64, f64)> {
    Ok(match m {
        Exponent::Finite(k) => (wkb0(n, k)?.epsilon, wkb2(n, k)?.epsilon),
        Exponent::Infinite => (wkb_limits(n, f64::INFINITY).0, f64::INFINITY),
    })
}

pub fn wkb(ctx: &Context) -> Result<Outcome> {
    let defaults: Vec<Exponent> = [1, 2, 3, 5, 10, 100, 1000, 10_000].map(Exponent::Finite).to_vec();
    let ms = ctx.cfg.m_or(&defaults);
    let ns = ctx.cfg.n_or(&[0, 1, 2, 3, 4]);
    let mut table = Table::new(&["m", "n", "wkb0", "wkb2", "wkb0_limit", "wkb2_limit"]);
    for &m in &ms {
        for &n in &ns {
            let (w0, w2) = wkb_pair(n, m)?;
            let mf = match m {
                Exponent::Finite(k) => k as f64,
                Exponent::Infinite => f64::INFINITY,
            };
            let (l0, l2) = wkb_limits(n, mf);
            table.push(vec![m.into(), n.into(), w0.into(), w2.into(), l0.into(), l2.into()]);
        }
    }
    let mut out = Outcome::new("wkb");
    out.artifacts.push(Artifact { name: "wkb".into(), table });
    Ok(out)
}

pub fn density(ctx: &Context) -> Result<Outcome> {
    let ms = ctx.cfg.m_or(&DEFAULT_M);
    let ns = ctx.cfg.n_or(&[0, 4]);
    let points = ctx.cfg.points.unwrap_or(801);
    let mut out = Outcome::new("density");
    for (m, states) in ctx.solve_all(&ms, *ns.last().unwrap()) {
        let states = match states {
            Ok(s) => s,
            Err(e) => {
                out.failures.extend(ns.iter().map(|&n| failure(m, Some(n), "eigen", e.to_string())));
                continue;
            }
        };
        for &n in &ns {
            let st = &states[n];
            match density_rows(st, half_width(st, &ctx.cfg), points, true) {
                Ok(t) => out.artifacts.push(Artifact { name: file_stem("density", m, n), table: t }),
                Err(e) => out.failures.push(failure(m, Some(n), "density", e.to_string())),
            }
            out.summary.push(state_summary(st));
        }
    }
    Ok(out)
}

fn scaled_nodes(f: &EnergyDistribution) -> (Vec<f64>, Vec<f64>) {
    let nd = nodes(f);
    let inv = 0.5 / f.m_value() as f64;
    let scaled = nd.iter().map(|e| e.powf(inv)).collect();
    (nd, scaled)
}

pub fn distribution_summary(st: &EigenSolution, f: &EnergyDistribution) -> StateSummary {
    let (nodes, scaled_nodes) = scaled_nodes(f);
    StateSummary {
        integral: Some(f.integral),
        mean_energy: Some(f.mean_energy),
        nodes,
        scaled_nodes,
        ..state_summary(st)
    }
}

pub fn distribution_table(f: &EnergyDistribution) -> classrep::Result<Table> {
    let cum = cumulative(f)?;
    let mut t = Table::new(&["eps", "f", "cumulative"]);
    for ((e, v), c) in f.eps_grid.iter().zip(&f.f).zip(&cum.values) {
        t.push(vec![(*e).into(), (*v).into(), (*c).into()]);
    }
    Ok(t)
}

pub fn scaled_table(f: &EnergyDistribution) -> Table {
    let mut t = Table::new(&["s", "scaled_f"]);
    for p in scaled_distribution(f) {
        t.push(vec![p.s.into(), p.value.into()]);
    }
    t
}

pub fn tail_table(f: &EnergyDistribution) -> Table {
    let mut t = Table::new(&["eps", "f", "eps_f"]);
    for (e, v) in f.eps_grid.iter().zip(&f.f) {
        t.push(vec![(*e).into(), (*v).into(), (e * v).into()]);
    }
    t
}

/// f_n, F_n, the scaled form and the ε·f tail per state.
pub fn distribution(ctx: &Context) -> Result<Outcome> {
    let ms = ctx.cfg.m_or(&DEFAULT_M);
    let ns = ctx.cfg.n_or(&[0, 4]);
    let mut out = Outcome::new("distribution");
    for r in ctx.distributions(&ms, &ns) {
        let (st, f) = match (&r.state, &r.dist) {
            (Ok(st), Ok(f)) => (st, f),
            (Err(e), _) => {
                out.failures.push(failure(r.m, Some(r.n), "eigen", e.clone()));
                continue;
            }
            (Ok(_), Err(e)) => {
                out.failures.push(failure(r.m, Some(r.n), "distribution", e.clone()));
                continue;
            }
        };
        match distribution_table(f) {
            Ok(t) => out.artifacts.push(Artifact { name: file_stem("distribution", r.m, r.n), table: t }),
            Err(e) => {
                out.failures.push(failure(r.m, Some(r.n), "cumulative", e.to_string()));
                continue;
            }
        }
        out.artifacts.push(Artifact { name: file_stem("scaled", r.m, r.n), table: scaled_table(f) });
        out.artifacts.push(Artifact { name: file_stem("tail", r.m, r.n), table: tail_table(f) });
        out.summary.push(distribution_summary(st, f));
    }
    Ok(out)
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

/// Q(ε̃, ε) with its three terms and the large-m form on ε < ε̃ pairs.
pub fn kernel(ctx: &Context) -> Result<Outcome> {
    let defaults: Vec<Exponent> = [1, 2, 5, 200].map(Exponent::Finite).to_vec();
    let ms = ctx.cfg.m_or(&defaults);
    let eps = geometric(ctx.cfg.grid_min.unwrap_or(0.1), ctx.cfg.grid_max.unwrap_or(4.0), ctx.cfg.points.unwrap_or(12));
    let mut out = Outcome::new("kernel");
    let mut table = Table::new(&["m", "eps_tilde", "eps", "q", "term1", "term2", "term3", "box_limit"]);
    for &m in &ms {
        let k = match m {
            Exponent::Finite(k) => k,
            Exponent::Infinite => {
                out.failures.push(failure(m, None, "kernel", "the kernel grows like m² and has no box limit"));
                continue;
            }
        };
        for (i, &e) in eps.iter().enumerate() {
            for &et in &eps[i + 1..] {
                let q = kernel_q(et, e, m)?;
                let [t1, t2, t3] = q.terms;
                let b = kernel_q_box_limit(et, e, k);
                table.push(vec![
                    m.into(),
                    et.into(),
                    e.into(),
                    q.value.into(),
                    t1.into(),
                    t2.into(),
                    t3.into(),
                    b.into(),
                ]);
            }
        }
    }
    out.artifacts.push(Artifact { name: "kernel".into(), table });
    Ok(out)
}

/// Residuals of the third-order density equation and of the
/// integro-differential equation for the pipeline-produced φ_n.
pub fn residual(ctx: &Context) -> Result<Outcome> {
    let ms = ctx.cfg.m_or(&DEFAULT_M);
    let ns = ctx.cfg.n_or(&[0, 4]);
    let mut out = Outcome::new("residual");
    let mut table = Table::new(&[
        "m",
        "n",
        "epsilon",
        "density_residual",
        "integro_residual",
        "integro_tail_bound",
        "integro_probes",
    ]);
    let results = ctx.distributions(&ms, &ns);
    let rows: Vec<(Exponent, usize, Vec<Cell>, Vec<Failure>)> = ctx.install(|| {
        results
            .par_iter()
            .map(|r| {
                let mut fails = Vec::new();
                let st = match &r.state {
                    Ok(st) => st,
                    Err(e) => return (r.m, r.n, Vec::new(), vec![failure(r.m, Some(r.n), "eigen", e.clone())]),
                };
                if r.m == Exponent::Infinite {
                    let msg = "no classical representation: the box-limit distribution is not integrable";
                    return (r.m, r.n, Vec::new(), vec![failure(r.m, Some(r.n), "residual", msg)]);
                }
                let dens = residual_density_ode(st).unwrap_or_else(|e| {
                    fails.push(failure(r.m, Some(r.n), "density_residual", e.to_string()));
                    f64::NAN
                });
                let integro = r
                    .dist
                    .as_ref()
                    .map_err(|e| e.clone())
                    .and_then(|f| phi_from_f(f).map_err(|e| e.to_string()))
                    .and_then(|phi| residual_integro(&phi, st.epsilon, r.m).map_err(|e| e.to_string()));
                let (ir, tail, probes) = match integro {
                    Ok(ir) => (ir.residual, ir.tail_bound, Cell::Int(ir.probes as i64)),
                    Err(e) => {
                        fails.push(failure(r.m, Some(r.n), "integro_residual", e));
                        (f64::NAN, f64::NAN, Cell::Int(0))
                    }
                };
                let row = vec![r.m.into(), r.n.into(), st.epsilon.into(), dens.into(), ir.into(), tail.into(), probes];
                (r.m, r.n, row, fails)
            })
            .collect()
    });
    for (_, _, row, fails) in rows {
        if !row.is_empty() {
            table.push(row);
        }
        out.failures.extend(fails);
    }
    out.artifacts.push(Artifact { name: "residuals".into(), table });
    Ok(out)
}
