//! Data behind figures 1 to 11: densities, level curves and energy
//! distributions. Only numbers are produced; plotting is left to the reader.

use classrep::eigen::{analytic_box, density_derivatives, turning_point, EigenSolution};
use classrep::ensemble::{cumulative, limit_nodes, nodes, scaled_distribution};
use classrep::wkb::{wkb0, wkb2, wkb_limits};
use classrep::Exponent;

use crate::commands::{distribution_summary, state_summary, Context, StateResult};
use crate::error::{CliError, Result};
use crate::manifest::{Artifact, Failure, Outcome};
use crate::output::{Cell, Table};

const FIG_LEVEL_M: [u32; 16] = [1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 15, 20, 30, 50, 70, 100];

fn finite(ms: &[u32]) -> Vec<Exponent> {
    ms.iter().map(|&m| Exponent::Finite(m)).collect()
}

pub fn figure(ctx: &Context, k: u32) -> Result<Outcome> {
    let mut out = Outcome::new(format!("figure{k}"));
    match k {
        1 => densities(ctx, &mut out, 0, 1.8),
        2 => levels(ctx, &mut out, 0),
        3 => densities(ctx, &mut out, 4, 3.5),
        4 => levels(ctx, &mut out, 4),
        5 => distributions(ctx, &mut out, &[1, 2, 3, 5, 10, 100], 0, Column::F),
        6 => distributions(ctx, &mut out, &[1, 2, 3, 5, 10, 100], 0, Column::Cumulative),
        7 => distributions(ctx, &mut out, &[1, 2], 4, Column::F),
        8 => distributions(ctx, &mut out, &[5], 4, Column::F),
        9 => distributions(ctx, &mut out, &[1, 2, 3, 5, 10, 20, 50, 100], 4, Column::Cumulative),
        10 => distributions(ctx, &mut out, &[5, 100], 4, Column::Scaled),
        11 => distributions(ctx, &mut out, &[100], 4, Column::Tail),
        _ => return Err(CliError::Config(format!("figure {k} does not exist (1 to 11)"))),
    }?;
    Ok(out)
}

fn failure(m: Exponent, n: usize, stage: &str, message: String) -> Failure {
    Failure { m: m.to_string(), n: Some(n), stage: stage.into(), expected: m == Exponent::Infinite, message }
}

fn solved_state(ctx: &Context, ms: &[Exponent], n: usize, out: &mut Outcome) -> Vec<EigenSolution> {
    let mut states = Vec::new();
    for (m, s) in ctx.solve_all(ms, n) {
        match s {
            Ok(mut s) => states.push(s.swap_remove(n)),
            Err(e) => out.failures.push(failure(m, n, "eigen", e.to_string())),
        }
    }
    states
}

/// ρ_n(x) for several m including the box, with the turning-point values.
fn densities(ctx: &Context, out: &mut Outcome, n: usize, width: f64) -> Result<()> {
    let mut defaults = finite(&[1, 2, 3, 5, 10, 100]);
    defaults.push(Exponent::Infinite);
    let ms = ctx.cfg.m_or(&defaults);
    let width = ctx.cfg.grid_max.unwrap_or(width);
    let points = ctx.cfg.points.unwrap_or(361);
    let mut curve = Table::new(&["m", "x", "rho"]);
    let mut marks = Table::new(&["m", "x_tp", "rho_tp"]);
    for st in solved_state(ctx, &ms, n, out) {
        let rho = |x: f64| -> classrep::Result<f64> {
            // beyond the sampled support ψ has decayed below double precision
            if x.abs() > st.support() {
                return Ok(0.0);
            }
            Ok(density_derivatives(&st, x)?.rho)
        };
        for i in 0..points {
            let x = -width + 2.0 * width * i as f64 / (points - 1) as f64;
            curve.push(vec![st.m.into(), x.into(), rho(x)?.into()]);
        }
        let xt = turning_point(st.epsilon, st.m);
        let at = if st.m == Exponent::Infinite { 0.0 } else { rho(xt)? };
        marks.push(vec![st.m.into(), xt.into(), at.into()]);
    }
    out.artifacts.push(Artifact { name: out.label.clone(), table: curve });
    out.artifacts.push(Artifact { name: format!("{}_turning_points", out.label), table: marks });
    Ok(())
}

/// ε_n(m) against both WKB orders and their large-m asymptotes.
fn levels(ctx: &Context, out: &mut Outcome, n: usize) -> Result<()> {
    let ms = ctx.cfg.m_or(&finite(&FIG_LEVEL_M));
    let mut table = Table::new(&["m", "exact", "wkb0", "wkb2", "wkb2_asymptote"]);
    for st in solved_state(ctx, &ms, n, out) {
        let Exponent::Finite(m) = st.m else {
            continue;
        };
        let (_, l2) = wkb_limits(n, m as f64);
        table.push(vec![
            st.m.into(),
            st.epsilon.into(),
            wkb0(n, m)?.epsilon.into(),
            wkb2(n, m)?.epsilon.into(),
            l2.into(),
        ]);
        out.summary.push(state_summary(&st));
    }
    let mut limits = Table::new(&["n", "box", "wkb0_limit"]);
    limits.push(vec![n.into(), analytic_box(n).epsilon.into(), wkb_limits(n, f64::INFINITY).0.into()]);
    out.artifacts.push(Artifact { name: out.label.clone(), table });
    out.artifacts.push(Artifact { name: format!("{}_asymptotes", out.label), table: limits });
    Ok(())
}

#[derive(Clone, Copy)]
enum Column {
    F,
    Cumulative,
    Scaled,
    Tail,
}

fn distributions(ctx: &Context, out: &mut Outcome, default_m: &[u32], n: usize, col: Column) -> Result<()> {
    let ms = ctx.cfg.m_or(&finite(default_m));
    let mut table = match col {
        Column::F => Table::new(&["m", "eps", "f"]),
        Column::Cumulative => Table::new(&["m", "eps", "cumulative"]),
        Column::Scaled => Table::new(&["m", "s", "scaled_f"]),
        Column::Tail => Table::new(&["m", "eps", "f", "eps_f"]),
    };
    let mut node_table = Table::new(&["m", "k", "eps", "s"]);
    for StateResult { m, n, state, dist } in ctx.distributions(&ms, &[n]) {
        let (st, f) = match (state, dist) {
            (Ok(st), Ok(f)) => (st, f),
            (Err(e), _) => {
                out.failures.push(failure(m, n, "eigen", e));
                continue;
            }
            (_, Err(e)) => {
                out.failures.push(failure(m, n, "distribution", e));
                continue;
            }
        };
        match col {
            Column::F => {
                for (e, v) in f.eps_grid.iter().zip(&f.f) {
                    table.push(vec![m.into(), (*e).into(), (*v).into()]);
                }
            }
            Column::Cumulative => {
                let cum = cumulative(&f)?;
                for (e, c) in cum.eps_grid.iter().zip(&cum.values) {
                    table.push(vec![m.into(), (*e).into(), (*c).into()]);
                }
            }
            Column::Scaled => {
                for p in scaled_distribution(&f) {
                    table.push(vec![m.into(), p.s.into(), p.value.into()]);
                }
            }
            Column::Tail => {
                for (e, v) in f.eps_grid.iter().zip(&f.f) {
                    table.push(vec![m.into(), (*e).into(), (*v).into(), (e * v).into()]);
                }
            }
        }
        let inv = 0.5 / f.m_value() as f64;
        for (k, e) in nodes(&f).into_iter().enumerate() {
            node_table.push(vec![m.into(), (k + 1).into(), e.into(), e.powf(inv).into()]);
        }
        out.summary.push(distribution_summary(&st, &f));
    }
    out.artifacts.push(Artifact { name: out.label.clone(), table });
    if n > 0 {
        out.artifacts.push(Artifact { name: format!("{}_nodes", out.label), table: node_table });
    }
    if let Column::Scaled = col {
        let mut limit = Table::new(&["k", "s"]);
        for (k, s) in limit_nodes(n).into_iter().enumerate() {
            limit.push(vec![Cell::from(k + 1), s.into()]);
        }
        out.artifacts.push(Artifact { name: format!("{}_limit_nodes", out.label), table: limit });
    }
    Ok(())
}
