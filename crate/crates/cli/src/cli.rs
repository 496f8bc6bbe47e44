//! Argument parsing and the top-level run loop.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Context};
use crate::config::{parse_exponents, parse_indices, FileConfig, Overrides, RunConfig, WORKERS_ENV};
use crate::error::{CliError, Result};
use crate::figures::figure;
use crate::manifest::{self, Outcome};
use crate::validate::validate;

#[derive(Debug, Parser)]
#[command(name = "classrep", version, about = "Quantum states of |x|^(2m) wells and their classical energy ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file; flags given here override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Exponents, e.g. "1,2,5..8,inf".
    #[arg(long, global = true)]
    pub m: Option<String>,

    /// State indices, e.g. "0,4" or "0..6".
    #[arg(long, global = true)]
    pub n: Option<String>,

    /// Lower end of the energy grid.
    #[arg(long, global = true)]
    pub grid_min: Option<f64>,

    /// Upper end of the energy grid, or the half-width of x grids.
    #[arg(long, global = true)]
    pub grid_max: Option<f64>,

    /// Number of grid points.
    #[arg(long, global = true)]
    pub points: Option<usize>,

    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; overrides CLASSREP_WORKERS.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// strict, standard or relaxed.
    #[arg(long, global = true)]
    pub tolerance_profile: Option<String>,

    /// Recompute and compare with the stored manifest instead of writing.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, WKB estimates and density grids.
    Eigen,
    /// WKB levels at orders 0 and 2.
    Wkb,
    /// Densities with three derivatives.
    Density,
    /// Energy distributions, cumulative, scaled and tail forms.
    Distribution,
    /// The kernel Q on an energy grid.
    Kernel,
    /// Residuals of the density and integro equations.
    Residual,
    /// Run the invariant suite and write a report.
    Validate {
        /// Shift added to ε before the density-equation residual.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb_epsilon: f64,
    },
    /// Data behind one of figures 1 to 11.
    Figure { number: u32 },
}

impl Cli {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            m: self.m.as_deref().map(parse_exponents).transpose()?,
            n: self.n.as_deref().map(parse_indices).transpose()?,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            points: self.points,
            format: self.format.as_deref().map(str::parse).transpose()?,
            out: self.out.clone(),
            workers: self.workers,
            tolerance_profile: self.tolerance_profile.as_deref().map(str::parse).transpose()?,
        })
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let file = self.config.as_deref().map(FileConfig::load).transpose()?;
        RunConfig::resolve(file, std::env::var(WORKERS_ENV).ok(), self.overrides()?)
    }
}

/// Computes the outcome of `command` without touching the disk.
pub fn compute(ctx: &Context, command: &Command) -> Result<Outcome> {
    match command {
        Command::Eigen => commands::eigen(ctx),
        Command::Wkb => commands::wkb(ctx),
        Command::Density => commands::density(ctx),
        Command::Distribution => commands::distribution(ctx),
        Command::Kernel => commands::kernel(ctx),
        Command::Residual => commands::residual(ctx),
        Command::Validate { perturb_epsilon } => Ok(validate(ctx, *perturb_epsilon)),
        Command::Figure { number } => figure(ctx, *number),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = cli.resolve()?;
    let ctx = Context::new(cfg)?;
    let outcome = compute(&ctx, &cli.command)?;
    let cfg = &ctx.cfg;

    if cli.verify {
        let problems = manifest::verify(&cfg.out, &outcome.label, Some((&outcome, cfg)))?;
        if !problems.is_empty() {
            for p in &problems {
                eprintln!("{p}");
            }
            return Err(CliError::Validation(format!("{} mismatches against the manifest", problems.len())));
        }
        println!("verified {}", manifest::manifest_path(&cfg.out, &outcome.label).display());
    } else {
        let m = manifest::persist(&outcome, cfg)?;
        println!("wrote {} files and {}", m.files.len(), manifest::manifest_path(&cfg.out, &outcome.label).display());
    }

    for f in &outcome.failures {
        let n = f.n.map(|n| format!(" n={n}")).unwrap_or_default();
        let tag = if f.expected { "expected failure" } else { "failure" };
        eprintln!("{tag}: m={}{n} [{}] {}", f.m, f.stage, f.message);
    }
    let violations: Vec<_> = outcome.checks.iter().filter(|c| c.is_violation()).collect();
    if !violations.is_empty() {
        let names: Vec<&str> = violations.iter().map(|c| c.name.as_str()).collect();
        return Err(CliError::Validation(format!("{} checks failed: {}", names.len(), names.join(", "))));
    }
    match outcome.unexpected_failures() {
        0 => Ok(()),
        k => Err(CliError::Failures(k)),
    }
}
