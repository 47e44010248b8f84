use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use biz::rng::derive_seed;
use biz::{estimate_pcs_with, run_continuous_biz, run_replications_with, sweep_delta_with, CiMethod};
use biz_cli::error::{AppError, AppResult};
use biz_cli::experiment::{parse_experiment, resolve, Action, ExperimentKind, Resolved};
use biz_cli::figures::{self, Figure};
use biz_cli::output::{emit_csv, SweepRow};

/// Sequential ranking-and-selection experiments with the BIZ procedure.
#[derive(Parser)]
#[command(name = "biz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a `single` experiment file (one problem, one δ).
    Run {
        file: PathBuf,
        /// Use Wilson score intervals instead of the normal approximation.
        #[arg(long)]
        wilson: bool,
    },
    /// Execute a `sweep` experiment file (PCS across a δ grid).
    Sweep {
        file: PathBuf,
        #[arg(long)]
        wilson: bool,
    },
    /// Reproduce one of the built-in slippage figures.
    Figure {
        which: FigureArg,
        /// k = 100 and 10⁴ replications (slow at the small-δ end).
        #[arg(long)]
        paper_scale: bool,
        /// Override the replication count.
        #[arg(long)]
        reps: Option<u64>,
        /// Override the number of alternatives.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output CSV path (default figure_<which>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        wilson: bool,
    },
    /// Execute a `continuous` experiment file (Brownian oracle runs).
    Oracle {
        file: PathBuf,
        #[arg(long)]
        wilson: bool,
    },
    /// Parse and validate an experiment file without running it.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    A,
    B,
    C,
}

impl From<FigureArg> for Figure {
    fn from(arg: FigureArg) -> Figure {
        match arg {
            FigureArg::A => Figure::A,
            FigureArg::B => Figure::B,
            FigureArg::C => Figure::C,
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("biz: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn ci_method(wilson: bool) -> CiMethod {
    if wilson {
        CiMethod::Wilson
    } else {
        CiMethod::NormalApprox
    }
}

fn dispatch(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Run { file, wilson } => {
            let resolved = load(&file)?;
            match &resolved.action {
                Action::Single { .. } => execute(&resolved, ci_method(wilson)),
                _ => Err(AppError::Validation(format!(
                    "`run` expects a `single` experiment; use the matching subcommand for `{}`",
                    action_kind(&resolved.action)
                ))),
            }
        }
        Command::Sweep { file, wilson } => {
            let resolved = load(&file)?;
            match &resolved.action {
                Action::Sweep { .. } | Action::Figure { .. } => {
                    execute(&resolved, ci_method(wilson))
                }
                _ => Err(AppError::Validation(format!(
                    "`sweep` expects a `sweep` or figure experiment, got `{}`",
                    action_kind(&resolved.action)
                ))),
            }
        }
        Command::Oracle { file, wilson } => {
            let resolved = load(&file)?;
            match &resolved.action {
                Action::Continuous { .. } => execute(&resolved, ci_method(wilson)),
                _ => Err(AppError::Validation(format!(
                    "`oracle` expects a `continuous` experiment, got `{}`",
                    action_kind(&resolved.action)
                ))),
            }
        }
        Command::Figure {
            which,
            paper_scale,
            reps,
            k,
            seed,
            out,
            wilson,
        } => {
            let which: Figure = which.into();
            let k = k.unwrap_or(if paper_scale {
                figures::PAPER_K
            } else {
                figures::DESK_K
            });
            let reps = reps.unwrap_or(if paper_scale {
                figures::PAPER_REPS
            } else {
                figures::DESK_REPS
            });
            let out = out.unwrap_or_else(|| PathBuf::from(format!("figure_{}.csv", which.name())));
            let rows = figures::run_figure(which, k, reps, seed, ci_method(wilson))?;
            emit_csv(&rows, &out)?;
            println!("wrote {} ({} rows)", out.display(), rows.len());
            Ok(())
        }
        Command::Validate { file } => {
            let resolved = load(&file)?;
            println!(
                "ok: {} experiment, reps={}, seed={}, output={}",
                action_kind(&resolved.action),
                resolved.reps,
                resolved.seed,
                resolved.output.display()
            );
            Ok(())
        }
    }
}

fn action_kind(action: &Action) -> &'static str {
    match action {
        Action::Single { .. } => ExperimentKind::Single.name(),
        Action::Sweep { .. } => ExperimentKind::Sweep.name(),
        Action::Figure { which, .. } => match which {
            Figure::A => ExperimentKind::FigureA.name(),
            Figure::B => ExperimentKind::FigureB.name(),
            Figure::C => ExperimentKind::FigureC.name(),
        },
        Action::Continuous { .. } => ExperimentKind::Continuous.name(),
    }
}

fn load(path: &Path) -> AppResult<Resolved> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Runtime(format!("reading {}: {e}", path.display())))?;
    let file = parse_experiment(&text)?;
    resolve(&file)
}

/// Run a resolved experiment and emit its CSV.
fn execute(resolved: &Resolved, ci: CiMethod) -> AppResult<()> {
    let rows = match &resolved.action {
        Action::Single { config, params } => {
            let result = estimate_pcs_with(config, params, resolved.reps, resolved.seed, ci)?;
            vec![SweepRow {
                delta: params.delta,
                result,
                seed: resolved.seed,
            }]
        }
        Action::Sweep {
            template,
            grid,
            params,
        } => sweep_delta_with(
            |d| template.config_for(d),
            grid,
            params,
            resolved.reps,
            resolved.seed,
            ci,
        )?
        .into_iter()
        .enumerate()
        .map(|(j, (delta, result))| SweepRow {
            delta,
            result,
            seed: derive_seed(resolved.seed, j as u64),
        })
        .collect(),
        Action::Figure { which, k } => figures::run_figure(
            *which,
            k.unwrap_or(figures::DESK_K),
            resolved.reps,
            resolved.seed,
            ci,
        )?,
        Action::Continuous { cfg } => {
            let result = run_replications_with(
                |rng| run_continuous_biz(cfg, rng),
                resolved.reps,
                resolved.seed,
                ci,
            )?;
            vec![SweepRow {
                delta: 0.0,
                result,
                seed: resolved.seed,
            }]
        }
    };
    emit_csv(&rows, &resolved.output)?;
    println!("wrote {} ({} rows)", resolved.output.display(), rows.len());
    Ok(())
}
