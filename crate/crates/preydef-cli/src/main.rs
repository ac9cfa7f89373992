//! `preydef` command-line front end.
//!
//! Every analysis takes a run configuration assembled from an optional
//! config file plus `--set section.key=value` overrides (overrides win).
//! Structured reports print as JSON on stdout; bulk numerics (trajectories,
//! sweep diagrams, basin grids) print as CSV to `--output` or stdout.
//!
//! Exit codes: 0 success, 1 input/validation error, 2 numerical failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use preydef::basin::{bistability_report, compute_basin};
use preydef::bifurcation::{
    diagram_export, fold_points, find_hopf_points, stability_changes, sweep, transcritical_point,
    BifurcationError, CriticalPoint,
};
use preydef::config::{ConfigDoc, RunConfig, DEFAULT_GRID};
use preydef::dynamics::{integrate, IntegrateError};
use preydef::equilibria::all_equilibria;
use preydef::model::{ParamName, State};
use preydef::stability::classify;

#[derive(Parser)]
#[command(
    name = "preydef",
    version,
    about = "Equilibria, stability, trajectories, bifurcation sweeps, and basins of a predator-prey model with an additive Allee effect and prey group defense",
    after_help = "Precedence: --set overrides beat config-file values, which beat built-in defaults.\n\
                  Config format: `key = value` lines under [model], [integrator], [sweep], [grid]; `#` comments."
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run-configuration file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one config value, e.g. --set model.c=0.4 (repeatable)
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,

    /// Output file for CSV-producing commands ("-" or absent = stdout)
    #[arg(short, long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the fixed-point set with existence rationales (JSON)
    Equilibria,
    /// Print eigenvalues and classification of every fixed point (JSON)
    Stability,
    /// Integrate one trajectory and write `t,N,P` CSV
    Simulate {
        /// Initial prey density
        #[arg(long, default_value_t = 0.5)]
        n0: f64,
        /// Initial predator density
        #[arg(long, default_value_t = 0.3)]
        p0: f64,
    },
    /// Walk the [sweep] parameter across its range and write the diagram CSV
    Sweep,
    /// Locate critical parameter values for the [sweep] axis (JSON)
    Critical,
    /// Classify the attractor reached from every [grid] cell and write CSV
    Basin,
}

enum CliError {
    /// Bad input: config, flags, ranges. Exit 1.
    Validation(String),
    /// Failure while computing or writing. Exit 2.
    Runtime(String),
}

impl From<preydef::config::ConfigError> for CliError {
    fn from(e: preydef::config::ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o failure: {e}"))
    }
}

impl From<BifurcationError> for CliError {
    fn from(e: BifurcationError) -> Self {
        match e {
            BifurcationError::InvalidRange(_) | BifurcationError::UnsupportedParam(_) => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut doc = ConfigDoc::parse(&text)?;
    for assignment in &common.sets {
        doc.set_assignment(assignment)?;
    }
    let cfg = RunConfig::from_doc(&doc)?;
    for warning in cfg.params.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(cfg)
}

/// Write through `--output`, or stdout when absent or `-`.
fn emit<F>(output: &Option<PathBuf>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match output {
        Some(path) if path.as_os_str() != "-" => {
            let mut file = fs::File::create(path)?;
            write(&mut file)?;
            file.flush()?;
        }
        _ => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(output: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failure: {e}")))?;
    emit(output, |out| writeln!(out, "{text}"))
}

fn require_sweep(cfg: &RunConfig) -> Result<preydef::config::SweepSpec, CliError> {
    cfg.sweep.ok_or_else(|| {
        CliError::Validation(
            "this command needs a [sweep] section (param, lo, hi) in the config".to_string(),
        )
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_config(&cli.common)?;

    match cli.command {
        Command::Equilibria => {
            let report = all_equilibria(&cfg.params);
            print_json(&cli.common.output, &report)
        }
        Command::Stability => {
            let report = all_equilibria(&cfg.params);
            let classified: Vec<_> = report
                .equilibria
                .iter()
                .map(|e| classify(&cfg.params, e))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            print_json(&cli.common.output, &classified)
        }
        Command::Simulate { n0, p0 } => {
            cfg.initial = State::new(n0, p0)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let traj = integrate(&cfg.params, cfg.initial, &cfg.integrator)?;
            eprintln!(
                "accepted {} steps, rejected {}",
                traj.accepted_steps, traj.rejected_steps
            );
            emit(&cli.common.output, |out| traj.write_csv(out))
        }
        Command::Sweep => {
            let spec = require_sweep(&cfg)?;
            let records = sweep(
                &cfg.params,
                spec.param,
                spec.lo,
                spec.hi,
                spec.steps,
                spec.probe,
                &cfg.integrator,
            )?;
            let detected = stability_changes(&records);
            emit(&cli.common.output, |out| diagram_export(&records, &detected, out))
        }
        Command::Critical => {
            let spec = require_sweep(&cfg)?;
            let mut points: Vec<CriticalPoint> = Vec::new();
            if matches!(spec.param, ParamName::C | ParamName::B) {
                match transcritical_point(&cfg.params, spec.param) {
                    Ok(cp) => points.push(cp),
                    Err(e) => eprintln!("note: no transcritical threshold: {e}"),
                }
                points.extend(find_hopf_points(
                    &cfg.params,
                    spec.param,
                    spec.lo,
                    spec.hi,
                    64,
                ));
            }
            points.extend(fold_points(&cfg.params, spec.param));
            points.sort_by(|a, b| a.value.total_cmp(&b.value));
            print_json(&cli.common.output, &points)
        }
        Command::Basin => {
            let grid_spec = cfg.grid.unwrap_or(DEFAULT_GRID);
            let grid = compute_basin(
                &cfg.params,
                (grid_spec.n_lo, grid_spec.n_hi),
                (grid_spec.p_lo, grid_spec.p_hi),
                (grid_spec.n_res, grid_spec.p_res),
                &cfg.integrator,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?;
            let report = bistability_report(&grid);
            for (key, count, share) in &report.attractors {
                eprintln!("{key}: {count} cells ({:.1}%)", share * 100.0);
            }
            eprintln!("boundary cells: {}", report.boundary_cells.len());
            emit(&cli.common.output, |out| grid.write_csv(out))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
