//! Command-line front end of the `svir` binary.
//!
//! Exit codes: 0 on success, 2 for usage, configuration or validation
//! errors, 3 for numerical failures, 1 for I/O errors.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::model::{disease_free_equilibrium, endemic_equilibrium, r0_continuous, SvirState};
use crate::scenarios::{cost_table, run_strategy, sweep, Strategy, SweepParam};

use config::ExperimentConfig;
use output::{write_json, CostReport};

pub const OUTPUT_DIR_ENV: &str = "SVIR_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(
    name = "svir",
    version,
    about = "Optimal social-distancing and vaccination control of an SVIR epidemic"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Experiment config (JSON)
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in experiment: baseline, baseline-exp or endemic
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Output directory; overrides $SVIR_OUTPUT_DIR and the config
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the resolved config as canonical JSON and exit
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one strategy and write its trajectory and costs
    Simulate {
        #[command(flatten)]
        source: Source,
        /// none, vax, full or optimal (default: config, then optimal)
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Cost table of all four strategies
    Table {
        #[command(flatten)]
        source: Source,
    },
    /// Re-solve the optimal problem over a list of parameter values
    Sweep {
        #[command(flatten)]
        source: Source,
        /// c1, c2, b, k, u0_max or u1_max
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Option<Vec<f64>>,
    },
    /// Reproduction number and equilibria of the uncontrolled model
    Analyze {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(Error),
    Numerical(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(..) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) | CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "cannot write {}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e)
        }
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(source: &Source) -> CliResult<ExperimentConfig> {
    match (&source.config, &source.preset) {
        (Some(path), _) => Ok(ExperimentConfig::from_file(path)?),
        (None, Some(name)) => Ok(ExperimentConfig::preset(name)?),
        (None, None) => Err(CliError::Config(Error::InvalidParameter {
            field: "config".into(),
            reason: "give --config FILE or --preset NAME".into(),
        })),
    }
}

/// `--out`, then `$SVIR_OUTPUT_DIR`, then the config's `output_dir`, then `out`.
pub fn output_dir(flag: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn run(cli: Cli) -> CliResult<()> {
    let source = match &cli.command {
        Command::Simulate { source, .. }
        | Command::Table { source }
        | Command::Sweep { source, .. }
        | Command::Analyze { source } => source,
    };
    let config = load(source)?;
    if source.print_config {
        emit(&config.to_canonical_json());
        return Ok(());
    }
    let out = output_dir(source.out.as_deref(), &config);
    match &cli.command {
        Command::Simulate { strategy, .. } => {
            let strategy = match strategy {
                Some(s) => s.parse()?,
                None => config.strategy.unwrap_or(Strategy::Optimal),
            };
            cmd_simulate(&config, strategy, &out)
        }
        Command::Table { .. } => cmd_table(&config, &out),
        Command::Sweep { param, values, .. } => {
            let from_config = config.sweep_spec()?;
            let param: SweepParam = match (param, &from_config) {
                (Some(p), _) => p.parse()?,
                (None, Some((p, _))) => *p,
                (None, None) => {
                    return Err(Error::invalid("sweep.param", "no sweep parameter given").into())
                }
            };
            let values = match (values, from_config) {
                (Some(v), _) => v.clone(),
                (None, Some((_, v))) => v,
                (None, None) => Vec::new(),
            };
            cmd_sweep(&config, param, &values, &out)
        }
        Command::Analyze { .. } => cmd_analyze(&config, &out),
    }
}

fn cmd_simulate(config: &ExperimentConfig, strategy: Strategy, out: &Path) -> CliResult<()> {
    let problem = config.problem()?;
    let fbs = config.fbs_config()?;
    let result = run_strategy(strategy, &problem, &fbs)?;

    let path = out.join("trajectory.csv");
    output::write_trajectory_csv(&path, &result.trajectory, &result.controls)
        .map_err(io_at(&path))?;
    let path = out.join("cost.json");
    write_json(&path, &CostReport::from_result(&result)).map_err(io_at(&path))?;

    let c = result.cost;
    println!(
        "{strategy}: total {:.4} (social {:.4}, infection {:.4}, vaccination {:.4})",
        c.total, c.social, c.infection, c.vaccination
    );
    if let Some(r) = &result.fbs {
        println!(
            "sweep: {} iterations, best {}, stopped on {:?}",
            r.iterations_run, r.best_iteration, r.stop_reason
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct TableReport {
    r0: f64,
    rows: Vec<CostReport>,
}

fn cmd_table(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let problem = config.problem()?;
    let fbs = config.fbs_config()?;
    let table = cost_table(&problem, &fbs)?;

    let path = out.join("table.csv");
    output::write_table_csv(&path, &table).map_err(io_at(&path))?;
    let report = TableReport {
        r0: problem.r0(),
        rows: table.rows.iter().map(CostReport::from_result).collect(),
    };
    let path = out.join("table.json");
    write_json(&path, &report).map_err(io_at(&path))?;

    println!(
        "{:<8} {:>10} {:>10} {:>10} {:>12}",
        "strategy", "total", "social", "infection", "vaccination"
    );
    for row in &table.rows {
        let c = row.cost;
        println!(
            "{:<8} {:>10.4} {:>10.4} {:>10.4} {:>12.4}",
            row.strategy.short_name(),
            c.total,
            c.social,
            c.infection,
            c.vaccination
        );
    }
    println!("R0 = {:.6}", problem.r0());
    Ok(())
}

#[derive(Serialize)]
struct SweepEntry {
    value: f64,
    directory: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u1_pinned_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepReport {
    param: &'static str,
    points: Vec<SweepEntry>,
}

#[derive(Serialize)]
struct ErrorReport {
    value: f64,
    error: String,
}

fn cmd_sweep(
    config: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    out: &Path,
) -> CliResult<()> {
    let base = config.problem()?;
    let fbs = config.fbs_config()?;
    if values.is_empty() {
        return Err(Error::invalid("sweep.values", "need at least one value").into());
    }
    for &v in values {
        param.apply(&base, v)?;
    }

    let points = sweep(param, values, &base, &fbs);
    let mut entries = Vec::with_capacity(points.len());
    let mut solved = Vec::new();
    let mut first_failure = None;
    for point in &points {
        let name = format!("{}={}", param.name(), output::fmt_g(point.value));
        let dir = out.join(&name);
        let mut entry = SweepEntry {
            value: point.value,
            directory: name,
            total: None,
            u1_pinned_fraction: None,
            error: None,
        };
        match &point.outcome {
            Ok(report) => {
                let problem = param.apply(&base, point.value)?;
                let cost = CostReport::new(
                    Strategy::Optimal,
                    &report.best_cost,
                    problem.r0(),
                    report.best_trajectory.final_state(),
                    Some(report),
                );
                entry.total = Some(report.best_cost.total);
                entry.u1_pinned_fraction = cost.fbs.as_ref().map(|f| f.u1_pinned_fraction);
                let path = dir.join("cost.json");
                write_json(&path, &cost).map_err(io_at(&path))?;
                solved.push((point.value, &report.best_controls));
            }
            Err(e) => {
                let path = dir.join("error.json");
                let report = ErrorReport {
                    value: point.value,
                    error: e.to_string(),
                };
                write_json(&path, &report).map_err(io_at(&path))?;
                entry.error = Some(e.to_string());
                eprintln!("{}={}: {e}", param.name(), output::fmt_g(point.value));
                first_failure.get_or_insert_with(|| e.clone());
            }
        }
        entries.push(entry);
    }

    let path = out.join("sweep_controls.csv");
    output::write_sweep_controls_csv(&path, &solved).map_err(io_at(&path))?;
    let path = out.join("sweep.json");
    let summary = SweepReport {
        param: param.name(),
        points: entries,
    };
    write_json(&path, &summary).map_err(io_at(&path))?;

    for e in &summary.points {
        match (e.total, e.u1_pinned_fraction) {
            (Some(total), Some(pinned)) => println!(
                "{}={}: total {total:.4}, u1 at bound on {:.1}% of nodes",
                param.name(),
                output::fmt_g(e.value),
                100.0 * pinned
            ),
            _ => println!("{}={}: failed", param.name(), output::fmt_g(e.value)),
        }
    }
    match first_failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Analysis {
    alpha: f64,
    r0: f64,
    disease_free_equilibrium: SvirState,
    endemic_equilibrium: Option<SvirState>,
}

fn cmd_analyze(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let problem = config.problem()?;
    let p = problem.params;
    let analysis = Analysis {
        alpha: p.alpha,
        r0: r0_continuous(&p),
        disease_free_equilibrium: disease_free_equilibrium(&p),
        endemic_equilibrium: endemic_equilibrium(&p)?,
    };
    let path = out.join("analysis.json");
    write_json(&path, &analysis).map_err(io_at(&path))?;
    emit(&serde_json::to_string_pretty(&analysis).expect("analysis serializes"));
    Ok(())
}
