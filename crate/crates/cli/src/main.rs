use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inertial_cli::{commands, CliError, CliResult, ExperimentConfig};

/// Inertial gradient method experiments.
///
/// Exit codes: 0 on success, 1 when a run or check fails, 2 on configuration errors.
#[derive(Parser)]
#[command(name = "inertial", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `[run] output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Sweep worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Seed for randomized start points (overrides `[run] seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Also write a matplotlib script next to the CSV output.
    #[arg(long, global = true)]
    plot_stub: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with monitors: trajectory.csv, report.json, config.toml.
    Run,
    /// Grid over [sweep] lists: summary.csv.
    Sweep,
    /// Rate envelope checks: rates.json.
    Rates,
    /// Discrete vs continuous comparison over the s-ladder: ode_compare.csv.
    OdeCompare,
    /// Print the objective corpus.
    ListObjectives,
    /// Finite-difference gradient and Lipschitz checks (all objectives, or the
    /// configured one when --config is given).
    CheckGradients,
}

fn load(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> CliResult<bool> {
    if let Command::ListObjectives = cli.command {
        print!("{}", commands::list_objectives());
        return Ok(true);
    }
    let cfg = load(cli)?;
    let out = cfg.output_dir(cli.out.as_deref());
    match cli.command {
        Command::Run => commands::cmd_run(&cfg, &out, cli.plot_stub),
        Command::Sweep => commands::cmd_sweep(&cfg, &out, cli.workers, cli.plot_stub),
        Command::Rates => commands::cmd_rates(&cfg, &out),
        Command::OdeCompare => commands::cmd_ode(&cfg, &out, cli.plot_stub),
        Command::CheckGradients => {
            let only = cli.config.is_some().then(|| cfg.objective()).transpose()?;
            let (text, ok) = commands::check_gradients(only.as_ref(), cfg.run.seed)?;
            print!("{text}");
            Ok(ok)
        }
        Command::ListObjectives => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("inertial: finished with failing checks (see the reports)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("inertial: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
