use std::process::ExitCode;

use casimir_duomode_cli::commands::{cmd_eigen, cmd_evolve, cmd_map, cmd_pdf, cmd_validate};
use casimir_duomode_cli::config::{Overrides, Settings};
use casimir_duomode_cli::figures::figure;
use casimir_duomode_cli::table::{write_artifact, Artifact};
use casimir_duomode_cli::{CliError, CliResult};
use clap::{Parser, Subcommand};

/// Photon generation in two resonantly coupled cavity modes.
///
/// Settings come from built-in defaults, then `--config FILE`, then flags.
/// Times are slow times τ = εt/2.
#[derive(Parser)]
#[command(name = "casimir-duomode", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, a/b/c and regime of the slow-amplitude matrix.
    Eigen,
    /// Energies, uncertainty products, purities and squeezing over [0, tau-max].
    Evolve,
    /// Photon distribution of one mode at slow time --tau.
    Pdf,
    /// Generation regions over a detuning grid.
    Map,
    /// Runs the acceptance checks; exit status 1 if any fails.
    Validate,
    /// Regenerates the dataset of a published figure (1 to 5).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        number: u8,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("CASIMIR_DUOMODE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("CASIMIR_DUOMODE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn emit(settings: &Settings, artifact: &Artifact) -> CliResult<()> {
    for path in write_artifact(&settings.run.output_dir, settings.run.format, artifact)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    let settings = Settings::resolve(&cli.overrides.with_config_file()?)?;
    match cli.command {
        Command::Eigen => print!("{}", cmd_eigen(&settings)?),
        Command::Evolve => {
            let evolution = cmd_evolve(&settings)?;
            if let Some(d) = evolution.max_energy_discrepancy {
                println!("max relative energy discrepancy (analytic vs oracle): {d:.3e}");
            }
            emit(&settings, &evolution.artifact)?;
        }
        Command::Pdf => emit(&settings, &cmd_pdf(&settings)?)?,
        Command::Map => emit(&settings, &cmd_map(&settings)?)?,
        Command::Figure { number } => emit(&settings, &figure(number)?)?,
        Command::Validate => {
            let outcomes = cmd_validate(&settings)?;
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed: Vec<String> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| format!("criterion {:02} ({})", o.id, o.title))
                .collect();
            println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
            if !failed.is_empty() {
                return Err(CliError::ValidationFailed(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
