use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use katsim_cli::{run, validate, CliError, Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "katsim", version, about = "Kerr-cat MS gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV plus manifest.json.
    Run {
        config: PathBuf,
        /// Worker threads (default: config, then KATSIM_THREADS, then 1).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (default: config output_dir, then the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integrator tolerance, in [1e-12, 1e-6].
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check a config and print the resolved physical values.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, workers, out, tol } => ScenarioConfig::load(&config).and_then(|c| {
            let report = run(&c, &Overrides { workers, out, tol })?;
            println!("{}", report.csv.display());
            println!("{}", report.manifest.display());
            Ok(())
        }),
        Command::Validate { config } => ScenarioConfig::load(&config).and_then(|c| {
            for line in validate(&c)? {
                println!("{line}");
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(d) = e.detail() {
        eprintln!("  at {d}");
    }
    ExitCode::from(e.exit_code())
}
