use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rmrk_bench::acceptance::{run_suite, Suite};
use rmrk_bench::config::{load_config, parse_instance_spec};
use rmrk_bench::runner::{execute, export_instance};
use rmrk_bench::BenchError;

/// Benchmarks for alternating conditional-gradient / proximal solvers on
/// low-rank plus sparse decompositions.
#[derive(Parser)]
#[command(name = "rmrk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write trace and summary CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Repeats solved in parallel.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// Generate one instance and write it as Matrix Market files.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an acceptance suite: oracles, rates, table2, comparative or all.
    Acceptance { suite: String },
}

/// `RMRK_SEED`, when set, replaces the seeds in every config.
fn seed_override() -> Result<Option<u64>, BenchError> {
    match std::env::var("RMRK_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| BenchError::parse("RMRK_SEED", format!("`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn run(command: Command) -> Result<ExitCode, BenchError> {
    match command {
        Command::Run { config, jobs } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed_override()? {
                cfg = cfg.with_seed(seed);
            }
            let report = execute(&cfg, jobs as usize)?;
            for path in report.trace_paths.iter().chain([&report.summary_path]) {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { spec, out } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| BenchError::io(&spec, e))?;
            let mut spec = parse_instance_spec(&text, &spec.display().to_string())?;
            if let Some(seed) = seed_override()? {
                spec.seed = seed;
            }
            let inst = rmrk_core::datagen::generate(&spec)?;
            for path in export_instance(&inst, &out)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Acceptance { suite } => {
            let Some(suite) = Suite::from_name(&suite) else {
                eprintln!("unknown suite `{suite}`");
                eprintln!("usage: rmrk acceptance <{}>", Suite::NAMES.join("|"));
                return Ok(ExitCode::from(2));
            };
            let outcomes = run_suite(suite, &mut std::io::stdout());
            Ok(if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
