use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use satqkd_cli::{CliError, Format, SHIPPED, expand, load_scenario, run_scenario, write_output};

/// Key-rate and eavesdropper-monitoring sweeps for satellite QKD links.
#[derive(Parser)]
#[command(name = "satqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write the result table.
    Run {
        scenario: PathBuf,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(short, long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Worker threads (0 lets the runtime choose).
        #[arg(short = 'j', long, default_value_t = 0)]
        threads: usize,
    },
    /// Parse and check a scenario without running it.
    Validate { scenario: PathBuf },
    /// List the figure scenarios shipped in `scenarios/`.
    ListScenarios,
}

fn run(path: &Path, out: Option<&PathBuf>, format: Format, threads: usize) -> Result<(), CliError> {
    let scenario = load_scenario(path)?;
    let table = with_threads(threads, || run_scenario(&scenario))??;
    let text = table.emit(format);
    match out {
        Some(p) => write_output(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    Ok(f())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            out,
            format,
            threads,
        } => run(scenario, out.as_ref(), *format, *threads),
        Command::Validate { scenario } => load_scenario(scenario).and_then(|s| {
            let n = expand(&s)?.len();
            println!("{}: ok, {} mode, {n} points", scenario.display(), s.mode.name());
            Ok(())
        }),
        Command::ListScenarios => {
            for s in SHIPPED {
                println!("{:<26} {}", s.name, s.summary());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("satqkd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
