use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spindrive::scenario::{emit_csv, parse_scenario, run_scenario, summary};
use spindrive::Error;

#[derive(Parser)]
#[command(name = "spindrive", version, about = "Driven spin-chain scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSV output.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Master seed for the noise streams.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies the drive frequency (and amplitude, keeping 4g/ω).
        #[arg(long = "omega-scale")]
        omega_scale: Option<f64>,
    },
}

const EXIT_PARSE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            omega_scale,
        } => run(&scenario, &out, seed, omega_scale),
    }
}

fn run(path: &Path, out: &Path, seed: Option<u64>, omega_scale: Option<f64>) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let mut scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    if let Some(seed) = seed {
        scenario.set_seed(seed);
    }
    if let Some(k) = omega_scale {
        if let Err(e) = scenario.scale_omega(k) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    }
    let records = match run_scenario(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    print!("{}:\n{}", scenario.name, summary(&records));
    match emit_csv(&scenario, &records, out) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::Run { source, .. } => exit_code(source),
        _ => EXIT_NUMERICAL,
    }
}
