use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stcsim_core::error::Error;
use stcsim_core::simlab::{
    bundled_experiment, bundled_experiments, emit_csv, load_spec, parse_spec, run_experiment, verify_suite,
    ExperimentSpec,
};

#[derive(Parser)]
#[command(name = "stcsim", version, about = "Stacked OSTBC rate, conditioning and BER experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment spec and write its CSV table.
    Run {
        /// Spec file, or the name of a bundled experiment.
        spec: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Channel realizations per SNR point.
        #[arg(long)]
        trials: Option<usize>,
        /// CSV destination; `-` writes to stdout. Defaults to the spec's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the bundled experiment specs.
    ListExperiments,
    /// Run the fast invariant suite.
    Verify,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Parse { .. } => 3,
        _ => 1,
    }
}

fn load(spec: &str) -> Result<ExperimentSpec, Error> {
    let path = PathBuf::from(spec);
    if !path.exists() {
        if let Some(text) = bundled_experiment(spec) {
            return parse_spec(text);
        }
    }
    load_spec(&path)
}

fn run(spec: &str, seed: Option<u64>, trials: Option<usize>, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), Error> {
    let mut spec = load(spec)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(t) = trials {
        spec.trials = t;
    }
    if out.is_some() {
        spec.out = out;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let table = pool.install(|| run_experiment(&spec))?;
    match spec.out.as_deref() {
        Some(p) if p.as_os_str() != "-" => {
            emit_csv(&table, p)?;
            eprintln!("{}: {} rows written to {}", spec.name, table.len(), p.display());
        }
        _ => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { spec, seed, trials, out, threads } => run(&spec, seed, trials, out, threads),
        Command::ListExperiments => {
            for (name, text) in bundled_experiments() {
                let about = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:<24} {about}");
            }
            Ok(())
        }
        Command::Verify => {
            let checks = verify_suite();
            for c in &checks {
                println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::from(1);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
