use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use toric_bath_cli::{run, Invocation};

/// Toric-code memory coupled to a bosonic bath: numerical experiments.
#[derive(Debug, Parser)]
#[command(name = "toric-bath", version)]
struct Args {
    /// One of: sum-scan, kernel, mu-scan, oracle-displacement, oracle-density,
    /// chi, moments, meanfield, simulate, hinder, decode-test, energy.
    experiment: String,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let inv = Invocation {
        experiment: args.experiment,
        config: args.config,
        out: args.out,
        seed: args.seed,
    };
    match run(&inv) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('"', "'");
            eprintln!("error kind={} msg=\"{msg}\"", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
