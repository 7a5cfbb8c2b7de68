//! Deterministic stand-in for the scorer worker, speaking the bridge protocol over stdio
//! or TCP. Durations are 0.1 s per character; QE is word overlap scaled to 0..5.

use std::io::{self, BufReader};
use std::process::ExitCode;

use clap::Parser;
use isochrono::bridge::mock::MockWorker;

#[derive(Parser)]
#[command(name = "isochrono-mock-bridge", version)]
struct Args {
    /// Comma-separated supported languages.
    #[arg(long, value_delimiter = ',', default_values_t = ["en", "de", "es", "ru", "zh"].map(String::from))]
    languages: Vec<String>,
    /// Random delay before each response, up to this many milliseconds.
    #[arg(long, default_value_t = 0)]
    max_delay_ms: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report no QE capability and reject qe requests.
    #[arg(long)]
    no_qe: bool,
    /// Serve TCP on this address instead of stdio.
    #[arg(long)]
    listen: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let worker = MockWorker {
        languages: args.languages,
        qe: !args.no_qe,
        max_delay_ms: args.max_delay_ms,
        seed: args.seed,
    };
    let result = match args.listen {
        Some(addr) => worker.listen(&addr).and_then(|(local, handle)| {
            println!("listening on {local}");
            handle.join().map_err(|_| io::Error::other("listener panicked"))
        }),
        None => worker.serve(BufReader::new(io::stdin().lock()), io::stdout()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mock bridge: {e}");
            ExitCode::FAILURE
        }
    }
}
