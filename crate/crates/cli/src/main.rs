use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isochrono::cli::{
    cmd_evaluate, cmd_filter, cmd_validate, synth_reference, CandidateSpec, EvaluateConfig, FilterConfig,
    PredictorSpec, QeSpec, RunError, SynthConfig, ValidateConfig,
};
use isochrono::corpus::LengthSide;
use isochrono::validation::BinStatistic;
use isochrono::{FilterPolicy, FlagPolicy, IcmMode, LanguagePair};

#[derive(Parser)]
#[command(
    name = "isochrono",
    version,
    about = "Isochrony-aware evaluation of translation systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Import and filter a corpus, writing corpus.jsonl and histogram.csv.
    Filter(FilterArgs),
    /// Score every system in a directory and write reports, tables and a ranking.
    Evaluate(EvaluateArgs),
    /// Compare duration predictors against reference durations.
    Validate(ValidateArgs),
    /// Write synthetic reference durations from a known rate model.
    SynthReference(SynthArgs),
}

#[derive(Args)]
struct FilterArgs {
    /// CoVoST-style TSV (.tsv) or corpus JSONL.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 20)]
    min_tokens: usize,
    #[arg(long, default_value_t = 3)]
    min_upvotes: u32,
    #[arg(long, default_value_t = 0)]
    max_downvotes: u32,
    #[arg(long, value_enum, default_value_t = Side::Source)]
    length_side: Side,
    /// Language for TSV rows without a locale column.
    #[arg(long, default_value = "en")]
    source_language: String,
    #[arg(long, default_value_t = NonZeroUsize::new(5).unwrap())]
    bin_width: NonZeroUsize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Source,
    Reference,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Filtered corpus (JSONL or TSV).
    #[arg(long)]
    corpus: PathBuf,
    /// Directory with one subdirectory per system.
    #[arg(long)]
    systems: PathBuf,
    /// Language pair such as en-zh.
    #[arg(long)]
    pair: LanguagePair,
    /// rate:<profile.toml> or bridge:<command | host:port>.
    #[arg(long)]
    predictor: PredictorSpec,
    /// file:<scores.jsonl>, bridge:<command | host:port> or constant:<value>.
    #[arg(long)]
    qe: QeSpec,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    #[arg(long, value_enum, default_value_t = Mode::Absolute)]
    icm_mode: Mode,
    #[arg(long, default_value_t = 4.0)]
    qe_floor: f64,
    #[arg(long, default_value_t = 0.25)]
    icm_quantile: f64,
    #[arg(long, default_value_t = 0.03)]
    bold_margin_icm: f64,
    #[arg(long, default_value_t = 0.02)]
    bold_margin_qa: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Absolute,
    Squared,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSONL with {"text", "language", "seconds"} per line.
    #[arg(long)]
    reference: PathBuf,
    /// Candidate: [name=]rate:<toml> | calibrated:<characters|tokens> | table:<jsonl> | bridge:<addr>.
    #[arg(long = "predictor", required = true)]
    predictors: Vec<CandidateSpec>,
    #[arg(long, default_value_t = 5)]
    bin_width: usize,
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = Statistic::Mean)]
    statistic: Statistic,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Statistic {
    Mean,
    Median,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value = "en")]
    language: String,
    /// Characters per second of the generating model.
    #[arg(long, default_value_t = 14.0)]
    rate: f64,
    #[arg(long, default_value_t = 0.3)]
    floor: f64,
    /// Half-width of the multiplicative noise.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    min_words: usize,
    #[arg(long, default_value_t = 40)]
    max_words: usize,
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Filter(a) => {
            let policy = FilterPolicy {
                min_tokens: a.min_tokens,
                min_upvotes: a.min_upvotes,
                max_downvotes: a.max_downvotes,
                length_side: match a.length_side {
                    Side::Source => LengthSide::Source,
                    Side::Reference => LengthSide::Reference,
                },
            };
            let s = cmd_filter(&FilterConfig {
                corpus: a.corpus,
                policy,
                source_language: a.source_language,
                bin_width: a.bin_width,
                out: a.out,
            })?;
            println!(
                "kept {} dropped {} rejected rows {}",
                s.kept, s.dropped, s.rejected_rows
            );
        }
        Command::Evaluate(a) => {
            let flag_policy =
                FlagPolicy::new(a.qe_floor, a.icm_quantile).map_err(|e| RunError::Input(e.to_string()))?;
            let mut config = EvaluateConfig::new(a.corpus, a.systems, a.pair, a.predictor, a.qe, a.out);
            config.max_in_flight = a.max_in_flight;
            config.icm_mode = match a.icm_mode {
                Mode::Absolute => IcmMode::Absolute,
                Mode::Squared => IcmMode::Squared,
            };
            config.flag_policy = flag_policy;
            config.bold_margin_icm = a.bold_margin_icm;
            config.bold_margin_q_a = a.bold_margin_qa;
            let s = cmd_evaluate(&config)?;
            println!(
                "evaluated {} systems, {} segment diagnostics",
                s.reports.len(),
                s.diagnostics
            );
        }
        Command::Validate(a) => {
            let entries = cmd_validate(&ValidateConfig {
                reference: a.reference,
                predictors: a.predictors,
                bin_width: a.bin_width,
                tolerance: a.tolerance,
                statistic: match a.statistic {
                    Statistic::Mean => BinStatistic::Mean,
                    Statistic::Median => BinStatistic::Median,
                },
                out: a.out,
            })?;
            for e in entries {
                match (&e.failed, e.threshold) {
                    (Some(reason), _) => println!("{}: failed: {reason}", e.name),
                    (None, Some(t)) => println!("{}: reliable from {t} words", e.name),
                    (None, None) => println!("{}: no reliable range", e.name),
                }
            }
        }
        Command::SynthReference(a) => {
            let records = synth_reference(&SynthConfig {
                seed: a.seed,
                count: a.count,
                language: a.language,
                units_per_second: a.rate,
                pause_floor: a.floor,
                noise: a.noise,
                min_words: a.min_words,
                max_words: a.max_words,
                out: a.out,
            })?;
            println!("wrote {} reference durations", records.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
