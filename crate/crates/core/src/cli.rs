//! Reproducible runs: `filter`, `evaluate`, `validate` and `synth-reference`.
//!
//! Every command computes everything first and writes its output files only on success.
//! Exit codes are part of the contract: 0 success, 2 input error, 3 evaluation hard failure,
//! 4 bridge transport failure.
//!
//! Systems directory layout for `evaluate`:
//!
//! ```text
//! systems/
//!   <system-name>/
//!     <src>-<tgt>.txt     one translation per line, aligned with the corpus
//!     <src>-<tgt>.jsonl   or {"id": ..., "text": ...} records
//! ```
//!
//! A system directory without a file for the requested pair is reported as `NO_SUBMISSION`.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{BridgeClient, BridgeError, BRIDGE_ENV};
use crate::corpus::{
    apply_filter, histogram_csv, import_covost_tsv, load_submission, read_corpus_jsonl, token_histogram,
    write_corpus_jsonl, FilterPolicy, LanguagePair, Segment, SubmissionFormat, SubmissionManifest,
};
use crate::duration::{calibrate_rate, BridgePredictor, DurationPredictor, RatePredictor, TablePredictor, UnitKind};
use crate::evaluation::{apply_flags, evaluate_system, EvalError, EvalOptions, FlagPolicy, SystemReport};
use crate::metrics::IcmMode;
use crate::qe::{BridgeQe, ConstantQe, FileQe, QeProvider};
use crate::report::{render_ranking, render_table, Format, TableSpec};
use crate::validation::{compare_predictors, points_csv, BinStatistic, CompareOptions, ReferenceDuration};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_HARD_FAILURE: i32 = 3;
pub const EXIT_BRIDGE: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    HardFailure(String),
    #[error("{0}")]
    Bridge(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => EXIT_INPUT,
            RunError::HardFailure(_) => EXIT_HARD_FAILURE,
            RunError::Bridge(_) => EXIT_BRIDGE,
        }
    }
}

impl From<BridgeError> for RunError {
    fn from(e: BridgeError) -> Self {
        RunError::Bridge(e.to_string())
    }
}

fn input(context: impl std::fmt::Display) -> impl FnOnce(String) -> RunError {
    move |e| RunError::Input(format!("{context}: {e}"))
}

/// Reads a corpus as CoVoST TSV (`.tsv`) or canonical JSONL (anything else).
pub fn read_corpus(path: &Path, source_language: &str) -> Result<(Vec<Segment>, usize), RunError> {
    let file =
        fs::File::open(path).map_err(|e| RunError::Input(format!("cannot read corpus {}: {e}", path.display())))?;
    let is_tsv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv"));
    if is_tsv {
        let import = import_covost_tsv(file, source_language)
            .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
        for r in &import.rejected {
            eprintln!("{}:{}: skipped row: {}", path.display(), r.line, r.reason);
        }
        Ok((import.segments, import.rejected.len()))
    } else {
        let segments =
            read_corpus_jsonl(BufReader::new(file)).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
        Ok((segments, 0))
    }
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<(), RunError> {
    fs::create_dir_all(dir)
        .map_err(|e| RunError::Input(format!("cannot create output directory {}: {e}", dir.display())))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| RunError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// filter

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub corpus: PathBuf,
    pub policy: FilterPolicy,
    /// Language assigned to TSV rows without a `locale` column.
    pub source_language: String,
    pub bin_width: NonZeroUsize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterSummary {
    pub kept: usize,
    pub dropped: usize,
    pub rejected_rows: usize,
}

/// Writes `corpus.jsonl` (kept segments) and `histogram.csv` (token counts of the whole
/// input corpus) into `out`.
pub fn cmd_filter(config: &FilterConfig) -> Result<FilterSummary, RunError> {
    let (segments, rejected_rows) = read_corpus(&config.corpus, &config.source_language)?;
    let kept = apply_filter(&segments, &config.policy);
    let histogram = token_histogram(&segments, config.bin_width);

    let mut jsonl = Vec::new();
    write_corpus_jsonl(&kept, &mut jsonl).map_err(|e| RunError::Input(e.to_string()))?;
    write_outputs(
        &config.out,
        &[
            ("corpus.jsonl".into(), String::from_utf8(jsonl).expect("JSON is UTF-8")),
            ("histogram.csv".into(), histogram_csv(&histogram)),
        ],
    )?;
    Ok(FilterSummary {
        kept: kept.len(),
        dropped: segments.len() - kept.len(),
        rejected_rows,
    })
}

// ---------------------------------------------------------------------------------------
// evaluate

/// `rate:<profile.toml>` or `bridge:<command or host:port>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictorSpec {
    Rate(PathBuf),
    Bridge(Option<String>),
}

impl FromStr for PredictorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':').unwrap_or((s, "")) {
            ("rate", path) if !path.is_empty() => Ok(Self::Rate(PathBuf::from(path))),
            ("bridge", addr) => Ok(Self::Bridge(Some(addr).filter(|a| !a.is_empty()).map(String::from))),
            _ => Err(format!(
                "invalid predictor {s:?} (expected rate:<profile> or bridge:<address>)"
            )),
        }
    }
}

/// `file:<scores.jsonl>`, `bridge:<command or host:port>` or `constant:<value>`.
#[derive(Debug, Clone, PartialEq)]
pub enum QeSpec {
    File(PathBuf),
    Bridge(Option<String>),
    Constant(f64),
}

impl FromStr for QeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':').unwrap_or((s, "")) {
            ("file", path) if !path.is_empty() => Ok(Self::File(PathBuf::from(path))),
            ("bridge", addr) => Ok(Self::Bridge(Some(addr).filter(|a| !a.is_empty()).map(String::from))),
            ("constant", v) => v
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Self::Constant)
                .ok_or_else(|| format!("invalid constant QE value {v:?}")),
            _ => Err(format!(
                "invalid QE source {s:?} (expected file:, bridge: or constant:)"
            )),
        }
    }
}

/// The endpoint to use: `ISOCHRONO_BRIDGE` wins over the configured one.
pub fn resolve_bridge_endpoint(configured: Option<&str>) -> Result<String, RunError> {
    std::env::var(BRIDGE_ENV)
        .ok()
        .filter(|v| !v.trim().is_empty())
        .or_else(|| configured.map(String::from))
        .ok_or_else(|| RunError::Input(format!("no bridge address given and {BRIDGE_ENV} is not set")))
}

#[derive(Debug, Clone)]
pub struct EvaluateConfig {
    pub corpus: PathBuf,
    pub systems_dir: PathBuf,
    pub pair: LanguagePair,
    pub predictor: PredictorSpec,
    pub qe: QeSpec,
    pub out: PathBuf,
    pub max_in_flight: usize,
    pub icm_mode: IcmMode,
    pub flag_policy: FlagPolicy,
    pub bold_margin_icm: f64,
    pub bold_margin_q_a: f64,
}

impl EvaluateConfig {
    pub fn new(
        corpus: PathBuf,
        systems_dir: PathBuf,
        pair: LanguagePair,
        predictor: PredictorSpec,
        qe: QeSpec,
        out: PathBuf,
    ) -> Self {
        Self {
            corpus,
            systems_dir,
            pair,
            predictor,
            qe,
            out,
            max_in_flight: 4,
            icm_mode: IcmMode::Absolute,
            flag_policy: FlagPolicy::default(),
            bold_margin_icm: 0.03,
            bold_margin_q_a: 0.02,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateSummary {
    pub reports: Vec<SystemReport>,
    pub diagnostics: usize,
}

#[derive(Serialize)]
struct DiagnosticLine<'a> {
    system: &'a str,
    segment_id: &'a str,
    message: &'a str,
}

struct Bridges {
    max_in_flight: usize,
    clients: BTreeMap<String, Arc<BridgeClient>>,
}

impl Bridges {
    fn get(&mut self, configured: Option<&str>) -> Result<Arc<BridgeClient>, RunError> {
        let endpoint = resolve_bridge_endpoint(configured)?;
        if let Some(c) = self.clients.get(&endpoint) {
            return Ok(c.clone());
        }
        let client = Arc::new(BridgeClient::connect(&endpoint)?.with_max_in_flight(self.max_in_flight));
        self.clients.insert(endpoint, client.clone());
        Ok(client)
    }
}

type SystemEntry = (String, Option<(PathBuf, SubmissionFormat)>);

fn discover_systems(dir: &Path, pair: &LanguagePair) -> Result<Vec<SystemEntry>, RunError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| RunError::Input(format!("cannot read systems directory {}: {e}", dir.display())))?;
    let mut systems = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| RunError::Input(e.to_string()))?;
        if !entry.path().is_dir() {
            continue;
        }
        let name = entry
            .file_name()
            .into_string()
            .map_err(|n| RunError::Input(format!("system directory name is not UTF-8: {n:?}")))?;
        let txt = entry.path().join(format!("{pair}.txt"));
        let jsonl = entry.path().join(format!("{pair}.jsonl"));
        let found = match (txt.is_file(), jsonl.is_file()) {
            (true, true) => {
                return Err(RunError::Input(format!(
                    "system {name} has both {pair}.txt and {pair}.jsonl"
                )))
            }
            (true, false) => Some((txt, SubmissionFormat::Aligned)),
            (false, true) => Some((jsonl, SubmissionFormat::Records)),
            (false, false) => None,
        };
        systems.push((name, found));
    }
    systems.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(systems)
}

/// Writes `segments.jsonl`, `diagnostics.jsonl`, `reports.json`, `table.md`, `table.tex` and
/// `ranking.md` into `out`.
pub fn cmd_evaluate(config: &EvaluateConfig) -> Result<EvaluateSummary, RunError> {
    let (corpus, _) = read_corpus(&config.corpus, &config.pair.source)?;
    let systems = discover_systems(&config.systems_dir, &config.pair)?;

    let mut bridges = Bridges {
        max_in_flight: config.max_in_flight.max(1),
        clients: BTreeMap::new(),
    };
    let predictor: Box<dyn DurationPredictor<f64>> = match &config.predictor {
        PredictorSpec::Rate(path) => {
            Box::new(RatePredictor::<f64>::from_file(path).map_err(|e| RunError::Input(e.to_string()))?)
        }
        PredictorSpec::Bridge(addr) => Box::new(BridgePredictor::new(bridges.get(addr.as_deref())?)?),
    };
    let qe: Box<dyn QeProvider> = match &config.qe {
        QeSpec::Constant(v) => Box::new(ConstantQe::new(*v)),
        QeSpec::File(path) => {
            let file = fs::File::open(path)
                .map_err(|e| RunError::Input(format!("cannot read QE file {}: {e}", path.display())))?;
            Box::new(
                FileQe::from_jsonl(format!("file:{}", path.display()), BufReader::new(file))
                    .map_err(input(path.display()))?,
            )
        }
        QeSpec::Bridge(addr) => Box::new(BridgeQe::new(bridges.get(addr.as_deref())?)),
    };

    let options = EvalOptions {
        icm_mode: config.icm_mode,
        max_in_flight: config.max_in_flight.max(1),
        ..EvalOptions::default()
    };

    let mut reports = Vec::new();
    let mut segment_lines = String::new();
    let mut diagnostic_lines = String::new();
    let mut diagnostics = 0;
    let mut hard_failures = Vec::new();
    for (name, file) in systems {
        let Some((path, format)) = file else {
            reports.push(SystemReport::absent(&name, config.pair.clone()));
            continue;
        };
        let manifest = SubmissionManifest {
            system_name: name.clone(),
            language_pair: config.pair.clone(),
            format,
        };
        let reader = fs::File::open(&path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
        let submission = load_submission(reader, &manifest, &corpus)
            .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
        match evaluate_system(&corpus, &submission, predictor.as_ref(), qe.as_ref(), &options) {
            Ok(evaluation) => {
                for record in &evaluation.segments {
                    segment_lines.push_str(&json_line(record));
                }
                for d in &evaluation.diagnostics {
                    diagnostic_lines.push_str(&json_line(&DiagnosticLine {
                        system: &name,
                        segment_id: &d.segment_id,
                        message: &d.message,
                    }));
                }
                diagnostics += evaluation.diagnostics.len();
                reports.push(evaluation.report);
            }
            Err(EvalError::HardFailure {
                system,
                errored,
                attempted,
                diagnostics,
            }) => {
                let first = diagnostics
                    .first()
                    .map(|d| format!(" (first: {}: {})", d.segment_id, d.message));
                hard_failures.push(format!(
                    "system {system}: {errored} of {attempted} segments failed{}",
                    first.unwrap_or_default()
                ));
            }
            Err(EvalError::Transport { system, source }) => {
                return Err(RunError::Bridge(format!("while evaluating {system}: {source}")))
            }
            Err(e) => return Err(RunError::Input(e.to_string())),
        }
    }
    if !hard_failures.is_empty() {
        return Err(RunError::HardFailure(hard_failures.join("; ")));
    }

    apply_flags(&mut reports, &config.flag_policy);
    let spec = TableSpec::new(config.pair.clone()).with_margins(config.bold_margin_icm, config.bold_margin_q_a);
    let table = |format| render_table(&reports, &spec, format).map_err(|e| RunError::Input(e.to_string()));
    let files = vec![
        ("segments.jsonl".to_string(), segment_lines),
        ("diagnostics.jsonl".to_string(), diagnostic_lines),
        (
            "reports.json".to_string(),
            serde_json::to_string_pretty(&reports).expect("reports serialise") + "\n",
        ),
        ("table.md".to_string(), table(Format::Markdown)?),
        ("table.tex".to_string(), table(Format::Latex)?),
        ("ranking.md".to_string(), render_ranking(&reports, Format::Markdown)),
    ];
    write_outputs(&config.out, &files)?;
    Ok(EvaluateSummary { reports, diagnostics })
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("record serialises");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------------------
// validate

/// One validation candidate, optionally named: `[name=]kind:arg` where kind is
/// `rate:<profile.toml>`, `calibrated:<characters|tokens>`, `table:<durations.jsonl>` or
/// `bridge:<address>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSpec {
    pub name: String,
    pub kind: CandidateKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateKind {
    Rate(PathBuf),
    /// Rate model fitted per language on the reference set itself.
    Calibrated(UnitKind),
    Table(PathBuf),
    Bridge(Option<String>),
}

impl FromStr for CandidateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, spec) = match s.split_once('=') {
            Some((n, rest)) if !n.contains(':') => (Some(n.to_string()), rest),
            _ => (None, s),
        };
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let parsed = match kind {
            "rate" if !arg.is_empty() => CandidateKind::Rate(arg.into()),
            "calibrated" => CandidateKind::Calibrated(if arg.is_empty() {
                UnitKind::Characters
            } else {
                arg.parse()?
            }),
            "table" if !arg.is_empty() => CandidateKind::Table(arg.into()),
            "bridge" => CandidateKind::Bridge(Some(arg).filter(|a| !a.is_empty()).map(String::from)),
            _ => return Err(format!("invalid candidate predictor {s:?}")),
        };
        let name = name.unwrap_or_else(|| match &parsed {
            CandidateKind::Calibrated(u) => format!("calibrated-{}", u.as_str()),
            _ => kind.to_string(),
        });
        if name.is_empty() {
            return Err(format!("empty candidate name in {s:?}"));
        }
        Ok(Self { name, kind: parsed })
    }
}

#[derive(Debug, Clone)]
pub struct ValidateConfig {
    pub reference: PathBuf,
    pub predictors: Vec<CandidateSpec>,
    pub bin_width: usize,
    pub tolerance: f64,
    pub statistic: BinStatistic,
    pub out: PathBuf,
}

/// One line of a reference-duration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub text: String,
    pub language: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEntry {
    pub name: String,
    pub predictor_id: String,
    pub threshold: Option<usize>,
    pub errored: usize,
    pub failed: Option<String>,
}

pub fn read_reference(path: &Path) -> Result<Vec<ReferenceDuration<f64>>, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Input(format!("cannot read reference durations {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: ReferenceRecord =
            serde_json::from_str(line).map_err(|e| RunError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(ReferenceDuration {
            text: r.text,
            language: r.language,
            seconds: r.seconds,
        });
    }
    Ok(out)
}

fn calibrated_predictor(reference: &[ReferenceDuration<f64>], unit: UnitKind) -> Result<RatePredictor<f64>, RunError> {
    let mut by_language: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for r in reference {
        by_language.entry(&r.language).or_default().push((&r.text, r.seconds));
    }
    let profiles = by_language
        .into_iter()
        .map(|(language, samples)| {
            calibrate_rate(language, &samples, unit)
                .map_err(|e| RunError::Input(format!("calibrating {language}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    RatePredictor::new(profiles).map_err(|e| RunError::Input(e.to_string()))
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `curve_<name>.csv` and `points_<name>.csv` per usable candidate and
/// `thresholds.json` for all of them.
pub fn cmd_validate(config: &ValidateConfig) -> Result<Vec<ThresholdEntry>, RunError> {
    if config.predictors.is_empty() {
        return Err(RunError::Input("no candidate predictors given".into()));
    }
    if config.bin_width == 0 {
        return Err(RunError::Input("bin width must be >= 1".into()));
    }
    if !(config.tolerance.is_finite() && config.tolerance >= 0.0) {
        return Err(RunError::Input("tolerance must be >= 0".into()));
    }
    let mut names: Vec<&str> = config.predictors.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(RunError::Input(format!("duplicate candidate name {:?}", w[0])));
    }
    let reference = read_reference(&config.reference)?;

    let mut bridges = Bridges {
        max_in_flight: 16,
        clients: BTreeMap::new(),
    };
    let mut predictors: Vec<Box<dyn DurationPredictor<f64>>> = Vec::new();
    for candidate in &config.predictors {
        predictors.push(match &candidate.kind {
            CandidateKind::Rate(path) => {
                Box::new(RatePredictor::<f64>::from_file(path).map_err(|e| RunError::Input(e.to_string()))?)
            }
            CandidateKind::Calibrated(unit) => Box::new(calibrated_predictor(&reference, *unit)?),
            CandidateKind::Table(path) => {
                let file = fs::File::open(path)
                    .map_err(|e| RunError::Input(format!("cannot read {}: {e}", path.display())))?;
                Box::new(
                    TablePredictor::from_jsonl(format!("table:{}", path.display()), BufReader::new(file))
                        .map_err(input(path.display()))?,
                )
            }
            CandidateKind::Bridge(addr) => Box::new(BridgePredictor::new(bridges.get(addr.as_deref())?)?),
        });
    }
    let candidates: Vec<(&str, &dyn DurationPredictor<f64>)> = config
        .predictors
        .iter()
        .zip(&predictors)
        .map(|(c, p)| (c.name.as_str(), p.as_ref()))
        .collect();
    let options = CompareOptions {
        bin_width: config.bin_width,
        tolerance: config.tolerance,
        statistic: config.statistic,
    };
    let results = compare_predictors(&reference, &candidates, &options).map_err(|e| RunError::Input(e.to_string()))?;
    if let Some(client) = bridges.clients.values().find(|c| c.is_broken()) {
        return Err(RunError::Bridge(format!(
            "bridge {} failed during validation",
            client.endpoint()
        )));
    }

    let mut files = Vec::new();
    let mut entries = Vec::new();
    for result in results {
        let entry = match result.outcome {
            Ok(curve) => {
                let stem = file_stem(&result.name);
                files.push((format!("curve_{stem}.csv"), curve.curve.to_csv()));
                files.push((format!("points_{stem}.csv"), points_csv(&curve.pairs)));
                ThresholdEntry {
                    name: result.name,
                    predictor_id: result.predictor_id,
                    threshold: curve.threshold,
                    errored: curve.errored,
                    failed: None,
                }
            }
            Err(reason) => ThresholdEntry {
                name: result.name,
                predictor_id: result.predictor_id,
                threshold: None,
                errored: reference.len(),
                failed: Some(reason),
            },
        };
        entries.push(entry);
    }
    files.push((
        "thresholds.json".into(),
        serde_json::to_string_pretty(&entries).expect("thresholds serialise") + "\n",
    ));
    write_outputs(&config.out, &files)?;
    Ok(entries)
}

// ---------------------------------------------------------------------------------------
// synth-reference

/// Synthetic reference durations from a known rate model with multiplicative noise.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub count: usize,
    pub language: String,
    pub units_per_second: f64,
    pub pause_floor: f64,
    /// Half-width of the uniform multiplicative noise, e.g. 0.01 for ±1 %.
    pub noise: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub out: PathBuf,
}

pub fn synth_reference(config: &SynthConfig) -> Result<Vec<ReferenceRecord>, RunError> {
    if config.min_words == 0 || config.min_words > config.max_words {
        return Err(RunError::Input("need 1 <= min_words <= max_words".into()));
    }
    if !(config.units_per_second > 0.0 && config.pause_floor >= 0.0 && (0.0..1.0).contains(&config.noise)) {
        return Err(RunError::Input(
            "need units_per_second > 0, pause_floor >= 0, 0 <= noise < 1".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(config.seed);
    let records: Vec<ReferenceRecord> = (0..config.count)
        .map(|_| {
            let words = rng.gen_range(config.min_words..=config.max_words);
            let text: Vec<String> = (0..words)
                .map(|_| {
                    let len = rng.gen_range(1..=9);
                    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
                })
                .collect();
            let text = text.join(" ");
            let exact = config.pause_floor + UnitKind::Characters.count(&text) as f64 / config.units_per_second;
            let factor = if config.noise > 0.0 {
                1.0 + rng.gen_range(-config.noise..=config.noise)
            } else {
                1.0
            };
            ReferenceRecord {
                text,
                language: config.language.clone(),
                seconds: exact * factor,
            }
        })
        .collect();
    let body: String = records.iter().map(json_line).collect();
    if let Some(parent) = config.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| RunError::Input(e.to_string()))?;
    }
    fs::write(&config.out, body).map_err(|e| RunError::Input(format!("cannot write {}: {e}", config.out.display())))?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictor_specs() {
        assert_eq!("rate:p.toml".parse(), Ok(PredictorSpec::Rate("p.toml".into())));
        assert_eq!(
            "bridge:127.0.0.1:9000".parse(),
            Ok(PredictorSpec::Bridge(Some("127.0.0.1:9000".into())))
        );
        assert_eq!("bridge".parse(), Ok(PredictorSpec::Bridge(None)));
        assert!("rate:".parse::<PredictorSpec>().is_err());
        assert!("neural".parse::<PredictorSpec>().is_err());
    }

    #[test]
    fn qe_specs() {
        assert_eq!("constant:4.0".parse(), Ok(QeSpec::Constant(4.0)));
        assert_eq!("file:q.jsonl".parse(), Ok(QeSpec::File("q.jsonl".into())));
        assert!("constant:nan".parse::<QeSpec>().is_err());
        assert!("blaser".parse::<QeSpec>().is_err());
    }

    #[test]
    fn candidate_specs() {
        let c: CandidateSpec = "fine=table:d.jsonl".parse().unwrap();
        assert_eq!(c.name, "fine");
        assert_eq!(c.kind, CandidateKind::Table("d.jsonl".into()));
        let c: CandidateSpec = "calibrated:tokens".parse().unwrap();
        assert_eq!(c.name, "calibrated-tokens");
        let c: CandidateSpec = "bridge:python worker.py --mode=x".parse().unwrap();
        assert_eq!(c.kind, CandidateKind::Bridge(Some("python worker.py --mode=x".into())));
        assert!("=rate:x".parse::<CandidateSpec>().is_err());
        assert!("calibrated:bytes".parse::<CandidateSpec>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Input(String::new()).exit_code(), 2);
        assert_eq!(RunError::HardFailure(String::new()).exit_code(), 3);
        assert_eq!(RunError::Bridge(String::new()).exit_code(), 4);
    }

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("a b/c"), "a_b_c");
    }
}
