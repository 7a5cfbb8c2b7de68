//! Per-system evaluation: durations and QE for every translated segment, per-segment
//! metrics, aggregation, flagging and ranking.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::BridgeError;
use crate::corpus::{LanguagePair, Segment, Submission};
use crate::duration::{DurationPredictor, PredictError};
use crate::metrics::{aggregate, icm_from_seconds, AggregateMetrics, IcmMode, MetricsError, SegmentMetrics};
use crate::qe::{QeError, QeItem, QeProvider};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("predictor {predictor} does not support language {language:?}")]
    UnsupportedLanguage { predictor: String, language: String },
    #[error("system {system}: {errored} of {attempted} translated segments failed, above the error budget")]
    HardFailure {
        system: String,
        errored: usize,
        attempted: usize,
        diagnostics: Vec<SegmentDiagnostic>,
    },
    #[error("bridge transport failed while evaluating {system}: {source}")]
    Transport {
        system: String,
        #[source]
        source: BridgeError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flag {
    LowQuality,
    SuspectTruncation,
    NoSubmission,
}

impl Flag {
    pub fn code(self) -> &'static str {
        match self {
            Flag::LowQuality => "LOW_QUALITY",
            Flag::SuspectTruncation => "SUSPECT_TRUNCATION",
            Flag::NoSubmission => "NO_SUBMISSION",
        }
    }
}

/// One system's result for one language pair. `aggregate` is absent exactly when the
/// system submitted nothing scorable, and then the report carries `NO_SUBMISSION`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemReport {
    system_name: String,
    language_pair: LanguagePair,
    aggregate: Option<AggregateMetrics<f64>>,
    coverage: f64,
    flags: BTreeSet<Flag>,
}

impl SystemReport {
    pub fn scored(
        system_name: impl Into<String>,
        language_pair: LanguagePair,
        aggregate: AggregateMetrics<f64>,
        coverage: f64,
    ) -> Self {
        Self {
            system_name: system_name.into(),
            language_pair,
            aggregate: Some(aggregate),
            coverage: coverage.clamp(0.0, 1.0),
            flags: BTreeSet::new(),
        }
    }

    pub fn absent(system_name: impl Into<String>, language_pair: LanguagePair) -> Self {
        Self {
            system_name: system_name.into(),
            language_pair,
            aggregate: None,
            coverage: 0.0,
            flags: BTreeSet::from([Flag::NoSubmission]),
        }
    }

    pub fn system_name(&self) -> &str {
        &self.system_name
    }

    pub fn language_pair(&self) -> &LanguagePair {
        &self.language_pair
    }

    pub fn aggregate(&self) -> Option<&AggregateMetrics<f64>> {
        self.aggregate.as_ref()
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn flags(&self) -> &BTreeSet<Flag> {
        &self.flags
    }

    /// Replace the quality flags. `NO_SUBMISSION` always follows the aggregate.
    pub fn set_flags(&mut self, flags: impl IntoIterator<Item = Flag>) {
        self.flags = flags.into_iter().filter(|f| *f != Flag::NoSubmission).collect();
        if self.aggregate.is_none() {
            self.flags.insert(Flag::NoSubmission);
        }
    }
}

/// Per-segment export row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment_id: String,
    pub system: String,
    pub icm: f64,
    pub qe: f64,
    pub aicm: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentDiagnostic {
    pub segment_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub icm_mode: IcmMode,
    /// Upper bound on concurrently processed chunks of segments.
    pub max_in_flight: usize,
    /// Fraction of translated segments allowed to error before the evaluation fails.
    pub error_budget: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            icm_mode: IcmMode::Absolute,
            max_in_flight: 4,
            error_budget: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemEvaluation {
    /// Scored segments, in corpus order.
    pub segments: Vec<SegmentRecord>,
    pub report: SystemReport,
    pub diagnostics: Vec<SegmentDiagnostic>,
}

enum Failure {
    Segment(String),
    Transport(BridgeError),
}

impl From<PredictError> for Failure {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::Transport(t) => Failure::Transport(t),
            other => Failure::Segment(format!("duration: {other}")),
        }
    }
}

impl From<QeError> for Failure {
    fn from(e: QeError) -> Self {
        match e {
            QeError::Transport(t) => Failure::Transport(t),
            other => Failure::Segment(format!("qe: {other}")),
        }
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        Failure::Segment(e.to_string())
    }
}

pub fn evaluate_system(
    corpus: &[Segment],
    submission: &Submission,
    predictor: &dyn DurationPredictor<f64>,
    qe: &dyn QeProvider,
    options: &EvalOptions,
) -> Result<SystemEvaluation, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let pair = &submission.language_pair;
    let supported = predictor.supported_languages();
    for language in [&pair.source, &pair.target] {
        if !supported.contains(language) {
            return Err(EvalError::UnsupportedLanguage {
                predictor: predictor.id().to_string(),
                language: language.clone(),
            });
        }
    }

    let work: Vec<(&Segment, &str)> = corpus
        .iter()
        .filter_map(|s| submission.translation(s.id()).map(|t| (s, t)))
        .collect();
    if work.is_empty() {
        return Ok(SystemEvaluation {
            segments: Vec::new(),
            report: SystemReport::absent(&submission.system_name, pair.clone()),
            diagnostics: Vec::new(),
        });
    }

    let chunk_len = work.len().div_ceil(options.max_in_flight.max(1));
    let outcomes: Vec<Result<SegmentMetrics<f64>, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = work
            .chunks(chunk_len)
            .map(|chunk| scope.spawn(move || score_chunk(chunk, submission, predictor, qe, options.icm_mode)))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scoring thread panicked"))
            .collect()
    });

    let mut segments = Vec::new();
    let mut metrics = Vec::new();
    let mut diagnostics = Vec::new();
    for ((segment, _), outcome) in work.iter().zip(outcomes) {
        match outcome {
            Ok(m) => {
                segments.push(SegmentRecord {
                    segment_id: segment.id().to_string(),
                    system: submission.system_name.clone(),
                    icm: m.icm(),
                    qe: m.qe(),
                    aicm: m.aicm(),
                });
                metrics.push(m);
            }
            Err(Failure::Transport(source)) => {
                return Err(EvalError::Transport {
                    system: submission.system_name.clone(),
                    source,
                })
            }
            Err(Failure::Segment(message)) => diagnostics.push(SegmentDiagnostic {
                segment_id: segment.id().to_string(),
                message,
            }),
        }
    }

    let attempted = work.len();
    let errored = diagnostics.len();
    if errored as f64 > options.error_budget * attempted as f64 || metrics.is_empty() {
        return Err(EvalError::HardFailure {
            system: submission.system_name.clone(),
            errored,
            attempted,
            diagnostics,
        });
    }

    let coverage = metrics.len() as f64 / corpus.len() as f64;
    let report = SystemReport::scored(&submission.system_name, pair.clone(), aggregate(&metrics)?, coverage);
    Ok(SystemEvaluation {
        segments,
        report,
        diagnostics,
    })
}

fn score_chunk(
    chunk: &[(&Segment, &str)],
    submission: &Submission,
    predictor: &dyn DurationPredictor<f64>,
    qe: &dyn QeProvider,
    mode: IcmMode,
) -> Vec<Result<SegmentMetrics<f64>, Failure>> {
    let pair = &submission.language_pair;
    let texts: Vec<(&str, &str)> = chunk
        .iter()
        .flat_map(|(s, t)| [(s.source_text(), pair.source.as_str()), (*t, pair.target.as_str())])
        .collect();
    let mut durations = predictor.predict_batch(&texts).into_iter();

    let items: Vec<QeItem> = chunk
        .iter()
        .map(|(s, t)| QeItem {
            segment_id: s.id(),
            system: &submission.system_name,
            source_text: s.source_text(),
            translated_text: t,
            source_language: &pair.source,
            target_language: &pair.target,
        })
        .collect();
    let scores = qe.score_batch(&items);

    scores
        .into_iter()
        .map(|score| {
            let source = durations.next().expect("source duration");
            let translated = durations.next().expect("translation duration");
            let icm = icm_from_seconds(mode, source?.seconds(), translated?.seconds())?;
            Ok(SegmentMetrics::new(icm, score?)?)
        })
        .collect()
}

/// Thresholds for flagging systems whose isochrony looks good only because they drop content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagPolicy {
    /// Heuristic QE floor on the BLASER scale; below it a system is `LOW_QUALITY`.
    pub qe_floor: f64,
    /// A low-quality system whose mean ICM is at or below this quantile of its language
    /// pair's ICM values is `SUSPECT_TRUNCATION`.
    pub icm_suspicion_quantile: f64,
}

impl Default for FlagPolicy {
    fn default() -> Self {
        Self {
            qe_floor: 4.0,
            icm_suspicion_quantile: 0.25,
        }
    }
}

impl FlagPolicy {
    pub fn new(qe_floor: f64, icm_suspicion_quantile: f64) -> Result<Self, String> {
        if !qe_floor.is_finite() {
            return Err("qe_floor must be finite".into());
        }
        if !(icm_suspicion_quantile > 0.0 && icm_suspicion_quantile < 1.0) {
            return Err(format!("quantile must lie in (0, 1), got {icm_suspicion_quantile}"));
        }
        Ok(Self {
            qe_floor,
            icm_suspicion_quantile,
        })
    }
}

/// Linear-interpolation quantile of an unsorted sample (`q` in `[0, 1]`).
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

pub fn flag_system(report: &SystemReport, all_reports: &[SystemReport], policy: &FlagPolicy) -> BTreeSet<Flag> {
    let mut flags = BTreeSet::new();
    let Some(agg) = report.aggregate() else {
        flags.insert(Flag::NoSubmission);
        return flags;
    };
    if agg.mean_qe < policy.qe_floor {
        flags.insert(Flag::LowQuality);
        let peers: Vec<f64> = all_reports
            .iter()
            .filter(|r| r.language_pair == report.language_pair)
            .filter_map(|r| r.aggregate().map(|a| a.mean_icm))
            .collect();
        if let Some(cut) = quantile(&peers, policy.icm_suspicion_quantile) {
            if agg.mean_icm <= cut {
                flags.insert(Flag::SuspectTruncation);
            }
        }
    }
    flags
}

/// Recompute flags for every report against its peers.
pub fn apply_flags(reports: &mut [SystemReport], policy: &FlagPolicy) {
    let flags: Vec<_> = reports.iter().map(|r| flag_system(r, reports, policy)).collect();
    for (report, f) in reports.iter_mut().zip(flags) {
        report.set_flags(f);
    }
}

/// Best first by headline A-ICM; ties go to the lower ICM, then the name. Systems without an
/// aggregate come last in alphabetical order.
pub fn rank_systems(reports: &[SystemReport]) -> Vec<&SystemReport> {
    let mut ranked: Vec<&SystemReport> = reports.iter().collect();
    ranked.sort_by(|a, b| compare_rank(a, b));
    ranked
}

fn compare_rank(a: &SystemReport, b: &SystemReport) -> Ordering {
    match (a.aggregate(), b.aggregate()) {
        (Some(x), Some(y)) => y
            .aicm_from_means
            .total_cmp(&x.aicm_from_means)
            .then(x.mean_icm.total_cmp(&y.mean_icm)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
    .then_with(|| a.system_name.cmp(&b.system_name))
}
