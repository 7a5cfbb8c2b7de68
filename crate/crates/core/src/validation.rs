//! How well does a duration predictor track reference durations as texts get longer?
//!
//! Relative absolute error `|reference − predicted| / reference` is binned by word count;
//! the reliability threshold is the first bin from which every later bin stays within a
//! tolerance.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::duration::DurationPredictor;
use crate::scalar::{order_free_sum, Scalar};
use crate::tokenize::count_tokens;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("pair {index}: durations must be finite and > 0")]
    NonPositiveSeconds { index: usize },
    #[error("bin width must be >= 1")]
    ZeroBinWidth,
}

/// One measured text: word count, reference seconds, predicted seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationPair<T> {
    pub word_count: usize,
    pub reference_seconds: T,
    pub predicted_seconds: T,
}

impl<T: Scalar> DurationPair<T> {
    pub fn new(word_count: usize, reference_seconds: T, predicted_seconds: T) -> Self {
        Self {
            word_count,
            reference_seconds,
            predicted_seconds,
        }
    }

    pub fn rel_abs_error(&self) -> T {
        (self.reference_seconds - self.predicted_seconds).abs() / self.reference_seconds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinStatistic {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveBin<T> {
    pub bin_start: usize,
    /// Mean (or median) relative absolute error of the bin.
    pub error: T,
    pub n: usize,
}

/// Bins sorted by start; empty bins are omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ErrorCurve<T> {
    pub bins: Vec<CurveBin<T>>,
}

/// Raw points as CSV: `word_count,reference_seconds,predicted_seconds,rel_abs_error`.
pub fn points_csv<T: Scalar>(pairs: &[DurationPair<T>]) -> String {
    let mut out = String::from("word_count,reference_seconds,predicted_seconds,rel_abs_error\n");
    for p in pairs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.word_count,
            p.reference_seconds,
            p.predicted_seconds,
            p.rel_abs_error()
        ));
    }
    out
}

impl<T: Scalar> ErrorCurve<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,mean_rel_abs_error,n\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{}\n", b.bin_start, b.error, b.n));
        }
        out
    }
}

pub fn build_error_curve<T: Scalar>(
    pairs: &[DurationPair<T>],
    bin_width: usize,
    statistic: BinStatistic,
) -> Result<ErrorCurve<T>, ValidationError> {
    if bin_width == 0 {
        return Err(ValidationError::ZeroBinWidth);
    }
    let mut bins: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    for (index, p) in pairs.iter().enumerate() {
        let ok = |s: T| s.is_finite() && s > T::zero();
        if !(ok(p.reference_seconds) && ok(p.predicted_seconds)) {
            return Err(ValidationError::NonPositiveSeconds { index });
        }
        bins.entry(p.word_count / bin_width * bin_width)
            .or_default()
            .push(p.rel_abs_error());
    }
    let bins = bins
        .into_iter()
        .map(|(bin_start, mut errors)| {
            let n = errors.len();
            let error = match statistic {
                BinStatistic::Mean => order_free_sum(&mut errors) / T::from_count(n),
                BinStatistic::Median => median(&mut errors),
            };
            CurveBin { bin_start, error, n }
        })
        .collect();
    Ok(ErrorCurve { bins })
}

fn median<T: Scalar>(values: &mut [T]) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / T::lit(2.0)
    }
}

/// Smallest bin start from which every bin's error is `<= tolerance`.
pub fn find_reliability_threshold<T: Scalar>(curve: &ErrorCurve<T>, tolerance: T) -> Option<usize> {
    let mut threshold = None;
    for bin in curve.bins.iter().rev() {
        if bin.error <= tolerance {
            threshold = Some(bin.bin_start);
        } else {
            break;
        }
    }
    threshold
}

/// A text with a measured (reference) duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDuration<T> {
    pub text: String,
    pub language: String,
    pub seconds: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateCurve<T> {
    pub curve: ErrorCurve<T>,
    pub threshold: Option<usize>,
    /// Reference items the candidate could not predict.
    pub errored: usize,
    /// The raw points behind the curve, in reference order.
    #[serde(skip)]
    pub pairs: Vec<DurationPair<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateResult<T> {
    pub name: String,
    pub predictor_id: String,
    /// `Err` carries the reason a candidate was marked failed.
    pub outcome: Result<CandidateCurve<T>, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions<T> {
    pub bin_width: usize,
    pub tolerance: T,
    pub statistic: BinStatistic,
}

impl<T: Scalar> Default for CompareOptions<T> {
    fn default() -> Self {
        Self {
            bin_width: 5,
            tolerance: T::lit(0.05),
            statistic: BinStatistic::Mean,
        }
    }
}

/// Evaluate each candidate against the same reference set, in parallel. A candidate that
/// fails on more than half of the items is marked failed; others are unaffected.
pub fn compare_predictors<T: Scalar>(
    reference: &[ReferenceDuration<T>],
    candidates: &[(&str, &dyn DurationPredictor<T>)],
    options: &CompareOptions<T>,
) -> Result<Vec<CandidateResult<T>>, ValidationError> {
    if options.bin_width == 0 {
        return Err(ValidationError::ZeroBinWidth);
    }
    for (index, r) in reference.iter().enumerate() {
        if !(r.seconds.is_finite() && r.seconds > T::zero()) {
            return Err(ValidationError::NonPositiveSeconds { index });
        }
    }
    let items: Vec<(&str, &str)> = reference
        .iter()
        .map(|r| (r.text.as_str(), r.language.as_str()))
        .collect();

    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = candidates
            .iter()
            .map(|(name, predictor)| {
                let items = &items;
                scope.spawn(move || CandidateResult {
                    name: name.to_string(),
                    predictor_id: predictor.id().to_string(),
                    outcome: evaluate_candidate(reference, items, *predictor, options),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("candidate thread panicked"))
            .collect()
    }))
}

fn evaluate_candidate<T: Scalar>(
    reference: &[ReferenceDuration<T>],
    items: &[(&str, &str)],
    predictor: &dyn DurationPredictor<T>,
    options: &CompareOptions<T>,
) -> Result<CandidateCurve<T>, String> {
    let predictions = predictor.predict_batch(items);
    let mut pairs = Vec::with_capacity(reference.len());
    let mut errored = 0;
    let mut first_error = None;
    for (r, p) in reference.iter().zip(predictions) {
        match p {
            Ok(estimate) if estimate.seconds() > T::zero() => pairs.push(DurationPair {
                word_count: count_tokens(&r.text),
                reference_seconds: r.seconds,
                predicted_seconds: estimate.seconds(),
            }),
            Ok(_) => {
                errored += 1;
                first_error.get_or_insert_with(|| "predicted zero seconds".to_string());
            }
            Err(e) => {
                errored += 1;
                first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if errored * 2 > reference.len() {
        return Err(format!(
            "failed on {errored} of {} items (first error: {})",
            reference.len(),
            first_error.unwrap_or_default()
        ));
    }
    let curve = build_error_curve(&pairs, options.bin_width, options.statistic).map_err(|e| e.to_string())?;
    let threshold = find_reliability_threshold(&curve, options.tolerance);
    Ok(CandidateCurve {
        curve,
        threshold,
        errored,
        pairs,
    })
}
