//! Source corpora, system submissions, the length/vote filter and the token histogram.

mod jsonl;
mod submission;
mod tsv;

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::count_tokens;

pub use jsonl::{read_corpus_jsonl, write_corpus_jsonl};
pub use submission::{load_submission, Submission, SubmissionFormat, SubmissionManifest};
pub use tsv::{import_covost_tsv, RowRejection, TsvImport};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing required column `{0}`")]
    Schema(String),
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("duplicate segment id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("submission has {got} lines but the corpus has {expected} segments")]
    Alignment { expected: usize, got: usize },
    #[error("submission references unknown segment ids: {}", .0.join(", "))]
    UnknownIds(Vec<String>),
    #[error("invalid language pair {0:?} (expected e.g. en-de)")]
    LanguagePair(String),
    #[error("system name must be nonempty")]
    EmptySystemName,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Source and target language codes, written `src-tgt`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl LanguagePair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
        }
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

impl FromStr for LanguagePair {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('-') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains('-') => Ok(Self::new(a, b)),
            _ => Err(CorpusError::LanguagePair(s.to_string())),
        }
    }
}

/// One source sentence with its crowd votes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    id: String,
    source_text: String,
    source_language: String,
    reference_translation: Option<String>,
    up_votes: u32,
    down_votes: u32,
    token_count: usize,
}

impl Segment {
    pub fn new(
        id: impl Into<String>,
        source_text: impl Into<String>,
        source_language: impl Into<String>,
        reference_translation: Option<String>,
        up_votes: u32,
        down_votes: u32,
    ) -> Self {
        let source_text = source_text.into();
        let token_count = count_tokens(&source_text);
        Self {
            id: id.into(),
            source_text,
            source_language: source_language.into(),
            reference_translation,
            up_votes,
            down_votes,
            token_count,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn source_language(&self) -> &str {
        &self.source_language
    }

    pub fn reference_translation(&self) -> Option<&str> {
        self.reference_translation.as_deref()
    }

    pub fn up_votes(&self) -> u32 {
        self.up_votes
    }

    pub fn down_votes(&self) -> u32 {
        self.down_votes
    }

    /// Toolkit token count of the source text.
    pub fn token_count(&self) -> usize {
        self.token_count
    }
}

/// Which text's length the token threshold applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthSide {
    #[default]
    Source,
    /// The reference translation; segments without one have length 0.
    Reference,
}

impl FromStr for LengthSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" => Ok(Self::Source),
            "reference" | "target" => Ok(Self::Reference),
            other => Err(format!("unknown length side {other:?}")),
        }
    }
}

/// Keep segments with at least `min_tokens` tokens, at least `min_upvotes` up-votes and at
/// most `max_downvotes` down-votes. All bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterPolicy {
    pub min_tokens: usize,
    pub min_upvotes: u32,
    pub max_downvotes: u32,
    pub length_side: LengthSide,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self {
            min_tokens: 20,
            min_upvotes: 3,
            max_downvotes: 0,
            length_side: LengthSide::Source,
        }
    }
}

impl FilterPolicy {
    /// Keeps everything.
    pub fn permissive() -> Self {
        Self {
            min_tokens: 0,
            min_upvotes: 0,
            max_downvotes: u32::MAX,
            length_side: LengthSide::Source,
        }
    }

    pub fn accepts(&self, segment: &Segment) -> bool {
        let length = match self.length_side {
            LengthSide::Source => segment.token_count,
            LengthSide::Reference => segment.reference_translation().map_or(0, count_tokens),
        };
        length >= self.min_tokens && segment.up_votes >= self.min_upvotes && segment.down_votes <= self.max_downvotes
    }
}

/// Stable filter.
pub fn apply_filter(segments: &[Segment], policy: &FilterPolicy) -> Vec<Segment> {
    segments.iter().filter(|s| policy.accepts(s)).cloned().collect()
}

/// `(bin_start, count)` pairs covering `0..=max token count`, zero-count bins included.
pub fn token_histogram(segments: &[Segment], bin_width: NonZeroUsize) -> Vec<(usize, usize)> {
    let width = bin_width.get();
    let Some(max) = segments.iter().map(Segment::token_count).max() else {
        return Vec::new();
    };
    let mut counts = vec![0usize; max / width + 1];
    for s in segments {
        counts[s.token_count / width] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (i * width, c)).collect()
}

pub fn histogram_csv(bins: &[(usize, usize)]) -> String {
    let mut out = String::from("bin_start,count\n");
    for (start, count) in bins {
        out.push_str(&format!("{start},{count}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: &str, tokens: usize, up: u32, down: u32) -> Segment {
        let text = vec!["w"; tokens].join(" ");
        Segment::new(id, text, "en", None, up, down)
    }

    fn nz(n: usize) -> NonZeroUsize {
        NonZeroUsize::new(n).unwrap()
    }

    #[test]
    fn default_thresholds() {
        let policy = FilterPolicy::default();
        assert!(policy.accepts(&seg("a", 20, 3, 0)));
        assert!(!policy.accepts(&seg("b", 19, 5, 0)));
        assert!(!policy.accepts(&seg("c", 30, 3, 1)));
        assert!(!policy.accepts(&seg("d", 30, 2, 0)));
    }

    #[test]
    fn permissive_is_identity() {
        let segments = vec![seg("a", 0, 0, 9), seg("b", 3, 1, 0), seg("c", 40, 10, 2)];
        assert_eq!(apply_filter(&segments, &FilterPolicy::permissive()), segments);
    }

    #[test]
    fn filter_on_reference_side() {
        let long = vec!["w"; 25].join(" ");
        let with_ref = Segment::new("a", "short", "en", Some(long), 3, 0);
        let without = Segment::new("b", vec!["w"; 25].join(" "), "en", None, 3, 0);
        let policy = FilterPolicy {
            length_side: LengthSide::Reference,
            ..FilterPolicy::default()
        };
        assert!(policy.accepts(&with_ref));
        assert!(!policy.accepts(&without));
    }

    #[test]
    fn histogram_hand_binned() {
        let segments = vec![seg("a", 3, 0, 0), seg("b", 5, 0, 0), seg("c", 21, 0, 0)];
        assert_eq!(token_histogram(&segments, nz(10)), vec![(0, 2), (10, 0), (20, 1)]);
        assert!(token_histogram(&[], nz(10)).is_empty());
    }

    #[test]
    fn histogram_unit_width() {
        let segments = vec![seg("a", 2, 0, 0), seg("b", 2, 0, 0), seg("c", 4, 0, 0)];
        let bins = token_histogram(&segments, nz(1));
        assert_eq!(bins, vec![(0, 0), (1, 0), (2, 2), (3, 0), (4, 1)]);
        assert_eq!(histogram_csv(&bins[2..3]), "bin_start,count\n2,2\n");
    }

    #[test]
    fn language_pair_parsing() {
        let p: LanguagePair = "en-zh".parse().unwrap();
        assert_eq!(p, LanguagePair::new("en", "zh"));
        assert_eq!(p.to_string(), "en-zh");
        assert!("enzh".parse::<LanguagePair>().is_err());
        assert!("en-".parse::<LanguagePair>().is_err());
    }
}
