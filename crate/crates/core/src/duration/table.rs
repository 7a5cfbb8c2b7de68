use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use serde::Deserialize;

use super::{DurationPredictor, PredictError};
use crate::metrics::DurationEstimate;
use crate::tokenize::count_tokens;

#[derive(Debug, Deserialize)]
struct Row {
    text: String,
    language: String,
    seconds: f64,
}

/// Precomputed durations, looked up by exact `(language, text)`.
///
/// Loaded from JSONL lines of `{"text", "language", "seconds"}`. Useful for replaying
/// measured TTS durations or another model's predictions.
#[derive(Debug, Clone)]
pub struct TablePredictor {
    id: String,
    entries: HashMap<(String, String), f64>,
}

impl TablePredictor {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            entries: HashMap::new(),
        }
    }

    pub fn insert(&mut self, language: &str, text: &str, seconds: f64) {
        self.entries.insert((language.to_string(), text.to_string()), seconds);
    }

    pub fn from_jsonl(id: impl Into<String>, reader: impl BufRead) -> Result<Self, String> {
        let mut table = Self::new(id);
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
            if !(row.seconds.is_finite() && row.seconds >= 0.0) {
                return Err(format!("line {}: seconds must be >= 0", i + 1));
            }
            table.insert(&row.language, &row.text, row.seconds);
        }
        Ok(table)
    }
}

impl DurationPredictor<f64> for TablePredictor {
    fn id(&self) -> &str {
        &self.id
    }

    fn supported_languages(&self) -> BTreeSet<String> {
        self.entries.keys().map(|(l, _)| l.clone()).collect()
    }

    fn predict(&self, text: &str, language: &str) -> Result<DurationEstimate<f64>, PredictError> {
        if text.trim().is_empty() {
            return Err(PredictError::EmptyText);
        }
        let seconds = self
            .entries
            .get(&(language.to_string(), text.to_string()))
            .ok_or(PredictError::Missing)?;
        Ok(DurationEstimate::new(*seconds, self.id.clone(), count_tokens(text))?)
    }
}
