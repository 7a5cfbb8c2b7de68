//! Reference-free translation quality estimation providers.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{BridgeClient, BridgeError, RequestBody};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QeError {
    #[error("no QE score for segment {segment_id:?} of system {system:?}")]
    Missing { segment_id: String, system: String },
    #[error("remote QE error {code}: {message}")]
    Remote { code: String, message: String },
    #[error("QE score is not finite")]
    NonFinite,
    #[error(transparent)]
    Transport(#[from] BridgeError),
}

/// Everything a provider may key on when scoring one translation.
#[derive(Debug, Clone, Copy)]
pub struct QeItem<'a> {
    pub segment_id: &'a str,
    pub system: &'a str,
    pub source_text: &'a str,
    pub translated_text: &'a str,
    pub source_language: &'a str,
    pub target_language: &'a str,
}

/// Deterministic quality score for a (source, translation) pair; higher is better.
pub trait QeProvider: Send + Sync {
    fn id(&self) -> &str;

    fn score(&self, item: &QeItem<'_>) -> Result<f64, QeError>;

    fn score_batch(&self, items: &[QeItem<'_>]) -> Vec<Result<f64, QeError>> {
        items.iter().map(|item| self.score(item)).collect()
    }
}

/// Same score for everything. For tests and dry runs.
#[derive(Debug, Clone)]
pub struct ConstantQe {
    value: f64,
    id: String,
}

impl ConstantQe {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            id: format!("constant:{value}"),
        }
    }
}

impl QeProvider for ConstantQe {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, _item: &QeItem<'_>) -> Result<f64, QeError> {
        Ok(self.value)
    }
}

/// One line of a precomputed QE file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeRecord {
    pub segment_id: String,
    pub system: String,
    pub score: f64,
}

/// Precomputed scores loaded from JSONL `{"segment_id", "system", "score"}`.
#[derive(Debug, Clone, Default)]
pub struct FileQe {
    id: String,
    scores: HashMap<(String, String), f64>,
}

impl FileQe {
    pub fn from_records(id: impl Into<String>, records: impl IntoIterator<Item = QeRecord>) -> Self {
        Self {
            id: id.into(),
            scores: records
                .into_iter()
                .map(|r| ((r.system, r.segment_id), r.score))
                .collect(),
        }
    }

    pub fn from_jsonl(id: impl Into<String>, reader: impl BufRead) -> Result<Self, String> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: QeRecord = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
            records.push(record);
        }
        Ok(Self::from_records(id, records))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl QeProvider for FileQe {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, item: &QeItem<'_>) -> Result<f64, QeError> {
        let score = self
            .scores
            .get(&(item.system.to_string(), item.segment_id.to_string()))
            .copied()
            .ok_or_else(|| QeError::Missing {
                segment_id: item.segment_id.to_string(),
                system: item.system.to_string(),
            })?;
        if score.is_finite() {
            Ok(score)
        } else {
            Err(QeError::NonFinite)
        }
    }
}

/// QE scored by the bridge worker.
#[derive(Debug, Clone)]
pub struct BridgeQe {
    client: Arc<BridgeClient>,
    id: String,
}

impl BridgeQe {
    pub fn new(client: Arc<BridgeClient>) -> Self {
        Self {
            id: format!("bridge:{}", client.endpoint()),
            client,
        }
    }
}

impl QeProvider for BridgeQe {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, item: &QeItem<'_>) -> Result<f64, QeError> {
        self.score_batch(std::slice::from_ref(item))
            .pop()
            .expect("one result per item")
    }

    fn score_batch(&self, items: &[QeItem<'_>]) -> Vec<Result<f64, QeError>> {
        let bodies = items
            .iter()
            .map(|i| RequestBody::Qe {
                source_text: i.source_text.to_string(),
                translated_text: i.translated_text.to_string(),
                source_language: i.source_language.to_string(),
                target_language: i.target_language.to_string(),
            })
            .collect();
        match self.client.qe_scores(bodies) {
            Ok(results) => results
                .into_iter()
                .map(|r| {
                    r.map_err(|e| QeError::Remote {
                        code: e.code.as_str().to_string(),
                        message: e.message,
                    })
                })
                .collect(),
            Err(e) => items.iter().map(|_| Err(QeError::Transport(e.clone()))).collect(),
        }
    }
}
