use std::collections::BTreeSet;
use std::sync::Arc;

use super::{DurationPredictor, PredictError};
use crate::bridge::{BridgeClient, BridgeError, ErrorBody, ErrorCode};
use crate::metrics::DurationEstimate;
use crate::tokenize::count_tokens;

/// Duration predictor served by a bridge worker.
#[derive(Debug, Clone)]
pub struct BridgePredictor {
    client: Arc<BridgeClient>,
    id: String,
    languages: BTreeSet<String>,
}

impl BridgePredictor {
    /// Queries the worker's capabilities once, up front.
    pub fn new(client: Arc<BridgeClient>) -> Result<Self, BridgeError> {
        let caps = client.capabilities()?;
        Ok(Self {
            id: format!("bridge:{}", client.endpoint()),
            languages: caps.languages.into_iter().collect(),
            client,
        })
    }
}

fn remote_error(err: ErrorBody, language: &str) -> PredictError {
    match err.code {
        ErrorCode::EmptyText => PredictError::EmptyText,
        ErrorCode::UnsupportedLanguage => PredictError::UnsupportedLanguage(language.to_string()),
        code => PredictError::Remote {
            code: code.as_str().to_string(),
            message: err.message,
        },
    }
}

/// One estimate per input, in input order. A transport failure fails the whole batch;
/// worker-reported errors stay per item.
pub fn bridge_predict(
    client: &BridgeClient,
    predictor_id: &str,
    items: &[(&str, &str)],
) -> Result<Vec<Result<DurationEstimate<f64>, PredictError>>, BridgeError> {
    let results = client.durations(items)?;
    Ok(results
        .into_iter()
        .zip(items)
        .map(|(r, (text, language))| match r {
            Ok(seconds) => Ok(DurationEstimate::new(seconds, predictor_id, count_tokens(text))?),
            Err(e) => Err(remote_error(e, language)),
        })
        .collect())
}

impl DurationPredictor<f64> for BridgePredictor {
    fn id(&self) -> &str {
        &self.id
    }

    fn supported_languages(&self) -> BTreeSet<String> {
        self.languages.clone()
    }

    fn predict(&self, text: &str, language: &str) -> Result<DurationEstimate<f64>, PredictError> {
        self.predict_batch(&[(text, language)])
            .pop()
            .expect("one result per item")
    }

    fn predict_batch(&self, items: &[(&str, &str)]) -> Vec<Result<DurationEstimate<f64>, PredictError>> {
        match bridge_predict(&self.client, &self.id, items) {
            Ok(results) => results,
            Err(e) => items.iter().map(|_| Err(PredictError::Transport(e.clone()))).collect(),
        }
    }
}
