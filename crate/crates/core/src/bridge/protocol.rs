//! Wire format: UTF-8, one JSON object per LF-terminated line.
//!
//! ```text
//! → {"id":1,"op":"capabilities"}
//! ← {"id":1,"ok":true,"result":{"languages":["en","de"],"qe":true}}
//! → {"id":2,"op":"duration","payload":{"text":"Hello there","language":"en"}}
//! ← {"id":2,"ok":true,"result":{"seconds":1.1}}
//! → {"id":3,"op":"qe","payload":{"source_text":"…","translated_text":"…","source_language":"en","target_language":"de"}}
//! ← {"id":3,"ok":false,"error":{"code":"UNSUPPORTED_LANGUAGE","message":"…"}}
//! ```
//!
//! Responses may arrive in any order and are matched to requests by `id`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "payload", rename_all = "lowercase")]
pub enum RequestBody {
    Capabilities,
    Duration {
        text: String,
        language: String,
    },
    Qe {
        source_text: String,
        translated_text: String,
        source_language: String,
        target_language: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeRequest {
    pub id: u64,
    #[serde(flatten)]
    pub body: RequestBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    UnsupportedLanguage,
    EmptyText,
    ModelError,
    BadRequest,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::UnsupportedLanguage => "UNSUPPORTED_LANGUAGE",
            ErrorCode::EmptyText => "EMPTY_TEXT",
            ErrorCode::ModelError => "MODEL_ERROR",
            ErrorCode::BadRequest => "BAD_REQUEST",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeResponse {
    pub id: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl BridgeResponse {
    pub fn success(id: u64, result: serde_json::Value) -> Self {
        Self {
            id,
            ok: true,
            result: Some(result),
            error: None,
        }
    }

    pub fn failure(id: u64, code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            id,
            ok: false,
            result: None,
            error: Some(ErrorBody {
                code,
                message: message.into(),
            }),
        }
    }

    /// `ok` is set exactly when `error` is absent.
    pub fn is_well_formed(&self) -> bool {
        self.ok == self.error.is_none() && (!self.ok || self.result.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capabilities {
    pub languages: Vec<String>,
    #[serde(default)]
    pub qe: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn request_shapes() {
        let caps = BridgeRequest {
            id: 1,
            body: RequestBody::Capabilities,
        };
        assert_eq!(
            serde_json::to_value(&caps).unwrap(),
            json!({"id":1,"op":"capabilities"})
        );
        let parsed: BridgeRequest = serde_json::from_str(r#"{"op":"capabilities","id":1}"#).unwrap();
        assert_eq!(parsed, caps);

        let dur: BridgeRequest =
            serde_json::from_str(r#"{"op":"duration","id":2,"payload":{"text":"","language":"en"}}"#).unwrap();
        assert_eq!(
            dur.body,
            RequestBody::Duration {
                text: String::new(),
                language: "en".into()
            }
        );
    }

    #[test]
    fn response_shapes() {
        let r = BridgeResponse::failure(2, ErrorCode::EmptyText, "empty");
        assert_eq!(
            serde_json::to_value(&r).unwrap(),
            json!({"id":2,"ok":false,"error":{"code":"EMPTY_TEXT","message":"empty"}})
        );
        assert!(r.is_well_formed());
        let bad = BridgeResponse {
            id: 1,
            ok: true,
            result: None,
            error: None,
        };
        assert!(!bad.is_well_formed());
    }
}
