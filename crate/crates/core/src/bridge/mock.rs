//! In-process stand-in for the scorer worker.
//!
//! Durations are `0.1 s × character count`; QE is `5 × Jaccard overlap` of the lowercased
//! word sets. Optional per-response jitter makes responses come back out of order.

use std::collections::BTreeSet;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener};
use std::sync::Mutex;
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::json;

use super::protocol::{BridgeRequest, BridgeResponse, ErrorCode, RequestBody};

#[derive(Debug, Clone)]
pub struct MockWorker {
    pub languages: Vec<String>,
    pub qe: bool,
    /// Upper bound on the random delay before each response, in milliseconds.
    pub max_delay_ms: u64,
    pub seed: u64,
}

impl Default for MockWorker {
    fn default() -> Self {
        Self {
            languages: ["en", "de", "es", "ru", "zh"].map(String::from).to_vec(),
            qe: true,
            max_delay_ms: 0,
            seed: 0x5eed,
        }
    }
}

pub fn mock_seconds(text: &str) -> f64 {
    0.1 * text.chars().count() as f64
}

pub fn mock_qe(source: &str, translated: &str) -> f64 {
    let words = |s: &str| -> BTreeSet<String> { s.split_whitespace().map(str::to_lowercase).collect() };
    let (a, b) = (words(source), words(translated));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    5.0 * a.intersection(&b).count() as f64 / union as f64
}

impl MockWorker {
    fn supports(&self, language: &str) -> bool {
        self.languages.iter().any(|l| l == language)
    }

    pub fn handle_line(&self, line: &str) -> BridgeResponse {
        match serde_json::from_str::<BridgeRequest>(line) {
            Ok(request) => self.handle(request),
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(serde_json::Value::as_u64))
                    .unwrap_or(0);
                BridgeResponse::failure(id, ErrorCode::BadRequest, e.to_string())
            }
        }
    }

    pub fn handle(&self, request: BridgeRequest) -> BridgeResponse {
        let id = request.id;
        match request.body {
            RequestBody::Capabilities => {
                BridgeResponse::success(id, json!({ "languages": self.languages, "qe": self.qe }))
            }
            RequestBody::Duration { text, language } => {
                if !self.supports(&language) {
                    BridgeResponse::failure(id, ErrorCode::UnsupportedLanguage, language)
                } else if text.trim().is_empty() {
                    BridgeResponse::failure(id, ErrorCode::EmptyText, "text is empty")
                } else {
                    BridgeResponse::success(id, json!({ "seconds": mock_seconds(&text) }))
                }
            }
            RequestBody::Qe {
                source_text,
                translated_text,
                source_language,
                target_language,
            } => {
                if !self.qe {
                    BridgeResponse::failure(id, ErrorCode::ModelError, "qe model not loaded")
                } else if let Some(l) = [&source_language, &target_language]
                    .into_iter()
                    .find(|l| !self.supports(l))
                {
                    BridgeResponse::failure(id, ErrorCode::UnsupportedLanguage, l.clone())
                } else if source_text.trim().is_empty() || translated_text.trim().is_empty() {
                    BridgeResponse::failure(id, ErrorCode::EmptyText, "text is empty")
                } else {
                    BridgeResponse::success(id, json!({ "score": mock_qe(&source_text, &translated_text) }))
                }
            }
        }
    }

    /// Answer every request line until `reader` hits EOF.
    pub fn serve<R: BufRead, W: Write + Send>(&self, reader: R, writer: W) -> io::Result<()> {
        let writer = Mutex::new(writer);
        let mut state = self.seed | 1;
        std::thread::scope(|scope| {
            for line in reader.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let response = self.handle_line(&line);
                let delay = if self.max_delay_ms == 0 {
                    0
                } else {
                    xorshift(&mut state) % (self.max_delay_ms + 1)
                };
                if delay == 0 {
                    write_response(&writer, &response)?;
                } else {
                    let writer = &writer;
                    scope.spawn(move || {
                        std::thread::sleep(Duration::from_millis(delay));
                        let _ = write_response(writer, &response);
                    });
                }
            }
            Ok(())
        })
    }

    /// Serve connections on `addr` from a background thread, one thread per connection.
    pub fn listen(self, addr: &str) -> io::Result<(SocketAddr, JoinHandle<()>)> {
        let listener = TcpListener::bind(addr)?;
        let local = listener.local_addr()?;
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let worker = self.clone();
                std::thread::spawn(move || {
                    if let Ok(read_half) = stream.try_clone() {
                        let _ = worker.serve(BufReader::new(read_half), stream);
                    }
                });
            }
        });
        Ok((local, handle))
    }
}

fn write_response<W: Write>(writer: &Mutex<W>, response: &BridgeResponse) -> io::Result<()> {
    let mut line = serde_json::to_string(response).expect("response serialises");
    line.push('\n');
    let mut w = writer.lock().unwrap_or_else(|p| p.into_inner());
    w.write_all(line.as_bytes())?;
    w.flush()
}

fn xorshift(state: &mut u64) -> u64 {
    let mut x = *state;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    *state = x;
    x
}
