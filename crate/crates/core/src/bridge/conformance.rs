//! Protocol checks any bridge worker must pass. Runs over a raw line channel so it can
//! exercise malformed input and out-of-order responses.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::protocol::{BridgeRequest, BridgeResponse, ErrorCode, RequestBody};

#[derive(Debug, Clone, PartialEq)]
pub struct ConformanceCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const UNSUPPORTED: &str = "xx-unsupported";

/// Run every check; `language` must be one the worker supports.
pub fn run_conformance<R: BufRead, W: Write>(reader: &mut R, writer: &mut W, language: &str) -> Vec<ConformanceCheck> {
    let mut channel = Channel { reader, writer };
    let mut checks = Vec::new();
    let mut record = |name: &'static str, outcome: Result<(), String>| {
        checks.push(ConformanceCheck {
            name,
            passed: outcome.is_ok(),
            detail: outcome.err().unwrap_or_default(),
        });
    };

    record("capabilities", channel.check_capabilities(language));
    record(
        "empty_text",
        channel.check_error(duration(2, "", language), ErrorCode::EmptyText),
    );
    record(
        "unsupported_language",
        channel.check_error(duration(3, "hello", UNSUPPORTED), ErrorCode::UnsupportedLanguage),
    );
    record("bad_request", channel.check_bad_request());
    record("batch_correlation", channel.check_batch(language));
    checks
}

fn duration(id: u64, text: &str, language: &str) -> String {
    serde_json::to_string(&BridgeRequest {
        id,
        body: RequestBody::Duration {
            text: text.into(),
            language: language.into(),
        },
    })
    .expect("request serialises")
}

struct Channel<'a, R, W> {
    reader: &'a mut R,
    writer: &'a mut W,
}

impl<R: BufRead, W: Write> Channel<'_, R, W> {
    fn send(&mut self, lines: &[String]) -> Result<(), String> {
        for line in lines {
            self.writer
                .write_all(line.as_bytes())
                .and_then(|_| self.writer.write_all(b"\n"))
                .map_err(|e| format!("write failed: {e}"))?;
        }
        self.writer.flush().map_err(|e| format!("flush failed: {e}"))
    }

    fn receive(&mut self, count: usize) -> Result<Vec<BridgeResponse>, String> {
        let mut out = Vec::with_capacity(count);
        let mut buf = Vec::new();
        for _ in 0..count {
            buf.clear();
            let n = self
                .reader
                .read_until(b'\n', &mut buf)
                .map_err(|e| format!("read failed: {e}"))?;
            if n == 0 {
                return Err(format!("stream closed after {} of {count} responses", out.len()));
            }
            if buf.last() != Some(&b'\n') {
                return Err("response line not LF-terminated".into());
            }
            let text = std::str::from_utf8(&buf[..buf.len() - 1]).map_err(|e| format!("response is not UTF-8: {e}"))?;
            let response: BridgeResponse =
                serde_json::from_str(text).map_err(|e| format!("response is not valid JSON: {e}"))?;
            if !response.is_well_formed() {
                return Err(format!("response {} violates ok XOR error", response.id));
            }
            out.push(response);
        }
        Ok(out)
    }

    fn roundtrip(&mut self, line: String) -> Result<BridgeResponse, String> {
        self.send(&[line])?;
        Ok(self.receive(1)?.remove(0))
    }

    fn check_capabilities(&mut self, language: &str) -> Result<(), String> {
        let r = self.roundtrip(r#"{"op":"capabilities","id":1}"#.into())?;
        if r.id != 1 || !r.ok {
            return Err(format!("expected ok response with id 1, got {r:?}"));
        }
        let languages = r
            .result
            .as_ref()
            .and_then(|v| v.get("languages"))
            .and_then(|v| v.as_array())
            .ok_or("capabilities result lacks `languages` array")?;
        if !languages.iter().any(|l| l.as_str() == Some(language)) {
            return Err(format!("capabilities do not list {language:?}"));
        }
        Ok(())
    }

    fn check_error(&mut self, line: String, code: ErrorCode) -> Result<(), String> {
        let sent: serde_json::Value = serde_json::from_str(&line).expect("own request is JSON");
        let r = self.roundtrip(line)?;
        if Some(r.id) != sent["id"].as_u64() {
            return Err(format!("id not echoed: sent {}, got {}", sent["id"], r.id));
        }
        match &r.error {
            Some(e) if !r.ok && e.code == code => Ok(()),
            _ => Err(format!("expected error {}, got {r:?}", code.as_str())),
        }
    }

    fn check_bad_request(&mut self) -> Result<(), String> {
        let r = self.roundtrip(r#"{"op":"teleport","id":7}"#.into())?;
        match &r.error {
            Some(e) if e.code == ErrorCode::BadRequest && r.id == 7 => Ok(()),
            _ => Err(format!("expected BAD_REQUEST for id 7, got {r:?}")),
        }
    }

    fn check_batch(&mut self, language: &str) -> Result<(), String> {
        let texts = [
            "one",
            "two words",
            "Grüße aus Köln",
            "数据 与 时间",
            "a somewhat longer sentence with several words in it",
        ];
        let mut expected = BTreeMap::new();
        let mut lines = Vec::new();
        for round in 0..4u64 {
            for (k, text) in texts.iter().enumerate() {
                let id = 100 + round * 10 + k as u64;
                expected.insert(id, *text);
                lines.push(duration(id, text, language));
            }
        }
        self.send(&lines)?;
        let responses = self.receive(lines.len())?;

        let mut seen: BTreeMap<u64, f64> = BTreeMap::new();
        for r in &responses {
            if !expected.contains_key(&r.id) {
                return Err(format!("unknown id {}", r.id));
            }
            let seconds = r
                .result
                .as_ref()
                .and_then(|v| v.get("seconds"))
                .and_then(|v| v.as_f64())
                .ok_or_else(|| format!("response {} lacks seconds: {r:?}", r.id))?;
            if seconds <= 0.0 {
                return Err(format!("response {} has nonpositive seconds {seconds}", r.id));
            }
            if seen.insert(r.id, seconds).is_some() {
                return Err(format!("id {} answered twice", r.id));
            }
        }
        // Same text must give the same duration on every round.
        for (k, _) in texts.iter().enumerate() {
            let values: Vec<f64> = (0..4u64).map(|round| seen[&(100 + round * 10 + k as u64)]).collect();
            if values.windows(2).any(|w| w[0] != w[1]) {
                return Err(format!("nondeterministic durations for text {k}: {values:?}"));
            }
        }
        Ok(())
    }
}
