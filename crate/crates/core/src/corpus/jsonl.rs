//! Canonical corpus form: one JSON object per LF-terminated line.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CorpusError, Segment};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record<'a> {
    id: std::borrow::Cow<'a, str>,
    source_text: std::borrow::Cow<'a, str>,
    source_language: std::borrow::Cow<'a, str>,
    reference_translation: Option<std::borrow::Cow<'a, str>>,
    up_votes: u32,
    down_votes: u32,
}

pub fn write_corpus_jsonl(segments: &[Segment], mut out: impl Write) -> std::io::Result<()> {
    for s in segments {
        let record = Record {
            id: s.id().into(),
            source_text: s.source_text().into(),
            source_language: s.source_language().into(),
            reference_translation: s.reference_translation().map(Into::into),
            up_votes: s.up_votes(),
            down_votes: s.down_votes(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_corpus_jsonl(reader: impl BufRead) -> Result<Vec<Segment>, CorpusError> {
    let mut segments = Vec::new();
    let mut seen = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => CorpusError::Malformed {
                line: line_no,
                message: "not valid UTF-8".into(),
            },
            _ => CorpusError::Io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(r.id.to_string()) {
            return Err(CorpusError::DuplicateId {
                id: r.id.into_owned(),
                line: line_no,
            });
        }
        segments.push(Segment::new(
            r.id,
            r.source_text,
            r.source_language,
            r.reference_translation.map(|t| t.into_owned()),
            r.up_votes,
            r.down_votes,
        ));
    }
    Ok(segments)
}
