use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use serde::Deserialize;

use super::{CorpusError, LanguagePair, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubmissionFormat {
    /// One translation per line, aligned with corpus order.
    Aligned,
    /// JSONL records `{"id", "text"}`; may cover a subset of the corpus.
    Records,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmissionManifest {
    pub system_name: String,
    pub language_pair: LanguagePair,
    pub format: SubmissionFormat,
}

/// One system's translations for one language pair, keyed by segment id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub system_name: String,
    pub language_pair: LanguagePair,
    pub translations: BTreeMap<String, String>,
}

impl Submission {
    pub fn new(system_name: impl Into<String>, language_pair: LanguagePair) -> Self {
        Self {
            system_name: system_name.into(),
            language_pair,
            translations: BTreeMap::new(),
        }
    }

    pub fn with_translation(mut self, id: impl Into<String>, text: impl Into<String>) -> Self {
        self.translations.insert(id.into(), text.into());
        self
    }

    pub fn translation(&self, id: &str) -> Option<&str> {
        self.translations.get(id).map(String::as_str)
    }
}

#[derive(Deserialize)]
struct Record {
    id: String,
    text: String,
}

pub fn load_submission(
    mut stream: impl Read,
    manifest: &SubmissionManifest,
    corpus: &[Segment],
) -> Result<Submission, CorpusError> {
    if manifest.system_name.trim().is_empty() {
        return Err(CorpusError::EmptySystemName);
    }
    let mut bytes = Vec::new();
    stream.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CorpusError::Encoding {
        offset: e.valid_up_to(),
    })?;
    let mut submission = Submission::new(&manifest.system_name, manifest.language_pair.clone());

    match manifest.format {
        SubmissionFormat::Aligned => {
            let lines: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
            if lines.len() != corpus.len() {
                return Err(CorpusError::Alignment {
                    expected: corpus.len(),
                    got: lines.len(),
                });
            }
            for (segment, line) in corpus.iter().zip(lines) {
                submission
                    .translations
                    .insert(segment.id().to_string(), line.to_string());
            }
        }
        SubmissionFormat::Records => {
            let known: HashSet<&str> = corpus.iter().map(Segment::id).collect();
            let mut unknown = Vec::new();
            for (index, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: Record = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                    line: index + 1,
                    message: e.to_string(),
                })?;
                if !known.contains(record.id.as_str()) {
                    unknown.push(record.id);
                    continue;
                }
                if submission.translations.contains_key(&record.id) {
                    return Err(CorpusError::DuplicateId {
                        id: record.id,
                        line: index + 1,
                    });
                }
                submission.translations.insert(record.id, record.text);
            }
            if !unknown.is_empty() {
                return Err(CorpusError::UnknownIds(unknown));
            }
        }
    }
    Ok(submission)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<Segment> {
        ["s1", "s2", "s3"]
            .iter()
            .map(|id| Segment::new(*id, format!("text {id}"), "en", None, 3, 0))
            .collect()
    }

    fn manifest(format: SubmissionFormat) -> SubmissionManifest {
        SubmissionManifest {
            system_name: "sys".into(),
            language_pair: LanguagePair::new("en", "de"),
            format,
        }
    }

    #[test]
    fn aligned_lines() {
        let s = load_submission(
            "eins\nzwei\ndrei\n".as_bytes(),
            &manifest(SubmissionFormat::Aligned),
            &corpus(),
        )
        .unwrap();
        assert_eq!(s.translation("s1"), Some("eins"));
        assert_eq!(s.translation("s3"), Some("drei"));
        assert_eq!(s.translations.len(), 3);
    }

    #[test]
    fn aligned_count_mismatch() {
        let err = load_submission(
            "eins\nzwei\n".as_bytes(),
            &manifest(SubmissionFormat::Aligned),
            &corpus(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Alignment { expected: 3, got: 2 }));
    }

    #[test]
    fn records_partial_coverage() {
        let data = "{\"id\":\"s1\",\"text\":\"eins\"}\n{\"id\":\"s3\",\"text\":\"drei\"}\n";
        let s = load_submission(data.as_bytes(), &manifest(SubmissionFormat::Records), &corpus()).unwrap();
        assert_eq!(s.translations.keys().collect::<Vec<_>>(), vec!["s1", "s3"]);
    }

    #[test]
    fn records_unknown_ids_listed() {
        let data = "{\"id\":\"s9\",\"text\":\"x\"}\n{\"id\":\"s1\",\"text\":\"y\"}\n{\"id\":\"q\",\"text\":\"z\"}\n";
        match load_submission(data.as_bytes(), &manifest(SubmissionFormat::Records), &corpus()) {
            Err(CorpusError::UnknownIds(ids)) => assert_eq!(ids, vec!["s9", "q"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_system_name() {
        let mut m = manifest(SubmissionFormat::Aligned);
        m.system_name = " ".into();
        assert!(matches!(
            load_submission("".as_bytes(), &m, &[]),
            Err(CorpusError::EmptySystemName)
        ));
    }
}
