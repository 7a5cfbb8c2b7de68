//! CoVoST / CommonVoice TSV import.
//!
//! UTF-8, tab-separated, header row first, no quoting. Required columns: `id` (or `path`),
//! `sentence`, `translation`, `up_votes`, `down_votes`. A `locale` column, when present,
//! overrides the default source language per row.

use std::collections::HashSet;
use std::io::Read;

use super::{CorpusError, Segment};

/// A data row that was skipped, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowRejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsvImport {
    pub segments: Vec<Segment>,
    pub rejected: Vec<RowRejection>,
}

struct Columns {
    id: usize,
    sentence: usize,
    translation: usize,
    up_votes: usize,
    down_votes: usize,
    locale: Option<usize>,
    width: usize,
}

impl Columns {
    fn from_header(header: &str) -> Result<Self, CorpusError> {
        let names: Vec<&str> = header.split('\t').map(str::trim).collect();
        let find = |name: &str| names.iter().position(|n| *n == name);
        let require = |name: &str| find(name).ok_or_else(|| CorpusError::Schema(name.to_string()));
        let id = find("id")
            .or_else(|| find("path"))
            .ok_or_else(|| CorpusError::Schema("id".to_string()))?;
        Ok(Self {
            id,
            sentence: require("sentence")?,
            translation: require("translation")?,
            up_votes: require("up_votes")?,
            down_votes: require("down_votes")?,
            locale: find("locale"),
            width: names.len(),
        })
    }
}

pub fn import_covost_tsv(mut stream: impl Read, source_language: &str) -> Result<TsvImport, CorpusError> {
    let mut bytes = Vec::new();
    stream.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CorpusError::Encoding {
        offset: e.valid_up_to(),
    })?;

    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines
        .next()
        .filter(|h| !h.trim().is_empty())
        .ok_or_else(|| CorpusError::Schema("id".into()))?;
    let columns = Columns::from_header(header)?;

    let mut segments = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashSet::new();
    for (index, line) in lines.enumerate() {
        let line_no = index + 2;
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(line, &columns, source_language) {
            Ok(segment) => {
                if !seen.insert(segment.id().to_string()) {
                    return Err(CorpusError::DuplicateId {
                        id: segment.id().to_string(),
                        line: line_no,
                    });
                }
                segments.push(segment);
            }
            Err(reason) => rejected.push(RowRejection { line: line_no, reason }),
        }
    }
    Ok(TsvImport { segments, rejected })
}

fn parse_row(line: &str, columns: &Columns, default_language: &str) -> Result<Segment, String> {
    let cells: Vec<&str> = line.split('\t').collect();
    if cells.len() != columns.width {
        return Err(format!("expected {} cells, found {}", columns.width, cells.len()));
    }
    let nonempty = |index: usize, name: &str| {
        let v = cells[index].trim();
        if v.is_empty() {
            Err(format!("empty `{name}`"))
        } else {
            Ok(v)
        }
    };
    let votes = |index: usize, name: &str| -> Result<u32, String> {
        nonempty(index, name)?
            .parse()
            .map_err(|_| format!("`{name}` is not a nonnegative integer: {:?}", cells[index]))
    };
    let id = nonempty(columns.id, "id")?;
    let sentence = nonempty(columns.sentence, "sentence")?;
    let up = votes(columns.up_votes, "up_votes")?;
    let down = votes(columns.down_votes, "down_votes")?;
    let translation = Some(cells[columns.translation].trim())
        .filter(|t| !t.is_empty())
        .map(str::to_string);
    let language = columns
        .locale
        .map(|i| cells[i].trim())
        .filter(|l| !l.is_empty())
        .unwrap_or(default_language);
    Ok(Segment::new(id, sentence, language, translation, up, down))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "path\tsentence\ttranslation\tup_votes\tdown_votes\n";

    #[test]
    fn two_rows() {
        let data = format!("{HEADER}a.mp3\tHello there\tHallo\t4\t0\nb.mp3\ta b c\t\t2\t1\n");
        let import = import_covost_tsv(data.as_bytes(), "en").unwrap();
        assert!(import.rejected.is_empty());
        let [a, b] = &import.segments[..] else {
            panic!("two segments")
        };
        assert_eq!((a.id(), a.up_votes(), a.down_votes()), ("a.mp3", 4, 0));
        assert_eq!(a.reference_translation(), Some("Hallo"));
        assert_eq!((b.up_votes(), b.down_votes()), (2, 1));
        assert_eq!(b.token_count(), 3);
        assert_eq!(b.reference_translation(), None);
        assert_eq!(b.source_language(), "en");
    }

    #[test]
    fn missing_vote_column() {
        let data = "id\tsentence\ttranslation\tdown_votes\nx\thi\tho\t0\n";
        let err = import_covost_tsv(data.as_bytes(), "en").unwrap_err();
        assert!(matches!(&err, CorpusError::Schema(c) if c == "up_votes"), "{err}");
        assert!(err.to_string().contains("up_votes"));
    }

    #[test]
    fn missing_id_column() {
        let data = "sentence\ttranslation\tup_votes\tdown_votes\n";
        assert!(matches!(import_covost_tsv(data.as_bytes(), "en"), Err(CorpusError::Schema(c)) if c == "id"));
    }

    #[test]
    fn bad_rows_are_rejected_with_line_numbers() {
        let data = format!("{HEADER}a\tok\tx\t3\t0\nb\t\tx\t3\t0\nc\tfine\tx\tmany\t0\nd\tshort row\n");
        let import = import_covost_tsv(data.as_bytes(), "en").unwrap();
        assert_eq!(import.segments.len(), 1);
        let lines: Vec<usize> = import.rejected.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![3, 4, 5]);
    }

    #[test]
    fn duplicate_ids() {
        let data = format!("{HEADER}a\tone\tx\t3\t0\na\ttwo\tx\t3\t0\n");
        assert!(matches!(
            import_covost_tsv(data.as_bytes(), "en"),
            Err(CorpusError::DuplicateId { line: 3, .. })
        ));
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let mut data = HEADER.as_bytes().to_vec();
        let offset = data.len() + 2;
        data.extend_from_slice(b"a\t\xff\xfe\tx\t3\t0\n");
        match import_covost_tsv(&data[..], "en") {
            Err(CorpusError::Encoding { offset: o }) => assert_eq!(o, offset),
            other => panic!("expected encoding error, got {other:?}"),
        }
    }

    #[test]
    fn locale_column_and_crlf() {
        let data = "id\tsentence\ttranslation\tup_votes\tdown_votes\tlocale\r\nq\t你好\tHi\t3\t0\tzh\r\n";
        let import = import_covost_tsv(data.as_bytes(), "en").unwrap();
        assert_eq!(import.segments[0].source_language(), "zh");
        assert_eq!(import.segments[0].token_count(), 2);
    }
}
