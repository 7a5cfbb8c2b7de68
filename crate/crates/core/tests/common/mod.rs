#![allow(dead_code)]

use std::io::Write;

use isochrono::{AggregateMetrics, LanguagePair, SystemReport};

pub const FIXTURES: &str = include_str!("../fixtures/paper_tables.csv");

/// One published table row. `None` triples mark systems without a submission.
#[derive(Debug, Clone)]
pub struct Row {
    pub pair: String,
    pub system: String,
    pub triple: Option<(f64, f64, f64)>,
    pub bold: [bool; 3],
}

pub fn rows() -> Vec<Row> {
    let mut lines = FIXTURES.lines();
    assert_eq!(lines.next(), Some("pair,system,icm,qe,aicm,bold_icm,bold_qe,bold_aicm"));
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 8, "bad fixture line {line}");
            let triple = match (f[2], f[3], f[4]) {
                ("-", "-", "-") => None,
                (i, q, a) => Some((i.parse().unwrap(), q.parse().unwrap(), a.parse().unwrap())),
            };
            Row {
                pair: f[0].to_string(),
                system: f[1].to_string(),
                triple,
                bold: [f[5] == "1", f[6] == "1", f[7] == "1"],
            }
        })
        .collect()
}

pub fn rows_for(pair: &str) -> Vec<Row> {
    rows().into_iter().filter(|r| r.pair == pair).collect()
}

pub fn reports_for(pair: &str) -> Vec<SystemReport> {
    let lp: LanguagePair = pair.parse().unwrap();
    rows_for(pair)
        .into_iter()
        .map(|r| match r.triple {
            Some((i, q, _)) => SystemReport::scored(
                &r.system,
                lp.clone(),
                AggregateMetrics::from_means(i, q, 1).unwrap(),
                1.0,
            ),
            None => SystemReport::absent(&r.system, lp.clone()),
        })
        .collect()
}

/// Independent two-decimal rounding, half up, done in integer micro-units.
pub fn round2_oracle(x: f64) -> f64 {
    assert!(x >= 0.0);
    let micro: i64 = format!("{x:.6}").replace('.', "").parse().unwrap();
    ((micro + 5_000) / 10_000) as f64 / 100.0
}

/// Writes straight to the process stdout so the line survives libtest capture.
pub fn verdict(criterion: &str, ok: bool, detail: &str) {
    let line = format!("{} {criterion}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "{criterion}: {detail}");
}
