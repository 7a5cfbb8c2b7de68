//! Leaderboard rendering in Markdown and LaTeX.

use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::LanguagePair;
use crate::evaluation::{rank_systems, SystemReport};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("report for {system} is for {found}, table is for {expected}")]
    MixedLanguagePairs {
        system: String,
        expected: LanguagePair,
        found: LanguagePair,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Latex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortOrder {
    /// Case-insensitive by system name.
    #[default]
    Alphabetical,
    ByAicm,
}

/// Layout of one I/Q/A table. A value is bold when its displayed (rounded) value is within
/// the column's margin of the column best: lowest for I, highest for Q and A.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub language_pair: LanguagePair,
    pub bold_margin_icm: f64,
    pub bold_margin_q_a: f64,
    pub sort: SortOrder,
}

impl TableSpec {
    pub fn new(language_pair: LanguagePair) -> Self {
        Self {
            language_pair,
            bold_margin_icm: 0.03,
            bold_margin_q_a: 0.02,
            sort: SortOrder::Alphabetical,
        }
    }

    pub fn with_margins(mut self, icm: f64, q_a: f64) -> Self {
        self.bold_margin_icm = icm.max(0.0);
        self.bold_margin_q_a = q_a.max(0.0);
        self
    }
}

/// Round half-up to two decimals.
pub fn round2(value: f64) -> f64 {
    let scaled = value * 100.0;
    let floor = scaled.floor();
    // Values like 2.675 land a hair below .5 after scaling; treat them as the tie they are.
    let rounded = if scaled - floor >= 0.5 - 1e-9 {
        floor + 1.0
    } else {
        floor
    };
    rounded / 100.0
}

/// Two-decimal display with trailing zeros trimmed: `3.2636 → "3.26"`, `2.9 → "2.9"`, `3.0 → "3"`.
pub fn format_metric(value: f64) -> String {
    let s = format!("{:.2}", round2(value));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        other => other.to_string(),
    }
}

const DASH: &str = "-";

struct Row {
    name: String,
    cells: Option<[f64; 3]>,
}

fn bold_mask(rows: &[Row], spec: &TableSpec) -> Vec<[bool; 3]> {
    let column = |k: usize| rows.iter().filter_map(move |r| r.cells.map(|c| c[k]));
    let best_i = column(0).fold(f64::INFINITY, f64::min);
    let best_q = column(1).fold(f64::NEG_INFINITY, f64::max);
    let best_a = column(2).fold(f64::NEG_INFINITY, f64::max);
    const EPS: f64 = 1e-9;
    rows.iter()
        .map(|r| match r.cells {
            Some([i, q, a]) => [
                i <= best_i + spec.bold_margin_icm + EPS,
                q >= best_q - spec.bold_margin_q_a - EPS,
                a >= best_a - spec.bold_margin_q_a - EPS,
            ],
            None => [false; 3],
        })
        .collect()
}

pub fn render_table(reports: &[SystemReport], spec: &TableSpec, format: Format) -> Result<String, ReportError> {
    if let Some(r) = reports.iter().find(|r| *r.language_pair() != spec.language_pair) {
        return Err(ReportError::MixedLanguagePairs {
            system: r.system_name().to_string(),
            expected: spec.language_pair.clone(),
            found: r.language_pair().clone(),
        });
    }
    let ordered: Vec<&SystemReport> = match spec.sort {
        SortOrder::ByAicm => rank_systems(reports),
        SortOrder::Alphabetical => {
            let mut v: Vec<&SystemReport> = reports.iter().collect();
            v.sort_by(|a, b| {
                a.system_name()
                    .to_lowercase()
                    .cmp(&b.system_name().to_lowercase())
                    .then_with(|| a.system_name().cmp(b.system_name()))
            });
            v
        }
    };
    let rows: Vec<Row> = ordered
        .iter()
        .map(|r| Row {
            name: r.system_name().to_string(),
            cells: r
                .aggregate()
                .map(|a| [round2(a.mean_icm), round2(a.mean_qe), round2(a.aicm_from_means)]),
        })
        .collect();
    let bold = bold_mask(&rows, spec);
    let target = &spec.language_pair.target;

    let mut out = String::new();
    match format {
        Format::Markdown => {
            writeln!(out, "| Model | {target}-I | {target}-Q | {target}-A |").unwrap();
            out.push_str("|---|---|---|---|\n");
            for (row, b) in rows.iter().zip(&bold) {
                let cells = render_cells(row, b, |v| format!("**{v}**"));
                writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    escape_markdown(&row.name),
                    cells[0],
                    cells[1],
                    cells[2]
                )
                .unwrap();
            }
        }
        Format::Latex => {
            out.push_str("\\begin{table}[H]\n\\centering\n\\begin{tabular}{|l|c|c|c|}\n\\hline\n");
            writeln!(out, "Model & {target}-I & {target}-Q & {target}-A  \\\\").unwrap();
            out.push_str("\\hline\n");
            for (row, b) in rows.iter().zip(&bold) {
                let cells = render_cells(row, b, |v| format!("\\textbf{{{v}}}"));
                writeln!(
                    out,
                    "{}& {}& {}& {}\\\\",
                    escape_latex(&row.name),
                    cells[0],
                    cells[1],
                    cells[2]
                )
                .unwrap();
            }
            out.push_str("\\hline\n\\end{tabular}\n\\end{table}\n");
        }
    }
    Ok(out)
}

fn render_cells(row: &Row, bold: &[bool; 3], emphasise: impl Fn(&str) -> String) -> [String; 3] {
    match row.cells {
        None => [DASH.to_string(), DASH.to_string(), DASH.to_string()],
        Some(values) => {
            let mut cells: [String; 3] = Default::default();
            for k in 0..3 {
                let text = format_metric(values[k]);
                cells[k] = if bold[k] { emphasise(&text) } else { text };
            }
            cells
        }
    }
}

fn escape_latex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '_' | '&' | '%' | '$' | '#' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

fn escape_markdown(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Ranked leaderboard with coverage and flag codes.
pub fn render_ranking(reports: &[SystemReport], format: Format) -> String {
    let ranked = rank_systems(reports);
    let mut rows = Vec::with_capacity(ranked.len());
    let mut rank = 0;
    for r in ranked {
        let (rank_cell, metrics) = match r.aggregate() {
            Some(a) => {
                rank += 1;
                (
                    rank.to_string(),
                    [
                        format_metric(a.mean_icm),
                        format_metric(a.mean_qe),
                        format_metric(a.aicm_from_means),
                    ],
                )
            }
            None => (DASH.to_string(), [DASH.to_string(), DASH.to_string(), DASH.to_string()]),
        };
        let flags: Vec<&str> = r.flags().iter().map(|f| f.code()).collect();
        rows.push([
            rank_cell,
            r.system_name().to_string(),
            metrics[0].clone(),
            metrics[1].clone(),
            metrics[2].clone(),
            format!("{:.1}%", r.coverage() * 100.0),
            flags.join(","),
        ]);
    }

    let header = ["Rank", "System", "I", "Q", "A", "Coverage", "Flags"];
    let mut out = String::new();
    match format {
        Format::Markdown => {
            writeln!(out, "| {} |", header.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(header.len())).unwrap();
            for row in rows {
                let mut row = row;
                row[1] = escape_markdown(&row[1]);
                writeln!(out, "| {} |", row.join(" | ")).unwrap();
            }
        }
        Format::Latex => {
            out.push_str("\\begin{tabular}{|r|l|c|c|c|r|l|}\n\\hline\n");
            writeln!(out, "{} \\\\", header.join(" & ")).unwrap();
            out.push_str("\\hline\n");
            for row in rows {
                let mut row = row;
                row[1] = escape_latex(&row[1]);
                row[5] = row[5].replace('%', "\\%");
                row[6] = escape_latex(&row[6]);
                writeln!(out, "{} \\\\", row.join(" & ")).unwrap();
            }
            out.push_str("\\hline\n\\end{tabular}\n");
        }
    }
    out
}
