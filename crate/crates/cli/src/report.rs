use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const COLUMNS: [&str; 9] = [
    "scheme",
    "pk_dec",
    "sym_dec",
    "client_ms",
    "server_ms",
    "bytes_up",
    "bytes_down",
    "matched",
    "padded",
];

/// One scheme's query-phase costs. Counts are client-side; bytes are
/// client upload and download during the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: String,
    pub pk_dec: u64,
    pub sym_dec: u64,
    pub client_ms: f64,
    pub server_ms: f64,
    pub bytes_up: u64,
    pub bytes_down: u64,
    pub matched: usize,
    pub padded: usize,
}

impl ReportRow {
    fn cells(&self) -> [String; 9] {
        [
            self.scheme.clone(),
            self.pk_dec.to_string(),
            self.sym_dec.to_string(),
            format!("{:.3}", self.client_ms),
            format!("{:.3}", self.server_ms),
            self.bytes_up.to_string(),
            self.bytes_down.to_string(),
            self.matched.to_string(),
            self.padded.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(HarnessError::Config(format!(
                "unknown report format {other:?} (expected table, json or csv)"
            ))),
        }
    }
}

pub fn emit_report(rows: &[ReportRow], format: ReportFormat) -> Result<String, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Render("no rows to report".into()));
    }
    match format {
        ReportFormat::Table => Ok(render_table(rows)),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(|e| HarnessError::Render(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| HarnessError::Render(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| HarnessError::Render(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| HarnessError::Render(e.to_string()))
        }
    }
}

/// Scheme column left-aligned, numbers right-aligned, two spaces between
/// columns.
fn render_table(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 9]> = rows.iter().map(ReportRow::cells).collect();
    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|c| cells.iter().map(|r| r[c].len()).chain([COLUMNS[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let mut line = |fields: &[&str]| {
        let mut s = String::new();
        for (c, f) in fields.iter().enumerate() {
            if c > 0 {
                s.push_str("  ");
            }
            if c == 0 {
                let _ = write!(s, "{f:<w$}", w = widths[c]);
            } else {
                let _ = write!(s, "{f:>w$}", w = widths[c]);
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&COLUMNS);
    for r in &cells {
        let fields: Vec<&str> = r.iter().map(String::as_str).collect();
        line(&fields);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<ReportRow> {
        vec![
            ReportRow {
                scheme: "1".into(),
                pk_dec: 80,
                sym_dec: 3,
                client_ms: 1234.5678,
                server_ms: 0.25,
                bytes_up: 30,
                bytes_down: 123_456,
                matched: 3,
                padded: 3,
            },
            ReportRow {
                scheme: "revised".into(),
                pk_dec: 0,
                sym_dec: 13,
                client_ms: 0.1,
                server_ms: 0.05,
                bytes_up: 30,
                bytes_down: 4567,
                matched: 3,
                padded: 3,
            },
        ]
    }

    #[test]
    fn csv_has_header_and_nine_fields() {
        let out = emit_report(&rows()[..1], ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines[1].split(',').count(), 9);
        assert!(lines[1].starts_with("1,80,3,"));
    }

    #[test]
    fn json_roundtrips() {
        let out = emit_report(&rows(), ReportFormat::Json).unwrap();
        let back: Vec<ReportRow> = serde_json::from_str(&out).unwrap();
        assert_eq!(back, rows());
        let keys: Vec<String> = serde_json::from_str::<Vec<serde_json::Map<String, serde_json::Value>>>(&out)
            .unwrap()[0]
            .keys()
            .cloned()
            .collect();
        let mut expected: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
        expected.sort();
        assert_eq!(keys, expected);
    }

    #[test]
    fn csv_roundtrips() {
        let out = emit_report(&rows(), ReportFormat::Csv).unwrap();
        let back: Vec<ReportRow> = csv::Reader::from_reader(out.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows());
    }

    #[test]
    fn table_aligns_headers_over_columns() {
        let out = emit_report(&rows(), ReportFormat::Table).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        // every right-aligned column ends at the same offset on every line
        for col in &COLUMNS[1..] {
            let end = lines[0].find(col).unwrap() + col.len();
            for l in &lines[1..] {
                let before = &l[..end];
                assert!(!before.ends_with(' '), "{col} misaligned in {l:?}");
                assert!(l.len() == end || l.as_bytes()[end] == b' ');
            }
        }
        assert!(lines[2].starts_with("revised "));
        assert!(lines[1].contains("1234.568"));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!("xml".parse::<ReportFormat>(), Err(HarnessError::Config(_))));
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!(emit_report(&[], ReportFormat::Table).is_err());
    }
}
