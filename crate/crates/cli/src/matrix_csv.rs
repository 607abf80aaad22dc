//! The error-matrix CSV format.
//!
//! UTF-8, comma separated. The first row is `id,<case label>...`; every
//! following row is an individual label and one decimal error per case.
//! Blank lines are rejected.

use std::io::Write;
use std::path::Path;

use lexicase_core::ErrorMatrix;

use crate::error::{CliError, Result};

pub fn read_matrix(path: &Path) -> Result<ErrorMatrix> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_matrix(&text, &path.display().to_string())
}

/// Parses `text`; `source` names it in error messages.
pub fn parse_matrix(text: &str, source: &str) -> Result<ErrorMatrix> {
    let err = |line: u64, message: String| CliError::Parse {
        path: source.to_string(),
        line,
        message,
    };
    if text.trim().is_empty() {
        return Err(err(1, "empty matrix file".into()));
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    for (k, line) in body.split('\n').enumerate() {
        if line.trim().is_empty() {
            return Err(err(k as u64 + 1, "blank line".into()));
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| err(1, e.to_string()))?,
        None => return Err(err(1, "missing header".into())),
    };
    if header.get(0) != Some("id") {
        return Err(err(1, "header must start with `id`".into()));
    }
    let case_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if case_labels.is_empty() {
        return Err(err(1, "header names no cases".into()));
    }

    let mut labels = Vec::new();
    let mut values = Vec::new();
    for record in records {
        let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != case_labels.len() + 1 {
            return Err(err(
                line,
                format!("expected {} fields, found {}", case_labels.len() + 1, record.len()),
            ));
        }
        labels.push(record[0].to_string());
        for (field, case) in record.iter().skip(1).zip(&case_labels) {
            let v = parse_value(field)
                .ok_or_else(|| err(line, format!("case {case}: `{field}` is not a decimal number")))?;
            if v < 0.0 {
                return Err(err(line, format!("case {case}: negative error {field}")));
            }
            values.push(v);
        }
    }
    if labels.is_empty() {
        return Err(err(2, "no individuals".into()));
    }
    let m = ErrorMatrix::new(labels.len(), case_labels.len(), values)?;
    Ok(m.with_labels(Some(labels), Some(case_labels))?)
}

/// Plain decimals with an optional exponent; no signs other than `-`, no
/// `inf` or `nan`.
fn parse_value(field: &str) -> Option<f64> {
    let digits = field.strip_prefix('-').unwrap_or(field);
    let ok = digits.starts_with(|c: char| c.is_ascii_digit() || c == '.')
        && digits
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'));
    if !ok {
        return None;
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes `m` in the format [`parse_matrix`] reads. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_matrix<W: Write>(m: &ErrorMatrix, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let case_label = |c: usize| m.case_labels().map_or_else(|| format!("c{c}"), |l| l[c].clone());
    let ind_label = |i: usize| m.individual_labels().map_or_else(|| format!("i{i}"), |l| l[i].clone());
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain((0..m.n_cases()).map(case_label))
        .collect();
    w.write_record(&header)?;
    for i in 0..m.n_individuals() {
        let row: Vec<String> = std::iter::once(ind_label(i))
            .chain(m.row(i).iter().map(|v| v.to_string()))
            .collect();
        w.write_record(&row)?;
    }
    w.flush()
}
