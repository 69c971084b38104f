// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delimited input: one row per sequence, comma or tab separated, an
//! optional header row of location labels and an optional leading label
//! column. Empty fields and `NA` mark missing observations.

use std::fs;
use std::path::Path;

use anyhow::Context;

use crate::Invalid;

/// Raw matrix as read from disk, before missing-column removal.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    /// Location labels from the header row, one per column.
    pub labels: Option<Vec<String>>,
    /// Sequence names from the label column, or `seq1`, `seq2`, ...
    pub names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan")
}

fn is_value(field: &str) -> bool {
    is_missing(field) || field.parse::<f64>().is_ok()
}

pub fn read_matrix(path: &Path, force_header: bool) -> anyhow::Result<Matrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text, force_header).with_context(|| format!("in {}", path.display()))
}

pub fn parse_matrix(text: &str, force_header: bool) -> anyhow::Result<Matrix> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .ok_or_else(|| Invalid("input has no data rows".into()))?;
    let delimiter = if first.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Invalid(format!("malformed input: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, rec.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    if records.is_empty() {
        return Err(Invalid("input has no data rows".into()).into());
    }

    let header = force_header || records[0].1.iter().skip(1).any(|f| !is_value(f));
    let body = &records[usize::from(header)..];
    if body.is_empty() {
        return Err(Invalid("input has a header but no data rows".into()).into());
    }
    let labelled = !is_value(&body[0].1[0]);

    let mut names = Vec::with_capacity(body.len());
    let mut rows = Vec::with_capacity(body.len());
    for (i, (line, fields)) in body.iter().enumerate() {
        let (name, values) = if labelled {
            (fields[0].clone(), &fields[1..])
        } else {
            (format!("seq{}", i + 1), &fields[..])
        };
        let row = values
            .iter()
            .enumerate()
            .map(|(j, f)| {
                if is_missing(f) {
                    return Ok(None);
                }
                match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(Invalid(format!(
                        "line {line}, field {}: '{f}' is not a finite number",
                        j + 1 + usize::from(labelled)
                    ))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Invalid(format!(
                    "line {line} has {} values but line {} has {first}",
                    row.len(),
                    body[0].0
                ))
                .into());
            }
        }
        names.push(name);
        rows.push(row);
    }

    let labels = header.then(|| {
        let h = &records[0].1;
        let skip = usize::from(labelled && h.len() > rows[0].len());
        h[skip..].to_vec()
    });
    if let Some(l) = &labels {
        if l.len() != rows[0].len() {
            return Err(Invalid(format!(
                "header has {} labels for {} columns",
                l.len(),
                rows[0].len()
            ))
            .into());
        }
    }
    Ok(Matrix {
        labels,
        names,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_comma_rows() {
        let m = parse_matrix("1,2,3\n4,NA,6\n", false).unwrap();
        assert_eq!(m.labels, None);
        assert_eq!(m.names, vec!["seq1", "seq2"]);
        assert_eq!(m.rows[1], vec![Some(4.0), None, Some(6.0)]);
    }

    #[test]
    fn tab_with_header_and_labels() {
        let text = "id\tp1\tp2\tp3\nA\t1\t\t3\nB\t4\t5\t6\n";
        let m = parse_matrix(text, false).unwrap();
        assert_eq!(m.labels.unwrap(), vec!["p1", "p2", "p3"]);
        assert_eq!(m.names, vec!["A", "B"]);
        assert_eq!(m.rows[0][1], None);
    }

    #[test]
    fn header_without_corner_cell() {
        let m = parse_matrix("p1,p2\nA,1,2\n", false).unwrap();
        assert_eq!(m.labels.unwrap(), vec!["p1", "p2"]);
    }

    #[test]
    fn numeric_header_needs_the_flag() {
        let m = parse_matrix("10,20,30\n1,2,3\n", true).unwrap();
        assert_eq!(m.labels.unwrap(), vec!["10", "20", "30"]);
        assert_eq!(m.rows.len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_matrix("1,2,3\n4,x5,6\n", false).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_matrix("1,2,3\n4,5\n", false).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_matrix("1,inf\n", false).is_err());
        assert!(parse_matrix("\n# only a comment\n", false).is_err());
    }
}
