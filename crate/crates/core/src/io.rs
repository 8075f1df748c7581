//! Delimiter-separated vector files: one point per row, fields split on
//! commas, semicolons, tabs or spaces. Blank lines and `#` comments are
//! skipped.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// 1-based line number in the source.
    pub line: usize,
    pub id: Option<String>,
    pub values: Vec<f64>,
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|f| !f.is_empty())
}

/// Parses rows; with `with_ids` the first field of each row is its id.
/// `arity`, when given, is the required number of numeric fields.
pub fn parse_rows(text: &str, with_ids: bool, arity: Option<usize>) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut expected = arity;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut it = fields(content);
        let id = if with_ids {
            Some(
                it.next()
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: "missing id".into(),
                    })?
                    .to_string(),
            )
        } else {
            None
        };
        let values = it
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        match expected {
            Some(n) if n != values.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {n} values, found {}", values.len()),
                })
            }
            None => expected = Some(values.len()),
            _ => {}
        }
        rows.push(Row { line, id, values });
    }
    Ok(rows)
}

pub fn parse_vectors(text: &str, arity: Option<usize>) -> Result<Vec<Vec<f64>>> {
    Ok(parse_rows(text, false, arity)?
        .into_iter()
        .map(|r| r.values)
        .collect())
}

pub fn read_vectors(path: &Path, arity: Option<usize>) -> Result<Vec<Vec<f64>>> {
    parse_vectors(&std::fs::read_to_string(path)?, arity)
}

/// Comma-separated rows in shortest round-trip form (exponent notation for
/// very large or small magnitudes), after an
/// optional `#` header line.
pub fn format_vectors<'a>(
    header: Option<&str>,
    rows: impl IntoIterator<Item = &'a [f64]>,
) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        let _ = writeln!(out, "# {h}");
    }
    for row in rows {
        let parts: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", parts.join(","));
    }
    out
}
