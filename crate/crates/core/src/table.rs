//! Strict numeric CSV tables shared by every file format in the crate.
//!
//! Lines starting with `#` are metadata comments; they are returned
//! separately so that formats can carry `# key: value` declarations.

use crate::error::{Error, Result};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct NumericTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    /// Rows paired with their 1-based line number in the source.
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Looks up a `# key: value` comment.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once(':')?;
            (k.trim() == key).then(|| v.trim())
        })
    }
}

/// Parses `text`, requiring the header to equal `expected` exactly.
pub fn parse_numeric_csv(source_name: &str, text: &str, expected: &[&str]) -> Result<NumericTable> {
    let mut comments = Vec::new();
    let mut body = String::with_capacity(text.len());
    // Source line of every record the reader will yield, in order.
    let mut record_lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            comments.push(rest.trim().to_string());
        } else if !t.is_empty() {
            record_lines.push(i + 1);
            body.push_str(line);
            body.push('\n');
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());

    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = record_lines.get(idx).copied().unwrap_or(0);
        let record = record.map_err(|e| Error::parse(source_name, line, e.to_string()))?;
        match &columns {
            None => {
                let header: Vec<String> = record.iter().map(str::to_string).collect();
                if header != expected {
                    return Err(Error::parse(
                        source_name,
                        line,
                        format!("expected header `{}`, found `{}`", expected.join(","), header.join(",")),
                    ));
                }
                columns = Some(header);
            }
            Some(cols) => {
                if record.len() != cols.len() {
                    return Err(Error::parse(
                        source_name,
                        line,
                        format!("expected {} fields, found {}", cols.len(), record.len()),
                    ));
                }
                let mut values = Vec::with_capacity(cols.len());
                for (field, name) in record.iter().zip(cols) {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| Error::parse(source_name, line, format!("column `{name}`: `{field}` is not a number")))?;
                    if !v.is_finite() {
                        return Err(Error::parse(source_name, line, format!("column `{name}` is not finite")));
                    }
                    values.push(v);
                }
                rows.push((line, values));
            }
        }
    }
    let columns = columns.ok_or_else(|| Error::parse(source_name, 1, "missing header"))?;
    Ok(NumericTable { comments, columns, rows })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_numeric_csv_file(path: &Path, expected: &[&str]) -> Result<NumericTable> {
    let text = read_to_string(path)?;
    parse_numeric_csv(&path.display().to_string(), &text, expected)
}

/// Checks that the column at `idx` strictly increases down the table.
pub fn require_strictly_increasing(source_name: &str, table: &NumericTable, idx: usize) -> Result<()> {
    for w in table.rows.windows(2) {
        if w[1].1[idx] <= w[0].1[idx] {
            return Err(Error::parse(
                source_name,
                w[1].0,
                format!("column `{}` must be strictly increasing", table.columns[idx]),
            ));
        }
    }
    Ok(())
}
