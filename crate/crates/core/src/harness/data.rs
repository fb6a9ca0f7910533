use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Numeric observations read from CSV, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: DMatrix<f64>,
    pub column_names: Option<Vec<String>>,
    /// Leading non-numeric column (dates), echoed in rolling output.
    pub labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Parses CSV with an optional header row and an optional leading
    /// label column. Every other field must be numeric.
    pub fn from_reader<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut records = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(records.len() + 1);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            records.push((line, rec));
        }
        if records.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "no data rows".into(),
            });
        }
        let numeric = |s: &str| s.parse::<f64>().is_ok();
        let skip = (records[0].1.len() > 1) as usize;
        let header = !records[0].1.iter().skip(skip).any(numeric);
        let column_names: Option<Vec<String>> =
            header.then(|| records[0].1.iter().map(String::from).collect());
        let body = &records[header as usize..];
        if body.is_empty() {
            return Err(Error::Parse {
                line: records[0].0,
                message: "header without data rows".into(),
            });
        }
        let has_labels = !numeric(&body[0].1[0]);
        let width = body[0].1.len();
        let d = width - has_labels as usize;
        if d == 0 {
            return Err(Error::Parse {
                line: body[0].0,
                message: "no numeric columns".into(),
            });
        }
        let mut values = Vec::with_capacity(body.len() * d);
        let mut labels = Vec::new();
        for (line, rec) in body {
            if rec.len() != width {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("expected {width} fields, found {}", rec.len()),
                });
            }
            let mut fields = rec.iter();
            if has_labels {
                labels.push(fields.next().unwrap_or_default().to_string());
            }
            for (j, f) in fields.enumerate() {
                let v: f64 = f.parse().map_err(|_| Error::Parse {
                    line: *line,
                    message: format!(
                        "column {}: '{f}' is not a number",
                        j + 1 + has_labels as usize
                    ),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("column {}: non-finite value", j + 1),
                    });
                }
                values.push(v);
            }
        }
        let column_names = column_names.map(|c| if has_labels { c[1..].to_vec() } else { c });
        Ok(Dataset {
            values: DMatrix::from_row_slice(body.len(), d, &values),
            column_names,
            labels: has_labels.then_some(labels),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f =
            std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(f)
    }
}

/// Parses a comma-separated vector such as `0,1.5,-2`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("'{p}' is not a number in '{s}'")))
        })
        .collect()
}
