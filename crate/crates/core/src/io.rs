//! Matrix files.
//!
//! JSON: `{"rows": m, "cols": m, "entries": [[re, im], ...]}` in row-major
//! order. CSV: one line per row, no header, alternating `re,im` columns.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m
                .row_major_entries()
                .into_iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parse(format!(
                "field `rows`/`cols`: dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::Parse(format!(
                "field `entries`: expected rows*cols = {} entries, found {}",
                self.rows * self.cols,
                self.entries.len()
            )));
        }
        let entries = self
            .entries
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        ComplexMatrix::from_row_major(self.rows, self.cols, entries)
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_matrix()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(m)).expect("matrix file serializes")
}

pub fn matrix_from_csv(text: &str) -> Result<ComplexMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        if record.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "line {}: odd number of columns ({}), expected re,im pairs",
                i + 1,
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len() / 2);
        for j in 0..record.len() / 2 {
            let parse = |k: usize| {
                record[k].parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "line {}, column {}: `{}` is not a number",
                        i + 1,
                        k + 1,
                        &record[k]
                    ))
                })
            };
            row.push(C64::new(parse(2 * j)?, parse(2 * j + 1)?));
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "line {}: expected {} complex entries, found {}",
            i + 1,
            cols,
            rows[i].len()
        )));
    }
    let n = rows.len();
    ComplexMatrix::from_row_major(n, cols, rows.into_iter().flatten().collect())
}

pub fn matrix_to_csv(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = (0..m.cols())
            .flat_map(|j| {
                let z = m.get(i, j);
                [z.re.to_string(), z.im.to_string()]
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a matrix, choosing CSV for a `.csv` extension and JSON otherwise.
pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)?;
    let parsed = if is_csv(path) {
        matrix_from_csv(&text)
    } else {
        matrix_from_json(&text)
    };
    parsed.map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let text = if is_csv(path) {
        matrix_to_csv(m)
    } else {
        matrix_to_json(m)
    };
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexMatrix {
        ComplexMatrix::from_row_major(
            2,
            2,
            vec![
                C64::new(0.1, -2.5),
                C64::new(1.0 / 3.0, 0.0),
                C64::new(-7e-300, 1e10),
                C64::new(0.0, 0.2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = sample();
        assert_eq!(
            matrix_from_json(&matrix_to_json(&m)).unwrap().as_matrix(),
            m.as_matrix()
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = sample();
        assert_eq!(
            matrix_from_csv(&matrix_to_csv(&m)).unwrap().as_matrix(),
            m.as_matrix()
        );
    }

    #[test]
    fn json_errors_name_the_field() {
        let err = matrix_from_json(r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("entries"), "{err}");
        let err = matrix_from_json(r#"{"rows":2,"entries":[]}"#).unwrap_err();
        assert!(err.to_string().contains("cols"), "{err}");
        let err =
            matrix_from_json(r#"{"rows":1,"cols":1,"entries":[[1,0]],"extra":1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
        let err = matrix_from_json(r#"{"rows":1,"cols":1,"entries":[[1]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn csv_errors() {
        assert!(matrix_from_csv("1,0,2\n").is_err());
        assert!(matrix_from_csv("1,0,2,0\n1,0\n").is_err());
        let err = matrix_from_csv("1,x\n").unwrap_err();
        assert!(err.to_string().contains("column 2"), "{err}");
        assert!(matrix_from_csv("").is_err());
    }
}
