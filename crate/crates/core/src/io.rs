//! CSV tables and JSON records written by the command-line driver.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::linalg::Matrix;
use crate::Complex64;

/// Numeric table with a header row. Floats are written with 17
/// significant digits so values round-trip exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Table of complex values as `index, re, im`.
    pub fn complex_column(name: &str, values: &[Complex64]) -> Self {
        let mut t = Table::new(&["index".to_string(), format!("{name}_re"), format!("{name}_im")]);
        for (i, z) in values.iter().enumerate() {
            t.push(vec![i as f64, z.re, z.im]);
        }
        t
    }

    /// Sparse `(row, col, value)` listing of the non-zero entries.
    pub fn from_matrix(m: &Matrix<f64>) -> Self {
        let mut t = Table::new(&["row", "col", "value"]);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    t.push(vec![i as f64, j as f64, m[(i, j)]]);
                }
            }
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format_value(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_csv())
    }
}

/// Integers are written plainly, everything else as `{:.16e}`.
pub fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        let mut s = String::new();
        let _ = write!(s, "{v:.16e}");
        s
    }
}

pub fn parse_csv(text: &str) -> Option<Table> {
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().ok())
                .collect::<Option<Vec<f64>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Table { header, rows })
}

/// `{command, params, metrics, status}` summary of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub params: Value,
    pub metrics: Value,
    pub status: String,
}

/// Error record printed when a run fails.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        let mut t = Table::new(&["i", "x"]);
        for (i, x) in [0.1, -1.0 / 3.0, 1e-300, 2.5e17, std::f64::consts::PI]
            .iter()
            .enumerate()
        {
            t.push(vec![i as f64, *x]);
        }
        let back = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn complex_values_use_column_pairs() {
        let t = Table::complex_column("z", &[Complex64::new(1.0, -0.5)]);
        assert_eq!(t.header, vec!["index", "z_re", "z_im"]);
        assert_eq!(t.to_csv().lines().nth(1).unwrap(), "0,1,-5.0000000000000000e-1");
    }
}
