//! Matrix file formats: headerless CSV (one row per line) and JSON
//! `{"m": .., "n": .., "data": [[..], ..]}`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// Guesses from the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub m: usize,
    pub n: usize,
    pub data: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(a: &DMatrix<f64>) -> Self {
        MatrixJson {
            m: a.nrows(),
            n: a.ncols(),
            data: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.m || self.data.iter().any(|r| r.len() != self.n) {
            return Err(Error::Shape(format!(
                "declared {}x{} does not match data",
                self.m, self.n
            )));
        }
        let flat: Vec<f64> = self.data.iter().flatten().copied().collect();
        check_finite(&flat, self.n)?;
        Ok(DMatrix::from_row_slice(self.m, self.n, &flat))
    }
}

fn check_finite(flat: &[f64], n: usize) -> Result<()> {
    match flat.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::NonFiniteEntry {
            row: k / n.max(1),
            col: k % n.max(1),
        }),
        None => Ok(()),
    }
}

pub fn parse_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("line {}: bad number {:?}", lineno + 1, tok.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    MatrixJson { m, n, data: rows }.to_matrix()
}

pub fn parse_json(text: &str) -> Result<DMatrix<f64>> {
    let parsed: MatrixJson = serde_json::from_str(text)?;
    parsed.to_matrix()
}

pub fn matrix_to_json_value(a: &DMatrix<f64>) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from_matrix(a)).expect("plain numbers serialize")
}

pub fn matrix_from_json_value(v: &serde_json::Value) -> Result<DMatrix<f64>> {
    let parsed: MatrixJson = serde_json::from_value(v.clone())?;
    parsed.to_matrix()
}

pub fn read_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    match format.unwrap_or_else(|| MatrixFormat::from_path(path)) {
        MatrixFormat::Csv => parse_csv(&text),
        MatrixFormat::Json => parse_json(&text),
    }
}

pub fn write_matrix(path: &Path, a: &DMatrix<f64>, format: MatrixFormat) -> Result<()> {
    let text = match format {
        MatrixFormat::Json => serde_json::to_string_pretty(&MatrixJson::from_matrix(a))?,
        MatrixFormat::Csv => a
            .row_iter()
            .map(|r| {
                r.iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n"),
    };
    fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parses_rows() {
        let a = parse_csv("20,1,1\n0,-1,1\n").unwrap();
        assert_eq!(a.shape(), (2, 3));
        assert_eq!(a[(0, 0)], 20.0);
        assert_eq!(a[(1, 1)], -1.0);
    }

    #[test]
    fn csv_rejects_non_finite_and_ragged() {
        assert!(matches!(
            parse_csv("1,NaN\n0,1"),
            Err(Error::NonFiniteEntry { row: 0, col: 1 })
        ));
        assert!(matches!(
            parse_csv("1,inf\n0,1"),
            Err(Error::NonFiniteEntry { .. })
        ));
        assert!(matches!(parse_csv("1,2\n0"), Err(Error::Shape(_))));
        assert!(matches!(parse_csv("1,x"), Err(Error::Parse(_))));
    }

    #[test]
    fn json_checks_declared_shape() {
        let a = parse_json(r#"{"m":1,"n":2,"data":[[1,-1]]}"#).unwrap();
        assert_eq!(a.shape(), (1, 2));
        assert!(matches!(
            parse_json(r#"{"m":2,"n":2,"data":[[1,-1]]}"#),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn json_value_round_trip_is_exact() {
        let a = DMatrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, -2e-300, std::f64::consts::PI]);
        let text = serde_json::to_string(&matrix_to_json_value(&a)).unwrap();
        let back = matrix_from_json_value(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(a, back);
    }
}
