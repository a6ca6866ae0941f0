//! File formats: matrix CSV, signal CSV.
//!
//! A matrix file is one row per line, comma-separated decimal literals, no
//! header. A signal file is two lines: 1-based support indices, then the
//! values. Floats are written in scientific notation with 17 significant
//! digits, which round-trips every finite `f64` exactly.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::omp::SparseSignal;

/// 17 significant digits: enough for exact f64 round-trips.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(token: &str, context: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number '{}' in {context}", token.trim())))
}

pub fn matrix_to_csv(a: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(a.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|tok| parse_f64(tok, &format!("matrix line {}", line_no + 1)))
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    let cols = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "matrix line {} has {} entries, expected {}",
            bad + 1,
            rows[bad].len(),
            cols
        )));
    }
    let n_rows = rows.len();
    DenseMatrix::new(n_rows, cols, rows.into_iter().flatten().collect())
}

pub fn write_matrix(path: &Path, a: &DenseMatrix) -> Result<()> {
    fs::write(path, matrix_to_csv(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    matrix_from_csv(&fs::read_to_string(path)?)
}

/// Two lines: 1-based support indices, then values. A zero-sparsity signal
/// is two empty lines.
pub fn signal_to_csv(x: &SparseSignal) -> String {
    let indices: Vec<String> = x.support().iter().map(|&i| (i + 1).to_string()).collect();
    let values: Vec<String> = x.values().iter().map(|&v| format_f64(v)).collect();
    format!("{}\n{}\n", indices.join(","), values.join(","))
}

/// Parse a signal file against a known ambient dimension.
pub fn signal_from_csv(text: &str, dimension: usize) -> Result<SparseSignal> {
    let mut lines = text.lines();
    let index_line = lines.next().ok_or_else(|| Error::Parse("empty signal file".into()))?;
    let value_line = lines
        .next()
        .ok_or_else(|| Error::Parse("signal file is missing the value line".into()))?;

    let support: Result<Vec<usize>> = index_line
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|tok| {
            let one_based: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index '{}' in signal file", tok.trim())))?;
            if one_based == 0 {
                return Err(Error::Parse("signal indices are 1-based; found 0".into()));
            }
            Ok(one_based - 1)
        })
        .collect();
    let values: Result<Vec<f64>> = value_line
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|tok| parse_f64(tok, "signal value line"))
        .collect();
    SparseSignal::new(dimension, support?, values?)
}

pub fn write_signal(path: &Path, x: &SparseSignal) -> Result<()> {
    fs::write(path, signal_to_csv(x))?;
    Ok(())
}

pub fn read_signal(path: &Path, dimension: usize) -> Result<SparseSignal> {
    signal_from_csv(&fs::read_to_string(path)?, dimension)
}

/// A dense vector file: one value per line (or one comma-separated line).
pub fn vector_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        for tok in line.split(',') {
            if tok.trim().is_empty() {
                continue;
            }
            out.push(parse_f64(tok, "vector file")?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty vector file".into()));
    }
    Ok(out)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    vector_from_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let a = crate::ensemble::gen_gaussian_matrix(5, 7, 321, false);
        let text = matrix_to_csv(&a);
        let back = matrix_from_csv(&text).unwrap();
        assert_eq!(a.rows(), back.rows());
        assert_eq!(a.cols(), back.cols());
        for (x, y) in a.entries().iter().zip(back.entries()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn matrix_rejects_ragged_and_garbage() {
        assert!(matrix_from_csv("1,2\n3\n").is_err());
        assert!(matrix_from_csv("1,two\n").is_err());
        assert!(matrix_from_csv("").is_err());
    }

    #[test]
    fn signal_round_trip_uses_one_based_indices() {
        let x = SparseSignal::new(6, vec![0, 4], vec![1.25, -2.0]).unwrap();
        let text = signal_to_csv(&x);
        let first_line = text.lines().next().unwrap();
        assert_eq!(first_line, "1,5");
        let back = signal_from_csv(&text, 6).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn signal_rejects_zero_index() {
        assert!(signal_from_csv("0,2\n1.0,2.0\n", 4).is_err());
    }

    #[test]
    fn empty_signal_round_trips() {
        let x = SparseSignal::empty(3);
        let back = signal_from_csv(&signal_to_csv(&x), 3).unwrap();
        assert_eq!(back.sparsity(), 0);
    }

    #[test]
    fn vector_parsing() {
        assert_eq!(vector_from_csv("1\n2\n3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(vector_from_csv("1,2,3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(vector_from_csv("\n").is_err());
    }
}
