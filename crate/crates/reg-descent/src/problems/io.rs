//! Whitespace-separated text files for matrices and vectors.
//!
//! Format: a header line `rows cols`, then `rows * cols` numbers in row-major
//! order (line breaks are not significant).  Vectors are stored as `n 1`.

use super::ProblemError;
use crate::linalg::DenseMatrix;
use std::fs;
use std::io::Write;
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> ProblemError {
    ProblemError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, detail: impl Into<String>) -> ProblemError {
    ProblemError::Format {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, ProblemError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut tokens = text.split_whitespace();
    let rows: usize = tokens
        .next()
        .ok_or_else(|| format_err(path, "missing header"))?
        .parse()
        .map_err(|e| format_err(path, format!("bad row count: {e}")))?;
    let cols: usize = tokens
        .next()
        .ok_or_else(|| format_err(path, "missing column count"))?
        .parse()
        .map_err(|e| format_err(path, format!("bad column count: {e}")))?;
    let mut data = Vec::with_capacity(rows * cols);
    for tok in tokens.by_ref().take(rows * cols) {
        let v: f64 = tok
            .parse()
            .map_err(|e| format_err(path, format!("bad entry {tok:?}: {e}")))?;
        data.push(v);
    }
    if data.len() != rows * cols {
        return Err(format_err(
            path,
            format!("expected {} entries, found {}", rows * cols, data.len()),
        ));
    }
    if tokens.next().is_some() {
        return Err(format_err(path, "trailing data after matrix entries"));
    }
    Ok(DenseMatrix::from_flat(rows, cols, data))
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<(), ProblemError> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", m.nrows(), m.ncols()));
    for i in 0..m.nrows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}

/// Accepts `n 1` (column) or `1 n` (row) shaped files.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, ProblemError> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(format_err(
            path,
            format!("expected a vector, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(m.data().to_vec())
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<(), ProblemError> {
    let m = DenseMatrix::from_flat(v.len(), 1, v.to_vec());
    write_matrix(path, &m)
}
