//! Minimal dense/sparse operator support tuned to what the solver needs:
//! row-wise access (block gradients accumulate row by row in a fixed order so
//! runs are bit-reproducible) and conversion to `nalgebra` for factorization
//! work in the oracles.

use crate::noise::RngStream;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        DenseMatrix {
            nrows,
            ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_flat(nrows: usize, ncols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        DenseMatrix { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists; columns must be strictly
    /// increasing within a row.
    pub fn from_row_entries(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut prev = None;
            for (j, v) in row {
                assert!(j < ncols, "column {j} out of bounds");
                assert!(prev.map_or(true, |p| j > p), "columns not increasing");
                prev = Some(j);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m.set(i, j, v);
            }
        }
        m
    }
}

/// The operator `A` of a least-squares problem, dense or sparse.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl Operator {
    pub fn diagonal(sigmas: &[f64]) -> Self {
        let n = sigmas.len();
        Operator::Sparse(CsrMatrix::from_row_entries(
            n,
            sigmas
                .iter()
                .enumerate()
                .map(|(i, &s)| vec![(i, s)])
                .collect(),
        ))
    }

    pub fn nrows(&self) -> usize {
        match self {
            Operator::Dense(m) => m.nrows(),
            Operator::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Operator::Dense(m) => m.ncols(),
            Operator::Sparse(m) => m.ncols(),
        }
    }

    /// `<row_i, x>`
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        match self {
            Operator::Dense(m) => dot(m.row(i), x),
            Operator::Sparse(m) => {
                let (cols, vals) = m.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            }
        }
    }

    /// `out += coef * row_i`
    pub fn scatter_row(&self, i: usize, coef: f64, out: &mut [f64]) {
        match self {
            Operator::Dense(m) => {
                for (o, &v) in out.iter_mut().zip(m.row(i)) {
                    *o += coef * v;
                }
            }
            Operator::Sparse(m) => {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    out[j] += coef * v;
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.row_dot(i, x)).collect()
    }

    /// `A^T r`, accumulated row by row in ascending row order.
    pub fn rmatvec(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols()];
        for i in 0..self.nrows() {
            self.scatter_row(i, r[i], &mut out);
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        self.to_dense().to_nalgebra()
    }

    /// Squared top singular value by power iteration on `A^T A` (or `A A^T`,
    /// whichever is smaller), from a fixed-seed random start so the result is
    /// deterministic.
    pub fn top_singular_value_sq(&self) -> f64 {
        let (n, wide) = if self.ncols() <= self.nrows() {
            (self.ncols(), false)
        } else {
            (self.nrows(), true)
        };
        if n == 0 {
            return 0.0;
        }
        let mut stream = RngStream::new(0x9e3779b97f4a7c15, 0);
        let mut v = stream.normal_vec(n);
        normalize(&mut v);
        let mut rayleigh = 0.0;
        for _ in 0..50_000 {
            // w = (A^T A) v  or  (A A^T) v
            let w = if wide {
                self.matvec(&self.rmatvec(&v))
            } else {
                self.rmatvec(&self.matvec(&v))
            };
            let new = dot(&v, &w);
            let norm = norm2(&w);
            if norm == 0.0 {
                return 0.0;
            }
            v = w;
            for x in &mut v {
                *x /= norm;
            }
            if (new - rayleigh).abs() <= 1e-13 * new.abs().max(1e-300) {
                return new;
            }
            rayleigh = new;
        }
        rayleigh
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}
