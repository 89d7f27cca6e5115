//! Objective functions.  Everything the solver runs on here is a linear
//! least-squares problem `f(x) = 1/2 |Ax - y|^2` whose rows are grouped into
//! blocks; the stochastic gradient samples blocks.

pub mod io;
pub mod ode;
pub mod radon;
pub mod toy;

use crate::linalg::{norm2_sq, Operator};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("data vector has length {got}, operator has {want} rows")]
    DataLength { got: usize, want: usize },
    #[error("blocks must partition the row indices: {0}")]
    BadBlocks(String),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("batch ids must be strictly increasing and < {n_blocks}: {detail}")]
    BadBatch { n_blocks: usize, detail: String },
    #[error("dimension mismatch: x has length {got}, expected {want}")]
    BadPoint { got: usize, want: usize },
    #[error("{0}")]
    BadParameter(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad file format in {path}: {detail}")]
    Format { path: String, detail: String },
}

/// A smooth objective with a known smoothness (gradient Lipschitz) constant.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);
    /// Gradient Lipschitz constant `L`.
    fn smoothness(&self) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dimension()];
        self.gradient_into(x, &mut g);
        g
    }
}

/// `f(x) = 1/2 |Ax - y|^2` with rows partitioned into blocks.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    op: Operator,
    y: Vec<f64>,
    blocks: Vec<Vec<usize>>,
    smoothness: f64,
    /// `min f`, when known (0 for self-generated consistent data).
    fstar: Option<f64>,
}

impl LinearProblem {
    /// `blocks` must partition `0..nrows`; rows inside a block must be
    /// strictly increasing.  The smoothness constant is computed here by
    /// power iteration (exact for linear problems: the squared top singular
    /// value).
    pub fn new(op: Operator, y: Vec<f64>, blocks: Vec<Vec<usize>>) -> Result<Self, ProblemError> {
        if y.len() != op.nrows() {
            return Err(ProblemError::DataLength {
                got: y.len(),
                want: op.nrows(),
            });
        }
        let mut seen = vec![false; op.nrows()];
        if blocks.is_empty() && op.nrows() > 0 {
            return Err(ProblemError::BadBlocks("no blocks given".into()));
        }
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ProblemError::BadBlocks(format!("block {b} is empty")));
            }
            let mut prev = None;
            for &r in block {
                if r >= op.nrows() {
                    return Err(ProblemError::BadBlocks(format!(
                        "block {b} references row {r} out of {}",
                        op.nrows()
                    )));
                }
                if prev.map_or(false, |p| r <= p) {
                    return Err(ProblemError::BadBlocks(format!(
                        "block {b} rows not strictly increasing"
                    )));
                }
                if seen[r] {
                    return Err(ProblemError::BadBlocks(format!("row {r} appears twice")));
                }
                seen[r] = true;
                prev = Some(r);
            }
        }
        if let Some(r) = seen.iter().position(|&s| !s) {
            return Err(ProblemError::BadBlocks(format!("row {r} not covered")));
        }
        let smoothness = op.top_singular_value_sq();
        Ok(LinearProblem {
            op,
            y,
            blocks,
            smoothness,
            fstar: None,
        })
    }

    /// One block holding every row.
    pub fn single_block(op: Operator, y: Vec<f64>) -> Result<Self, ProblemError> {
        let all: Vec<usize> = (0..op.nrows()).collect();
        Self::new(op, y, vec![all])
    }

    /// Each row its own block.
    pub fn row_blocks(op: Operator, y: Vec<f64>) -> Result<Self, ProblemError> {
        let blocks = (0..op.nrows()).map(|r| vec![r]).collect();
        Self::new(op, y, blocks)
    }

    pub fn with_known_fstar(mut self, fstar: f64) -> Self {
        self.fstar = Some(fstar);
        self
    }

    pub fn known_fstar(&self) -> Option<f64> {
        self.fstar
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn data(&self) -> &[f64] {
        &self.y
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.op.matvec(x);
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri -= yi;
        }
        r
    }

    fn check_point(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.dimension() {
            return Err(ProblemError::BadPoint {
                got: x.len(),
                want: self.dimension(),
            });
        }
        Ok(())
    }

    /// Unbiased gradient estimate from a batch of distinct block ids:
    /// `(n_blocks / batch_size) * sum_b A_b^T (A_b x - y_b)`.
    ///
    /// The batch must be strictly increasing so the summation order is
    /// canonical; a full batch is then bitwise equal to the full gradient.
    pub fn stochastic_gradient_into(
        &self,
        x: &[f64],
        batch: &[usize],
        out: &mut [f64],
    ) -> Result<(), ProblemError> {
        self.check_point(x)?;
        if batch.is_empty() {
            return Err(ProblemError::EmptyBatch);
        }
        let n_blocks = self.blocks.len();
        let mut prev = None;
        for &b in batch {
            if b >= n_blocks || prev.map_or(false, |p| b <= p) {
                return Err(ProblemError::BadBatch {
                    n_blocks,
                    detail: format!("{batch:?}"),
                });
            }
            prev = Some(b);
        }
        out.fill(0.0);
        let scale = n_blocks as f64 / batch.len() as f64;
        for &b in batch {
            for &r in &self.blocks[b] {
                let resid = self.op.row_dot(r, x) - self.y[r];
                self.op.scatter_row(r, scale * resid, out);
            }
        }
        Ok(())
    }

    pub fn stochastic_gradient(&self, x: &[f64], batch: &[usize]) -> Result<Vec<f64>, ProblemError> {
        let mut g = vec![0.0; self.dimension()];
        self.stochastic_gradient_into(x, batch, &mut g)?;
        Ok(g)
    }

    /// Full gradient computed block by block (identical summation order to a
    /// full-batch stochastic gradient).
    pub fn full_gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for block in &self.blocks {
            for &r in block {
                let resid = self.op.row_dot(r, x) - self.y[r];
                self.op.scatter_row(r, resid, out);
            }
        }
    }
}

impl Objective for LinearProblem {
    fn dimension(&self) -> usize {
        self.op.ncols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        0.5 * norm2_sq(&r)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.full_gradient_into(x, out);
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}

/// Ridge-shifted objective value `f(x) + lambda/2 |x|^2`.
pub fn ridge_value(problem: &dyn Objective, x: &[f64], lambda: f64) -> f64 {
    problem.value(x) + 0.5 * lambda * norm2_sq(x)
}

/// Gradient of the ridge-shifted objective.
pub fn ridge_gradient(problem: &dyn Objective, x: &[f64], lambda: f64) -> Vec<f64> {
    let mut g = problem.gradient(x);
    for (gi, xi) in g.iter_mut().zip(x) {
        *gi += lambda * xi;
    }
    g
}

#[allow(unused)]
pub(crate) fn residual_dot(op: &Operator, x: &[f64], y: &[f64], i: usize) -> f64 {
    op.row_dot(i, x) - y[i]
}
