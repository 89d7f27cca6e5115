//! Inverse source problem for the two-point boundary value equation
//! `-p'' + p = x` on (0, 1) with zero Dirichlet conditions: recover the
//! source `x` from point observations of the state `p`.
//!
//! Discretization: `d = 2^mesh_exponent` interior nodes `s_j = j h` with
//! `h = 1/(d+1)`, second differences for `p''`.  The forward map is
//! `p = G^{-1} x` with `G = tridiag(-1, 2, -1)/h^2 + I`, and each observation
//! row of `A` is the corresponding row of `G^{-1}`, so `A x = (G^{-1} x)`
//! sampled at the observation nodes.

use super::{LinearProblem, ProblemError};
use crate::linalg::{DenseMatrix, Operator};
use crate::noise::RngStream;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Number of sine modes in the synthetic source.
pub const TRUTH_MODES: usize = 100;

#[derive(Debug, Clone)]
pub struct OdeProblem {
    pub problem: LinearProblem,
    /// Interior grid nodes `s_j = j h`, `j = 1..=d`.
    pub grid: Vec<f64>,
    pub spacing: f64,
    /// Synthetic source evaluated on the grid.
    pub truth: Vec<f64>,
    /// 0-based grid indices of the observation nodes.
    pub obs_indices: Vec<usize>,
}

/// `tridiag(-1, 2, -1)/h^2 + I` on `d` interior nodes, `h = 1/(d+1)`.
pub fn stiffness_plus_identity(d: usize) -> DenseMatrix {
    let h = 1.0 / (d as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    let mut m = DenseMatrix::zeros(d, d);
    for j in 0..d {
        m.set(j, j, 2.0 * inv_h2 + 1.0);
        if j + 1 < d {
            m.set(j, j + 1, -inv_h2);
            m.set(j + 1, j, -inv_h2);
        }
    }
    m
}

/// Smallest eigenvalue of `stiffness_plus_identity(d)`:
/// `(4/h^2) sin^2(pi h / 2) + 1`.
pub fn smallest_stiffness_eigenvalue(d: usize) -> f64 {
    let h = 1.0 / (d as f64 + 1.0);
    let s = (std::f64::consts::PI * h / 2.0).sin();
    4.0 / (h * h) * s * s + 1.0
}

/// Source `x(s) = sum_{i=1}^{100} (sqrt(2)/pi) xi_i sin(i pi s)` with
/// independent `xi_i ~ N(0, i^{-4})`, drawn from stream `(truth_seed, 0)`.
pub fn synthetic_source(grid: &[f64], truth_seed: u64) -> Vec<f64> {
    let mut stream = RngStream::new(truth_seed, 0);
    let z = stream.normal_vec(TRUTH_MODES);
    let scale = std::f64::consts::SQRT_2 / std::f64::consts::PI;
    grid.iter()
        .map(|&s| {
            let mut v = 0.0;
            for (i, zi) in z.iter().enumerate() {
                let mode = (i + 1) as f64;
                v += scale * zi / (mode * mode) * (mode * std::f64::consts::PI * s).sin();
            }
            v
        })
        .collect()
}

/// Builds the observed problem: `n_obs` observation points `k / n_obs`
/// rounded to the nearest interior node, data `y = A x_truth` (noise-free, so
/// `min f = 0`), one block per observation row.
pub fn ode_problem(
    mesh_exponent: u32,
    n_obs: usize,
    truth_seed: u64,
) -> Result<OdeProblem, ProblemError> {
    if !(2..=11).contains(&mesh_exponent) {
        return Err(ProblemError::BadParameter(format!(
            "mesh_exponent must be in 2..=11, got {mesh_exponent}"
        )));
    }
    let d = 1usize << mesh_exponent;
    if n_obs == 0 || n_obs > d {
        return Err(ProblemError::BadParameter(format!(
            "n_obs must be in 1..={d}, got {n_obs}"
        )));
    }
    let h = 1.0 / (d as f64 + 1.0);
    let grid: Vec<f64> = (1..=d).map(|j| j as f64 * h).collect();

    let mut obs_indices = Vec::with_capacity(n_obs);
    for k in 1..=n_obs {
        let j = (k as f64 * (d as f64 + 1.0) / n_obs as f64).round() as usize;
        let j = j.clamp(1, d);
        if obs_indices.last() == Some(&(j - 1)) {
            return Err(ProblemError::BadParameter(format!(
                "observation points {k} and {} collapse onto grid node {j}; \
                 reduce n_obs",
                k - 1
            )));
        }
        obs_indices.push(j - 1);
    }

    let g = stiffness_plus_identity(d).to_nalgebra();
    let chol = Cholesky::new(g)
        .ok_or_else(|| ProblemError::BadParameter("stiffness matrix not SPD".into()))?;
    let mut rows = Vec::with_capacity(n_obs);
    for &j in &obs_indices {
        // row j of G^{-1} equals column j since G is symmetric
        let mut e = DVector::zeros(d);
        e[j] = 1.0;
        let a = chol.solve(&e);
        rows.push(a.iter().copied().collect::<Vec<f64>>());
    }
    let op = Operator::Dense(DenseMatrix::from_rows(rows));

    let truth = synthetic_source(&grid, truth_seed);
    let y = op.matvec(&truth);
    let problem = LinearProblem::row_blocks(op, y)?.with_known_fstar(0.0);
    Ok(OdeProblem {
        problem,
        grid,
        spacing: h,
        truth,
        obs_indices,
    })
}

/// Solves `G p = x` for the state; exposed for diagnostics and tests.
pub fn solve_state(d: usize, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), d);
    let g = stiffness_plus_identity(d).to_nalgebra();
    let chol = Cholesky::new(g).expect("SPD");
    let p = chol.solve(&DVector::from_column_slice(x));
    p.iter().copied().collect()
}

#[allow(unused)]
fn dmatrix_min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
