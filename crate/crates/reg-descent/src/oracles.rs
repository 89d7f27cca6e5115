//! Ground-truth references computed independently of the iterative solver:
//! SVD-based minimum-norm and ridge (Tikhonov) solutions, the ridge energy
//! gap, and diagnostics for how fast the ridge path approaches the
//! minimum-norm solution as the ridge weight shrinks.

use crate::analysis::log_log_fit;
use crate::linalg::{dist_sq, norm2_sq, DenseMatrix, Operator};
use crate::problems::{ridge_value, LinearProblem};
use crate::schedules::PolynomialSchedule;
use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

/// Largest unknown count for which the dense SVD oracle is built.
pub const MAX_SVD_DIM: usize = 2048;
/// Largest Gram-matrix side for the regularized normal-equations fallback.
pub const MAX_NORMAL_EQ_DIM: usize = 4096;

/// Relative truncation threshold for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("problem too large for oracles: {detail}")]
    TooLarge { detail: String },
    #[error("vector has length {got}, expected {want}")]
    Shape { got: usize, want: usize },
    #[error("ridge weight must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("SVD failed to converge")]
    SvdFailed,
    #[error("normal equations not positive definite")]
    FactorizationFailed,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// Thin SVD `A = U diag(sigma) V^T` with singular values sorted descending
/// and numerical rank determined by `RANK_TOLERANCE * sigma_1`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    sigma: Vec<f64>,
    rank: usize,
    nrows: usize,
    ncols: usize,
}

impl SpectralDecomposition {
    pub fn new(op: &Operator) -> Result<Self, OracleError> {
        if op.ncols() > MAX_SVD_DIM {
            return Err(OracleError::TooLarge {
                detail: format!(
                    "dimension {} exceeds the SVD cap {MAX_SVD_DIM}",
                    op.ncols()
                ),
            });
        }
        let m = op.to_nalgebra();
        let (nrows, ncols) = (m.nrows(), m.ncols());
        let svd = m.svd(true, true);
        let u_raw = svd.u.ok_or(OracleError::SvdFailed)?;
        let vt_raw = svd.v_t.ok_or(OracleError::SvdFailed)?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .expect("singular values are finite")
        });
        let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let k = sigma.len();
        let mut u = DMatrix::zeros(nrows, k);
        let mut v = DMatrix::zeros(ncols, k);
        for (new_idx, &old_idx) in order.iter().enumerate() {
            u.set_column(new_idx, &u_raw.column(old_idx));
            v.set_column(new_idx, &vt_raw.row(old_idx).transpose());
        }
        let tol = sigma.first().copied().unwrap_or(0.0) * RANK_TOLERANCE;
        let rank = sigma.iter().take_while(|&&s| s > tol && s > 0.0).count();
        Ok(SpectralDecomposition {
            u,
            v,
            sigma,
            rank,
            nrows,
            ncols,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut s = DMatrix::zeros(self.sigma.len(), self.sigma.len());
        for (i, &sv) in self.sigma.iter().enumerate() {
            s[(i, i)] = sv;
        }
        let m = &self.u * s * self.v.transpose();
        let mut flat = Vec::with_capacity(self.nrows * self.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                flat.push(m[(i, j)]);
            }
        }
        DenseMatrix::from_flat(self.nrows, self.ncols, flat)
    }

    fn check_data(&self, y: &[f64]) -> Result<(), OracleError> {
        if y.len() != self.nrows {
            return Err(OracleError::Shape {
                got: y.len(),
                want: self.nrows,
            });
        }
        Ok(())
    }

    /// Coefficients `c_n = <y, u_n>` for all retained columns, and the
    /// squared norm of the part of `y` orthogonal to all of them.
    pub fn project_data(&self, y: &[f64]) -> Result<(Vec<f64>, f64), OracleError> {
        self.check_data(y)?;
        let coeffs: Vec<f64> = (0..self.sigma.len())
            .map(|n| {
                let col = self.u.column(n);
                y.iter().zip(col.iter()).map(|(a, b)| a * b).sum()
            })
            .collect();
        let orth_sq = (norm2_sq(y) - norm2_sq(&coeffs)).max(0.0);
        Ok((coeffs, orth_sq))
    }

    /// Minimum-norm least-squares solution
    /// `x_* = sum_{sigma_n > tol} sigma_n^{-1} <y, u_n> v_n`.
    /// A rank-0 operator yields the zero vector (`rank()` is the flag).
    pub fn min_norm_solution(&self, y: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.check_data(y)?;
        let mut x = vec![0.0; self.ncols];
        for n in 0..self.rank {
            let c: f64 = y
                .iter()
                .zip(self.u.column(n).iter())
                .map(|(a, b)| a * b)
                .sum();
            let w = c / self.sigma[n];
            for (xi, vi) in x.iter_mut().zip(self.v.column(n).iter()) {
                *xi += w * vi;
            }
        }
        Ok(x)
    }

    /// Ridge solution `x_lambda = sum_n sigma_n/(sigma_n^2+lambda) <y,u_n> v_n`
    /// (no truncation: the filter is bounded).
    pub fn tikhonov_solution(&self, y: &[f64], lambda: f64) -> Result<Vec<f64>, OracleError> {
        self.check_data(y)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(OracleError::BadLambda(lambda));
        }
        let mut x = vec![0.0; self.ncols];
        for (n, &s) in self.sigma.iter().enumerate() {
            let c: f64 = y
                .iter()
                .zip(self.u.column(n).iter())
                .map(|(a, b)| a * b)
                .sum();
            let w = s / (s * s + lambda) * c;
            for (xi, vi) in x.iter_mut().zip(self.v.column(n).iter()) {
                *xi += w * vi;
            }
        }
        Ok(x)
    }

    /// `min_x f(x)` from the data projection: the squared residual that no
    /// least-squares solution can remove.
    pub fn least_squares_minimum(&self, y: &[f64]) -> Result<f64, OracleError> {
        let (coeffs, orth_sq) = self.project_data(y)?;
        let tail: f64 = coeffs[self.rank..].iter().map(|c| c * c).sum();
        Ok(0.5 * (orth_sq + tail))
    }

    /// `f_lambda(x_lambda) = 1/2 sum_n lambda c_n^2/(sigma_n^2+lambda)
    ///  + 1/2 |y_perp|^2` (closed form, no solve).
    pub fn ridge_min_value(&self, y: &[f64], lambda: f64) -> Result<f64, OracleError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(OracleError::BadLambda(lambda));
        }
        let (coeffs, orth_sq) = self.project_data(y)?;
        let mut v = 0.5 * orth_sq;
        for (&s, &c) in self.sigma.iter().zip(&coeffs) {
            v += 0.5 * lambda * c * c / (s * s + lambda);
        }
        Ok(v)
    }
}

/// `r_n(lambda) = lambda / (sigma (sigma^2 + lambda))`, the spectral
/// coefficient of `x_* - x_lambda` relative to `<y, u_n>`.
pub fn filter_residual(sigma: f64, lambda: f64) -> f64 {
    assert!(sigma > 0.0 && lambda > 0.0, "sigma and lambda must be positive");
    lambda / (sigma * (sigma * sigma + lambda))
}

/// Exponent of `lambda` in the squared-error bound for a source condition of
/// order `nu`: 1 for `nu >= 2`, otherwise `2 nu`.
pub fn source_condition_rate(nu: f64) -> f64 {
    assert!(nu > 0.0, "nu must be positive");
    if nu >= 2.0 {
        1.0
    } else {
        2.0 * nu
    }
}

/// The corresponding exponent on the norm itself:
/// `|x_lambda - x_*| <= C lambda^xi`.
pub fn source_condition_xi(nu: f64) -> f64 {
    source_condition_rate(nu) / 2.0
}

/// Ridge energy gap `f_lambda(x) - f_lambda(x_lambda)`, clamped at zero when
/// within rounding of it; a clearly negative value means the reference
/// minimum does not belong to this problem.
pub fn energy(
    problem: &LinearProblem,
    decomp: &SpectralDecomposition,
    x: &[f64],
    lambda: f64,
) -> Result<f64, OracleError> {
    let min_v = decomp.ridge_min_value(problem.data(), lambda)?;
    let v = ridge_value(problem, x, lambda) - min_v;
    let tol = 1e-12 * (1.0 + min_v.abs());
    if v < -tol {
        return Err(OracleError::Inconsistent(format!(
            "energy {v} is negative beyond rounding at lambda {lambda}"
        )));
    }
    Ok(v.max(0.0))
}

#[derive(Debug, Clone)]
pub struct ViscosityCurvePoint {
    pub lambda: f64,
    pub x_lambda: Vec<f64>,
    pub dist_to_xstar: f64,
    /// `|x_*|^2 - |x_lambda|^2`, non-negative.
    pub norm_gap: f64,
}

#[derive(Debug, Clone)]
pub struct ViscosityCurve {
    pub points: Vec<ViscosityCurvePoint>,
    /// Fitted exponent of `dist_to_xstar ~ lambda^xi` (needs >= 3 points
    /// with positive distance).
    pub xi_hat: Option<f64>,
    pub fit_r_squared: Option<f64>,
}

/// Ridge path `lambda -> x_lambda` on a strictly descending positive grid,
/// with distances to the minimum-norm solution and a log-log fit of the
/// decay exponent.
pub fn viscosity_curve(
    decomp: &SpectralDecomposition,
    y: &[f64],
    lambdas: &[f64],
) -> Result<ViscosityCurve, OracleError> {
    for w in lambdas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(OracleError::Inconsistent(format!(
                "lambda grid must be strictly descending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let xstar = decomp.min_norm_solution(y)?;
    let xstar_norm_sq = norm2_sq(&xstar);
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let x_lambda = decomp.tikhonov_solution(y, lambda)?;
        let dist_to_xstar = dist_sq(&x_lambda, &xstar).sqrt();
        let norm_gap = (xstar_norm_sq - norm2_sq(&x_lambda)).max(0.0);
        points.push(ViscosityCurvePoint {
            lambda,
            x_lambda,
            dist_to_xstar,
            norm_gap,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.dist_to_xstar).collect();
    let fit = log_log_fit(&xs, &ys, 3);
    Ok(ViscosityCurve {
        points,
        xi_hat: fit.as_ref().map(|f| f.slope),
        fit_r_squared: fit.as_ref().map(|f| f.r_squared),
    })
}

#[derive(Debug, Clone)]
pub struct GapSeries {
    pub ks: Vec<u64>,
    /// `alpha_k lambda_k (|x_*|^2 - |x_{lambda_k}|^2)`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Fitted decay exponent rho in `term ~ k^{-rho}` over the tail half.
    pub term_decay_exponent: Option<f64>,
    /// True when either every term is (numerically) zero or the fitted decay
    /// is faster than `k^{-1.05}`.  Evidence, not proof.
    pub appears_summable: bool,
}

/// Numeric check of the series `sum_k alpha_k lambda_k (|x_*|^2 - |x_lambda_k|^2)`.
pub fn viscosity_gap_series(
    decomp: &SpectralDecomposition,
    y: &[f64],
    schedule: &PolynomialSchedule,
    horizon: u64,
) -> Result<GapSeries, OracleError> {
    assert!(horizon >= 1);
    let xstar = decomp.min_norm_solution(y)?;
    let xstar_norm_sq = norm2_sq(&xstar);
    let (coeffs, _) = decomp.project_data(y)?;
    let mut ks = Vec::new();
    let mut terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for k in 1..=horizon {
        let (alpha, lambda) = schedule
            .at(k)
            .map_err(|e| OracleError::Inconsistent(e.to_string()))?;
        let term = if lambda == 0.0 {
            0.0
        } else {
            // |x_lambda|^2 spectrally, O(rank) per k
            let mut xl_norm_sq = 0.0;
            for (&s, &c) in decomp.sigma.iter().zip(&coeffs) {
                let f = s / (s * s + lambda) * c;
                xl_norm_sq += f * f;
            }
            alpha * lambda * (xstar_norm_sq - xl_norm_sq).max(0.0)
        };
        acc += term;
        ks.push(k);
        terms.push(term);
        partial_sums.push(acc);
    }
    let tail_start = ks.len() / 2;
    let xs: Vec<f64> = ks[tail_start..].iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = terms[tail_start..].to_vec();
    let fit = log_log_fit(&xs, &ys, 3);
    // slope of log(term) vs log(k) is -rho
    let term_decay_exponent = fit.map(|f| -f.slope);
    let all_zero = terms.iter().all(|&t| t == 0.0);
    let appears_summable = all_zero || term_decay_exponent.map_or(false, |rho| rho > 1.05);
    Ok(GapSeries {
        ks,
        terms,
        partial_sums,
        term_decay_exponent,
        appears_summable,
    })
}

enum Backend {
    Spectral {
        decomp: SpectralDecomposition,
        coeffs: Vec<f64>,
        y_orth_sq: f64,
    },
    /// Regularized normal equations on the smaller Gram side; used when the
    /// problem is too large for a dense SVD.  No minimum-norm diagnostics.
    NormalEq {
        op: Operator,
        y: Vec<f64>,
        /// `A A^T` when rows <= cols, else `A^T A`.
        gram: DMatrix<f64>,
        dual: bool,
    },
}

/// Reference-solution handle consumed by the solver for trajectory
/// diagnostics.  Prefers the SVD; falls back to per-lambda normal-equation
/// solves on problems too large for it.
pub struct Oracle {
    backend: Backend,
    xstar: Option<Vec<f64>>,
    fstar: Option<f64>,
}

impl Oracle {
    pub fn for_problem(problem: &LinearProblem) -> Result<Self, OracleError> {
        let op = problem.operator();
        if op.ncols() <= MAX_SVD_DIM {
            return Self::spectral_for(problem);
        }
        let side = op.nrows().min(op.ncols());
        if side > MAX_NORMAL_EQ_DIM {
            return Err(OracleError::TooLarge {
                detail: format!(
                    "{}x{} exceeds both the SVD cap {MAX_SVD_DIM} and the \
                     normal-equations cap {MAX_NORMAL_EQ_DIM}",
                    op.nrows(),
                    op.ncols()
                ),
            });
        }
        let dual = op.nrows() <= op.ncols();
        let a = op.to_nalgebra();
        let gram = if dual {
            &a * a.transpose()
        } else {
            a.transpose() * &a
        };
        Ok(Oracle {
            backend: Backend::NormalEq {
                op: op.clone(),
                y: problem.data().to_vec(),
                gram,
                dual,
            },
            xstar: None,
            fstar: problem.known_fstar(),
        })
    }

    /// SVD-backed oracle; errors when the dimension cap is exceeded.
    pub fn spectral_for(problem: &LinearProblem) -> Result<Self, OracleError> {
        let decomp = SpectralDecomposition::new(problem.operator())?;
        let y = problem.data();
        let xstar = decomp.min_norm_solution(y)?;
        let fstar = decomp.least_squares_minimum(y)?;
        let (coeffs, y_orth_sq) = decomp.project_data(y)?;
        Ok(Oracle {
            backend: Backend::Spectral {
                decomp,
                coeffs,
                y_orth_sq,
            },
            xstar: Some(xstar),
            fstar: Some(fstar),
        })
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::Spectral { .. } => "svd",
            Backend::NormalEq { .. } => "normal-equations",
        }
    }

    pub fn xstar(&self) -> Option<&[f64]> {
        self.xstar.as_deref()
    }

    pub fn fstar(&self) -> Option<f64> {
        self.fstar
    }

    pub fn decomposition(&self) -> Option<&SpectralDecomposition> {
        match &self.backend {
            Backend::Spectral { decomp, .. } => Some(decomp),
            Backend::NormalEq { .. } => None,
        }
    }

    pub fn xlambda(&self, lambda: f64) -> Result<Vec<f64>, OracleError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(OracleError::BadLambda(lambda));
        }
        match &self.backend {
            Backend::Spectral { decomp, coeffs, .. } => {
                let mut x = vec![0.0; decomp.ncols];
                for ((&s, &c), n) in decomp.sigma.iter().zip(coeffs).zip(0..) {
                    let w = s / (s * s + lambda) * c;
                    for (xi, vi) in x.iter_mut().zip(decomp.v.column(n).iter()) {
                        *xi += w * vi;
                    }
                }
                Ok(x)
            }
            Backend::NormalEq { op, y, gram, dual } => {
                let mut m = gram.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += lambda;
                }
                let chol = Cholesky::new(m).ok_or(OracleError::FactorizationFailed)?;
                if *dual {
                    // x = A^T (A A^T + lambda I)^{-1} y
                    let w = chol.solve(&DVector::from_column_slice(y));
                    let w: Vec<f64> = w.iter().copied().collect();
                    Ok(op.rmatvec(&w))
                } else {
                    // x = (A^T A + lambda I)^{-1} A^T y
                    let aty = op.rmatvec(y);
                    let x = chol.solve(&DVector::from_column_slice(&aty));
                    Ok(x.iter().copied().collect())
                }
            }
        }
    }

    pub fn ridge_min_value(&self, lambda: f64) -> Result<f64, OracleError> {
        match &self.backend {
            Backend::Spectral {
                decomp,
                coeffs,
                y_orth_sq,
            } => {
                if !(lambda > 0.0) || !lambda.is_finite() {
                    return Err(OracleError::BadLambda(lambda));
                }
                let mut v = 0.5 * y_orth_sq;
                for (&s, &c) in decomp.sigma.iter().zip(coeffs) {
                    v += 0.5 * lambda * c * c / (s * s + lambda);
                }
                Ok(v)
            }
            Backend::NormalEq { op, y, .. } => {
                let x = self.xlambda(lambda)?;
                let mut r = op.matvec(&x);
                for (ri, yi) in r.iter_mut().zip(y) {
                    *ri -= yi;
                }
                Ok(0.5 * norm2_sq(&r) + 0.5 * lambda * norm2_sq(&x))
            }
        }
    }

    /// `f_lambda(x) - min f_lambda`, clamped at zero within rounding.
    pub fn energy(
        &self,
        problem: &LinearProblem,
        x: &[f64],
        lambda: f64,
    ) -> Result<f64, OracleError> {
        let min_v = self.ridge_min_value(lambda)?;
        let v = ridge_value(problem, x, lambda) - min_v;
        let tol = 1e-12 * (1.0 + min_v.abs());
        if v < -tol {
            return Err(OracleError::Inconsistent(format!(
                "energy {v} is negative beyond rounding at lambda {lambda}"
            )));
        }
        Ok(v.max(0.0))
    }
}

#[allow(unused)]
fn column_dot(m: &DMatrix<f64>, col: usize, v: &[f64]) -> f64 {
    m.column(col).iter().zip(v).map(|(a, b)| a * b).sum()
}
