//! Two-dimensional sanity problem `f(x) = 1/2 (x_1 + x_2 - 1)^2` with
//! closed-form minimum-norm and ridge solutions.

use super::{LinearProblem, ProblemError};
use crate::linalg::{DenseMatrix, Operator};

/// `A = [1 1]`, `y = [1]`, one row block.  Smoothness constant 2.
pub fn toy_problem() -> LinearProblem {
    let op = Operator::Dense(DenseMatrix::from_rows(vec![vec![1.0, 1.0]]));
    LinearProblem::single_block(op, vec![1.0])
        .expect("static problem")
        .with_known_fstar(0.0)
}

/// Minimum-norm solution `(1/2, 1/2)`.
pub fn xstar() -> Vec<f64> {
    vec![0.5, 0.5]
}

/// Ridge solution `(1/(2+lambda)) * (1, 1)`.
pub fn xlambda(lambda: f64) -> Result<Vec<f64>, ProblemError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ProblemError::BadParameter(format!(
            "ridge weight must be positive and finite, got {lambda}"
        )));
    }
    let c = 1.0 / (2.0 + lambda);
    Ok(vec![c, c])
}

/// `|x_lambda - x_*| = lambda / (sqrt(2) (2 + lambda))`.
pub fn xstar_xlambda_dist(lambda: f64) -> f64 {
    lambda / (std::f64::consts::SQRT_2 * (2.0 + lambda))
}
