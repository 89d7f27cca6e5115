//! Stochastic gradient descent with a decaying Tikhonov (ridge) term, for
//! recovering minimum-norm least-squares solutions of ill-posed linear
//! problems.
//!
//! The iteration is
//!
//! ```text
//! X_k = X_{k-1} - alpha_k * (grad f(X_{k-1}) + lambda_k X_{k-1} + D_k)
//! ```
//!
//! with polynomial step sizes `alpha_k = c_alpha k^{-q}` and ridge weights
//! `lambda_k = c_lambda k^{-p}`, and `D_k` gradient noise.  The crate bundles:
//!
//! * schedule validation against the admissible `(p, q)` regions of the
//!   convergence results, with predicted decay exponents
//!   ([`schedules::validate_theorem`], [`schedules::predicted_rates`]);
//! * the solver itself with deterministic, replicable noise streams
//!   ([`optimizer::run`], [`optimizer::monte_carlo`]);
//! * closed-form references computed independently of the solver: SVD-based
//!   minimum-norm and ridge solutions ([`oracles`]);
//! * benchmark problems: a 2-d toy, an ODE source-identification problem,
//!   and parallel-beam tomography ([`problems`]);
//! * empirical decay-rate estimation and `(p, q)` parameter sweeps
//!   ([`analysis`]);
//! * a file-driven harness with deterministic CSV and SVG output
//!   ([`harness`]).

pub mod analysis;
pub mod harness;
pub mod linalg;
pub mod noise;
pub mod optimizer;
pub mod oracles;
pub mod problems;
pub mod schedules;

pub use noise::{NoiseModel, RngStream};
pub use optimizer::{monte_carlo, run, RunConfig, Trajectory, Variant};
pub use oracles::Oracle;
pub use problems::{LinearProblem, Objective};
pub use schedules::{
    optimal_schedule, predicted_rates, validate_theorem, PolynomialSchedule, TheoremId,
};
