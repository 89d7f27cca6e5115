//! Wasm bindings for the browser playground (see `www/index.html`).
//!
//! Three operations, all returning plain strings so the page needs no JS
//! glue beyond `innerHTML`/`textContent`:
//!
//! * [`validate_schedule`]: which convergence regimes admit a `(p, q)`
//!   schedule, with the predicted decay exponents;
//! * [`rate_heatmap`]: SVG heatmap of the predicted squared-distance decay
//!   over a `(p, q)` grid;
//! * [`toy_run`]: SVG log-log plot of one solver run on the 2-d toy problem.
//!
//! Errors come back as strings starting with `"error:"`.

use sha2::{Digest, Sha256};
use wasm_bindgen::prelude::*;

use reg_descent::analysis::{grid_with_anchors, theoretical_heatmap, SweepMode};
use reg_descent::harness::svg::{heatmap_svg, log_log_plot, GuideLine, Series};
use reg_descent::optimizer::{Recording, RunError};
use reg_descent::problems::toy::toy_problem;
use reg_descent::schedules::{Quantity, DEFAULT_BETA_OFFSET};
use reg_descent::{
    predicted_rates, run, NoiseModel, Oracle, PolynomialSchedule, RngStream, RunConfig, TheoremId,
    Variant,
};

#[wasm_bindgen]
pub fn crate_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn sha256_hex(s: &str) -> String {
    let mut h = Sha256::new();
    h.update(s.as_bytes());
    let out = h.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// Check `alpha_k = c_alpha k^-q`, `lambda_k = c_lambda k^-p` against every
/// regime and report the predicted exponents.  `xi > 0` is the ridge-path
/// decay exponent and unlocks the distance-to-`x_*` prediction; pass 0 to
/// omit it.
#[wasm_bindgen]
pub fn validate_schedule(c_alpha: f64, q: f64, c_lambda: f64, p: f64, xi: f64) -> String {
    let s = match PolynomialSchedule::new(c_alpha, q, c_lambda, p) {
        Ok(s) => s,
        Err(e) => return format!("error: {e}"),
    };
    let xi = if xi > 0.0 && xi.is_finite() {
        Some(xi)
    } else {
        None
    };
    let mut out = format!(
        "schedule: alpha_k = {c_alpha} k^-{q}, lambda_k = {c_lambda} k^-{p}\n"
    );
    if let Some(xi) = xi {
        out.push_str(&format!("ridge path: |x_lambda - x_*| <= C lambda^{xi}\n"));
    }
    out.push('\n');
    for theorem in TheoremId::all() {
        out.push_str(&predicted_rates(&s, theorem, xi, None).to_string());
        out.push('\n');
    }
    out
}

/// SVG heatmap of the predicted decay exponent of `|X_k - x_*|^2` over an
/// `n x n` interior grid of `(p, q)`.  `mode` is `L2`, `AS` or `DET`.
#[wasm_bindgen]
pub fn rate_heatmap(mode: &str, xi: f64, n: u32) -> String {
    let Some(mode) = SweepMode::parse(mode) else {
        return format!("error: unknown mode {mode:?}, expected L2, AS or DET");
    };
    if !(xi > 0.0) || !xi.is_finite() {
        return format!("error: xi must be a positive number, got {xi}");
    }
    if !(2..=160).contains(&n) {
        return format!("error: grid size must be in 2..=160, got {n}");
    }
    let grid = grid_with_anchors(n as usize, &[]);
    let result = theoretical_heatmap(mode, xi, &grid, &grid, DEFAULT_BETA_OFFSET);
    let digest = sha256_hex(&format!("demo heatmap {} {xi} {n}", mode.name()));
    heatmap_svg(&result, false, &digest)
}

/// Run the solver on the 2-d toy problem (`A = [1 1]`, `y = 1`) and plot
/// `f(X_k) - f(x_*)` and `|X_k - x_*|^2` against `k` on log-log axes.
/// `sigma` is the standard deviation of isotropic Gaussian gradient noise
/// (0 for the noiseless iteration); `c_lambda = 0` gives plain SGD.  The toy
/// ridge path is exactly linear in lambda, so the expected-rate guide line
/// uses `xi = 1`.
#[wasm_bindgen]
pub fn toy_run(
    c_alpha: f64,
    q: f64,
    c_lambda: f64,
    p: f64,
    sigma: f64,
    n_steps: u32,
    seed: u32,
) -> String {
    let schedule = match PolynomialSchedule::new(c_alpha, q, c_lambda, p) {
        Ok(s) => s,
        Err(e) => return format!("error: {e}"),
    };
    if !(1..=1_000_000).contains(&n_steps) {
        return format!("error: steps must be in 1..=1000000, got {n_steps}");
    }
    let noise = if sigma == 0.0 {
        NoiseModel::None
    } else if sigma > 0.0 && sigma.is_finite() {
        NoiseModel::GaussianIso { sigma }
    } else {
        return format!("error: sigma must be a nonnegative number, got {sigma}");
    };

    let problem = toy_problem();
    let oracle = match Oracle::for_problem(&problem) {
        Ok(o) => o,
        Err(e) => return format!("error: {e}"),
    };
    let mut config = RunConfig::new(Variant::RegSgd, schedule.clone(), noise);
    config.n_iterations = n_steps as u64;
    config.recording = Recording::Geometric { ratio: 1.1 };
    let mut stream = RngStream::new(seed as u64, 0);
    let traj = match run(&problem, &config, &mut stream, Some(&oracle)) {
        Ok(t) => t,
        Err(RunError::Diverged { first_bad_k, .. }) => {
            return format!(
                "error: iterate diverged at step {first_bad_k}; try a smaller c_alpha"
            )
        }
        Err(e) => return format!("error: {e}"),
    };

    let pair = |values: &[f64]| -> Vec<(f64, f64)> {
        traj.iterations
            .iter()
            .zip(values)
            .filter(|(&k, &v)| k > 0 && v > 0.0)
            .map(|(&k, &v)| (k as f64, v))
            .collect()
    };
    let f_gap = traj.f_gap.as_deref().map(|v| pair(v)).unwrap_or_default();
    let dist_sq = traj
        .dist_sq_xstar
        .as_deref()
        .map(|v| pair(v))
        .unwrap_or_default();
    if f_gap.is_empty() && dist_sq.is_empty() {
        return "error: nothing to plot (all recorded values are zero)".into();
    }
    let mut series = Vec::new();
    if !dist_sq.is_empty() {
        series.push(Series {
            label: "dist_sq to x_*",
            points: &dist_sq,
        });
    }
    if !f_gap.is_empty() {
        series.push(Series {
            label: "f gap",
            points: &f_gap,
        });
    }

    let report = predicted_rates(&schedule, TheoremId::L2Rate, Some(1.0), None);
    let guide = report
        .applies
        .then(|| report.predicted.get(&Quantity::DistToXStar).copied())
        .flatten()
        .map(|e| GuideLine {
            exponent: e,
            label: format!("predicted k^-{e:.3}"),
        });

    let digest = sha256_hex(&format!(
        "demo toy {c_alpha} {q} {c_lambda} {p} {sigma} {n_steps} {seed}"
    ));
    log_log_plot(
        "toy problem, 2-d",
        "iteration k",
        "error",
        &series,
        guide.as_ref(),
        &digest,
    )
}
