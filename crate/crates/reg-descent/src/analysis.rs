//! Empirical decay-rate estimation from trajectories and `(p, q)` sweeps of
//! the predicted rate surface, with optional solver-in-the-loop sweeps.

use crate::optimizer::{monte_carlo, RunConfig};
use crate::oracles::Oracle;
use crate::problems::LinearProblem;
use crate::schedules::{PolynomialSchedule, TheoremId, DEFAULT_BETA_OFFSET};
use thiserror::Error;

/// Portion of the recorded points used for rate fits unless overridden.
/// Rate claims are asymptotic; early transients bias the slope.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("ks and errors have different lengths ({ks} vs {errors})")]
    LengthMismatch { ks: usize, errors: usize },
    #[error("iteration indices must be strictly ascending")]
    NotAscending,
    #[error("tail_fraction must be in (0, 1], got {0}")]
    BadTailFraction(f64),
    #[error("need at least {needed} usable points in the tail window, found {got}")]
    InsufficientData { needed: usize, got: usize },
}

/// Ordinary least squares of `log y` on `log x` over the pairs where both
/// are strictly positive and finite.
#[derive(Debug, Clone, Copy)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub n_excluded: usize,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64], min_points: usize) -> Option<LogLogFit> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    let n = pairs.len();
    if n < min_points.max(2) {
        return None;
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &pairs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(x, y) in &pairs {
        let fitted = intercept + slope * x;
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    // essentially constant responses: perfect fit by convention (the tiny
    // ss_tot left over is accumulation noise, not signal)
    let degenerate = ss_tot <= 1e-20 * nf * (1.0 + mean_y * mean_y);
    let r_squared = if degenerate {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Some(LogLogFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
        n_excluded: xs.len() - n,
    })
}

/// Fitted `beta_hat` in `error ~ c k^{-beta_hat}`.
#[derive(Debug, Clone, Copy)]
pub struct RateEstimate {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub tail_fraction: f64,
    pub n_points: usize,
    /// Zero or negative errors in the window, excluded from the fit.
    pub n_excluded: usize,
}

/// Least squares of `log error` on `log k` over the last `tail_fraction` of
/// the recorded points; the exponent is the negated slope.
pub fn estimate_rate(
    ks: &[u64],
    errors: &[f64],
    tail_fraction: f64,
) -> Result<RateEstimate, AnalysisError> {
    if ks.len() != errors.len() {
        return Err(AnalysisError::LengthMismatch {
            ks: ks.len(),
            errors: errors.len(),
        });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(AnalysisError::BadTailFraction(tail_fraction));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::NotAscending);
    }
    let window = ((ks.len() as f64 * tail_fraction).ceil() as usize)
        .clamp(1, ks.len());
    let start = ks.len() - window;
    let xs: Vec<f64> = ks[start..].iter().map(|&k| k as f64).collect();
    let fit = log_log_fit(&xs, &errors[start..], 5).ok_or_else(|| {
        let usable = xs
            .iter()
            .zip(&errors[start..])
            .filter(|(&x, &y)| x > 0.0 && y > 0.0)
            .count();
        AnalysisError::InsufficientData {
            needed: 5,
            got: usable,
        }
    })?;
    Ok(RateEstimate {
        exponent: -fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        tail_fraction,
        n_points: fit.n_points,
        n_excluded: fit.n_excluded,
    })
}

/// Which convergence regime a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Expected squared distance.
    L2,
    /// Almost-sure per-path decay.
    As,
    /// Zero-noise full-gradient decay.
    Det,
}

impl SweepMode {
    pub fn name(&self) -> &'static str {
        match self {
            SweepMode::L2 => "L2",
            SweepMode::As => "AS",
            SweepMode::Det => "DET",
        }
    }

    pub fn parse(s: &str) -> Option<SweepMode> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L2" => Some(SweepMode::L2),
            "AS" => Some(SweepMode::As),
            "DET" => Some(SweepMode::Det),
            _ => None,
        }
    }

    pub fn theorem(&self) -> TheoremId {
        match self {
            SweepMode::L2 => TheoremId::L2Rate,
            SweepMode::As => TheoremId::AsRate,
            SweepMode::Det => TheoremId::DetRate,
        }
    }

    pub fn all() -> [SweepMode; 3] {
        [SweepMode::L2, SweepMode::As, SweepMode::Det]
    }
}

/// Predicted decay exponent of the squared distance to the minimum-norm
/// solution at `(p, q)`: the regime's min(...) formula inside its validity
/// region, 0 outside.  `xi` is the ridge-path exponent, `beta_offset` the
/// almost-sure margin (`beta = 2q - 1 - beta_offset`).
pub fn theoretical_exponent(mode: SweepMode, xi: f64, p: f64, q: f64, beta_offset: f64) -> f64 {
    assert!(xi > 0.0 && xi.is_finite());
    match mode {
        SweepMode::L2 => {
            if p > 0.0 && q > 2.0 * p && q < 1.0 - p {
                (1.0 - q - p).min(q - 2.0 * p).min(2.0 * xi * p).max(0.0)
            } else {
                0.0
            }
        }
        SweepMode::As => {
            if p > 0.0 && q > (p + 1.0) / 2.0 && q < 1.0 - p {
                let beta = 2.0 * q - 1.0 - beta_offset;
                (1.0 - q - p).min(beta - p).min(2.0 * xi * p).max(0.0)
            } else {
                0.0
            }
        }
        SweepMode::Det => {
            if p > 0.0 && p <= 1.0 && (0.0..=1.0 - p).contains(&q) {
                (1.0 - q - p).min(2.0 * xi * p).max(0.0)
            } else {
                0.0
            }
        }
    }
}

/// `n_uniform` equally spaced interior points `i/(n_uniform+1)` merged with
/// the given anchors, sorted and deduplicated.  Anchors let a grid hit exact
/// rational optima that uniform spacing misses.
pub fn grid_with_anchors(n_uniform: usize, anchors: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = (1..=n_uniform)
        .map(|i| i as f64 / (n_uniform as f64 + 1.0))
        .chain(anchors.iter().copied())
        .collect();
    for v in &g {
        assert!(v.is_finite() && *v >= 0.0 && *v < 1.0, "grid value {v}");
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    g
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub p: f64,
    pub q: f64,
    pub theoretical: f64,
    pub empirical: Option<f64>,
    /// False when a replica diverged or no rate could be fitted.
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub xi: f64,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// Row-major over `(p index, q index)`.
    pub cells: Vec<SweepCell>,
    /// Indices of the largest positive theoretical value, if any.
    pub argmax: Option<(usize, usize)>,
}

impl SweepResult {
    pub fn cell(&self, ip: usize, iq: usize) -> &SweepCell {
        &self.cells[ip * self.q_grid.len() + iq]
    }

    pub fn max_theoretical(&self) -> f64 {
        self.argmax
            .map(|(ip, iq)| self.cell(ip, iq).theoretical)
            .unwrap_or(0.0)
    }

    pub fn argmax_pq(&self) -> Option<(f64, f64)> {
        self.argmax
            .map(|(ip, iq)| (self.p_grid[ip], self.q_grid[iq]))
    }
}

fn grids_ok(p_grid: &[f64], q_grid: &[f64]) {
    assert!(!p_grid.is_empty() && !q_grid.is_empty(), "empty sweep grid");
    assert!(
        p_grid.windows(2).all(|w| w[0] < w[1]) && q_grid.windows(2).all(|w| w[0] < w[1]),
        "sweep grids must be strictly ascending"
    );
}

/// Evaluates `theoretical_exponent` on the grid product and marks the argmax.
pub fn theoretical_heatmap(
    mode: SweepMode,
    xi: f64,
    p_grid: &[f64],
    q_grid: &[f64],
    beta_offset: f64,
) -> SweepResult {
    grids_ok(p_grid, q_grid);
    let mut cells = Vec::with_capacity(p_grid.len() * q_grid.len());
    let mut argmax = None;
    let mut best = 0.0;
    for (ip, &p) in p_grid.iter().enumerate() {
        for (iq, &q) in q_grid.iter().enumerate() {
            let v = theoretical_exponent(mode, xi, p, q, beta_offset);
            if v > best {
                best = v;
                argmax = Some((ip, iq));
            }
            cells.push(SweepCell {
                p,
                q,
                theoretical: v,
                empirical: None,
                valid: true,
            });
        }
    }
    SweepResult {
        mode,
        xi,
        p_grid: p_grid.to_vec(),
        q_grid: q_grid.to_vec(),
        cells,
        argmax,
    }
}

/// Documented fixed mix (splitmix64 finalizer) deriving one seed per sweep
/// cell so cells draw independent noise.
pub fn cell_seed(master_seed: u64, cell_index: u64) -> u64 {
    let mut z = master_seed ^ cell_index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Runs the solver on every `(p, q)` cell (prefactors, noise, variant, and
/// iteration budget from `base_config`) and fits the decay exponent of the
/// replica-mean squared distance to `x_*`.  The theoretical exponent is
/// filled in alongside for comparison.
pub fn empirical_sweep(
    problem: &LinearProblem,
    base_config: &RunConfig,
    p_grid: &[f64],
    q_grid: &[f64],
    n_replicas: usize,
    master_seed: u64,
    oracle: &Oracle,
    mode: SweepMode,
    xi: f64,
) -> SweepResult {
    grids_ok(p_grid, q_grid);
    assert!(n_replicas >= 1);
    let mut cells = Vec::with_capacity(p_grid.len() * q_grid.len());
    for (ip, &p) in p_grid.iter().enumerate() {
        for (iq, &q) in q_grid.iter().enumerate() {
            let theoretical = theoretical_exponent(mode, xi, p, q, DEFAULT_BETA_OFFSET);
            let schedule = PolynomialSchedule::new(
                base_config.schedule.c_alpha,
                q,
                base_config.schedule.c_lambda,
                p,
            );
            let cell_index = (ip * q_grid.len() + iq) as u64;
            let (empirical, valid) = match schedule {
                Err(_) => (None, false),
                Ok(schedule) => {
                    let mut config = base_config.clone();
                    config.schedule = schedule;
                    let mc = monte_carlo(
                        problem,
                        &config,
                        n_replicas,
                        cell_seed(master_seed, cell_index),
                        Some(oracle),
                    );
                    let fit = mc.mean.as_ref().and_then(|mean| {
                        let errs = mean.dist_sq_xstar.as_ref()?;
                        estimate_rate(&mean.iterations, errs, DEFAULT_TAIL_FRACTION).ok()
                    });
                    let valid = mc.n_diverged == 0 && fit.is_some();
                    (fit.map(|f| f.exponent), valid)
                }
            };
            cells.push(SweepCell {
                p,
                q,
                theoretical,
                empirical,
                valid,
            });
        }
    }
    let mut argmax = None;
    let mut best = 0.0;
    for (idx, c) in cells.iter().enumerate() {
        if c.theoretical > best {
            best = c.theoretical;
            argmax = Some((idx / q_grid.len(), idx % q_grid.len()));
        }
    }
    SweepResult {
        mode,
        xi,
        p_grid: p_grid.to_vec(),
        q_grid: q_grid.to_vec(),
        cells,
        argmax,
    }
}

/// Convenience wrapper for single-replica rate checks in tests and the CLI.
pub fn fit_tail_exponent(ks: &[u64], errors: &[f64]) -> Option<f64> {
    estimate_rate(ks, errors, DEFAULT_TAIL_FRACTION)
        .ok()
        .map(|r| r.exponent)
}
