//! Orchestration behind the CLI subcommands.  Each entry point takes a
//! config path plus overrides, logs human-readable progress to the given
//! writer, emits artifacts, and returns a process exit code:
//! 0 success, 2 config error, 3 all replicas diverged, 4 I/O error,
//! 5 oracle size cap exceeded.

use super::config::{ExperimentConfig, ProblemSpec};
use super::{csv, svg};
use crate::analysis::{
    empirical_sweep, estimate_rate, theoretical_heatmap, SweepResult, DEFAULT_TAIL_FRACTION,
};
use crate::linalg::{norm2, DenseMatrix};
use crate::optimizer::{monte_carlo, RunError, Trajectory};
use crate::oracles::{viscosity_curve, Oracle, OracleError};
use crate::problems::{io as pio, LinearProblem, Objective};
use crate::schedules::{
    predicted_rates, PolynomialSchedule, Quantity, TheoremId, TheoremReport, DEFAULT_BETA_OFFSET,
};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ALL_DIVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_ORACLE_CAP: i32 = 5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("all {0} replicas diverged")]
    AllDiverged(usize),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    OracleCap(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_CONFIG,
            HarnessError::AllDiverged(_) => EXIT_ALL_DIVERGED,
            HarnessError::Io(_) => EXIT_IO,
            HarnessError::OracleCap(_) => EXIT_ORACLE_CAP,
        }
    }
}

impl From<super::config::ConfigError> for HarnessError {
    fn from(e: super::config::ConfigError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub replicas: Option<usize>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        if let Some(o) = &self.out {
            config.output_dir = o.clone();
        }
        if let Some(r) = self.replicas {
            config.n_replicas = r.max(1);
        }
    }
}

/// Respect `REG_DESCENT_THREADS` for the replica/sweep worker pool.  Safe to
/// call repeatedly; only the first call can take effect.
pub fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("REG_DESCENT_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    }
}

fn write_text(path: &Path, body: &str) -> Result<(), HarnessError> {
    std::fs::write(path, body)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn log_report(log: &mut dyn Write, r: &TheoremReport) {
    if r.applies {
        let _ = writeln!(log, "{}: applies", r.theorem.name());
        for (qty, e) in &r.predicted {
            let _ = writeln!(log, "  predicted {} ~ k^-{e}", qty.name());
        }
        for n in &r.notes {
            let _ = writeln!(log, "  note: {n}");
        }
    } else {
        let _ = writeln!(
            log,
            "warning: {} does not apply: {}",
            r.theorem.name(),
            r.violated.join("; ")
        );
    }
}

fn reports_for(
    schedule: &PolynomialSchedule,
    xi: Option<f64>,
    log: &mut dyn Write,
) -> Vec<TheoremReport> {
    let reports: Vec<TheoremReport> = TheoremId::all()
        .iter()
        .map(|t| predicted_rates(schedule, *t, xi, None))
        .collect();
    for r in &reports {
        log_report(log, r);
    }
    reports
}

fn guide_for(
    reports: &[TheoremReport],
    preferred: Option<TheoremId>,
    qty: Quantity,
) -> Option<svg::GuideLine> {
    let pick = preferred
        .and_then(|id| {
            reports
                .iter()
                .find(|r| r.theorem == id && r.applies && r.predicted.contains_key(&qty))
        })
        .or_else(|| {
            reports
                .iter()
                .find(|r| r.applies && r.predicted.contains_key(&qty))
        })?;
    let e = pick.predicted[&qty];
    Some(svg::GuideLine {
        exponent: e,
        label: format!("k^-{e:.3} ({})", pick.theorem.name()),
    })
}

fn log_fits(log: &mut dyn Write, mean: &Trajectory) {
    let columns: [(&str, Option<&Vec<f64>>); 4] = [
        ("f_gap", mean.f_gap.as_ref()),
        ("dist_sq_xstar", mean.dist_sq_xstar.as_ref()),
        ("dist_sq_xlambda", mean.dist_sq_xlambda.as_ref()),
        ("energy", mean.energy.as_ref()),
    ];
    for (name, col) in columns {
        let Some(col) = col else { continue };
        match estimate_rate(&mean.iterations, col, DEFAULT_TAIL_FRACTION) {
            Ok(r) => {
                let _ = writeln!(
                    log,
                    "fitted exponent {name}: {:.4} (r2 {:.3}, {} points)",
                    r.exponent, r.r_squared, r.n_points
                );
            }
            Err(e) => {
                let _ = writeln!(log, "fit skipped for {name}: {e}");
            }
        }
    }
}

fn series_points(ks: &[u64], col: &[f64]) -> Vec<(f64, f64)> {
    ks.iter()
        .zip(col)
        .map(|(&k, &v)| (k as f64, v))
        .collect()
}

pub fn cli_run(config_path: &Path, ov: &Overrides, log: &mut dyn Write) -> i32 {
    init_thread_pool();
    match run_inner(config_path, ov, log) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(
    config_path: &Path,
    ov: &Overrides,
    log: &mut dyn Write,
) -> Result<(), HarnessError> {
    let mut config = ExperimentConfig::load(config_path)?;
    ov.apply(&mut config);
    let built = config.build_problem()?;
    let problem = &built.problem;
    let rc = config.run_config()?;
    if rc.batch_size == 0 || rc.batch_size > problem.n_blocks() {
        return Err(HarnessError::Config(format!(
            "run.batch_size must be in 1..={}, got {}",
            problem.n_blocks(),
            rc.batch_size
        )));
    }
    let _ = writeln!(
        log,
        "problem {} (dimension {}, {} blocks), variant {}, {} iterations, {} replicas, seed {}",
        built.label,
        problem.dimension(),
        problem.n_blocks(),
        rc.variant.name(),
        rc.n_iterations,
        config.n_replicas,
        config.master_seed
    );

    let oracle = match Oracle::for_problem(problem) {
        Ok(o) => {
            let _ = writeln!(log, "oracle backend: {}", o.backend_name());
            Some(o)
        }
        Err(OracleError::TooLarge { detail }) => {
            let _ = writeln!(log, "note: no oracle, diagnostics limited: {detail}");
            None
        }
        Err(e) => return Err(HarnessError::Config(e.to_string())),
    };

    let reports = reports_for(&rc.schedule, config.xi, log);

    let mc = monte_carlo(
        problem,
        &rc,
        config.n_replicas,
        config.master_seed,
        oracle.as_ref(),
    );
    for r in &mc.replicas {
        if let Err(e) = r {
            if !matches!(e, RunError::Diverged { .. }) {
                return Err(HarnessError::Config(e.to_string()));
            }
        }
    }
    if mc.n_diverged == config.n_replicas {
        return Err(HarnessError::AllDiverged(config.n_replicas));
    }
    if mc.n_diverged > 0 {
        let _ = writeln!(
            log,
            "warning: {}/{} replicas diverged; mean taken over the rest",
            mc.n_diverged, config.n_replicas
        );
    }

    let out_dir = PathBuf::from(&config.output_dir);
    ensure_dir(&out_dir)?;
    let digest = config.digest();
    let mean = mc.mean.as_ref().expect("some replica finished");

    if config.emit.csv {
        for (i, rep) in mc.replicas.iter().enumerate() {
            let t = match rep {
                Ok(t) => t,
                Err(RunError::Diverged { partial, .. }) => partial.as_ref(),
                Err(_) => unreachable!("non-divergence errors handled above"),
            };
            write_text(
                &out_dir.join(format!("replica_{i:03}.csv")),
                &csv::trajectory_csv(t),
            )?;
        }
        write_text(&out_dir.join("mean.csv"), &csv::trajectory_csv(mean))?;
    }

    if config.emit.svg {
        if let Some(f_gap) = &mean.f_gap {
            let pts = series_points(&mean.iterations, f_gap);
            let plot = svg::log_log_plot(
                &format!("{}: objective gap", built.label),
                "k",
                "f_gap",
                &[svg::Series {
                    label: "mean f_gap",
                    points: &pts,
                }],
                guide_for(&reports, config.theorem, Quantity::FGap).as_ref(),
                &digest,
            );
            write_text(&out_dir.join("f_gap.svg"), &plot)?;
        }
        let mut dist_series = Vec::new();
        let xstar_pts = mean
            .dist_sq_xstar
            .as_ref()
            .map(|c| series_points(&mean.iterations, c));
        if let Some(pts) = &xstar_pts {
            dist_series.push(svg::Series {
                label: "mean dist_sq to x_*",
                points: pts,
            });
        }
        let xl_pts = mean
            .dist_sq_xlambda
            .as_ref()
            .map(|c| series_points(&mean.iterations, c));
        if let Some(pts) = &xl_pts {
            dist_series.push(svg::Series {
                label: "mean dist_sq to x_lambda",
                points: pts,
            });
        }
        if !dist_series.is_empty() {
            let plot = svg::log_log_plot(
                &format!("{}: squared distances", built.label),
                "k",
                "dist_sq",
                &dist_series,
                guide_for(&reports, config.theorem, Quantity::DistToXStar).as_ref(),
                &digest,
            );
            write_text(&out_dir.join("dist_sq.svg"), &plot)?;
        }
    }

    log_fits(log, mean);
    let _ = writeln!(
        log,
        "final mean max_norm {:.6}, artifacts in {}",
        mean.last_max_norm(),
        out_dir.display()
    );
    Ok(())
}

pub fn cli_validate(
    p: f64,
    q: f64,
    c_alpha: f64,
    c_lambda: f64,
    xi: Option<f64>,
    beta: Option<f64>,
    log: &mut dyn Write,
) -> i32 {
    let schedule = match PolynomialSchedule::new(c_alpha, q, c_lambda, p) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let _ = writeln!(
        log,
        "schedule: alpha_k = {c_alpha} k^-{q}, lambda_k = {c_lambda} k^-{p}"
    );
    for t in TheoremId::all() {
        let r = predicted_rates(&schedule, t, xi, beta);
        log_report(log, &r);
    }
    EXIT_OK
}

pub fn cli_sweep(config_path: &Path, ov: &Overrides, log: &mut dyn Write) -> i32 {
    init_thread_pool();
    match sweep_inner(config_path, ov, log) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}

fn log_sweep_summary(log: &mut dyn Write, which: &str, r: &SweepResult) {
    match r.argmax_pq() {
        Some((p, q)) => {
            let _ = writeln!(
                log,
                "{which} argmax at p={p}, q={q}, value {}",
                r.max_theoretical()
            );
        }
        None => {
            let _ = writeln!(log, "{which}: no positive cell");
        }
    }
}

fn sweep_inner(
    config_path: &Path,
    ov: &Overrides,
    log: &mut dyn Write,
) -> Result<(), HarnessError> {
    let mut config = ExperimentConfig::load(config_path)?;
    ov.apply(&mut config);
    let sw = config
        .sweep
        .clone()
        .ok_or_else(|| HarnessError::Config("config has no sweep.* section".into()))?;

    let out_dir = PathBuf::from(&config.output_dir);
    ensure_dir(&out_dir)?;
    let digest = config.digest();

    let theo = theoretical_heatmap(sw.mode, sw.xi, &sw.p_grid, &sw.q_grid, DEFAULT_BETA_OFFSET);
    log_sweep_summary(log, "theoretical", &theo);
    if config.emit.csv {
        write_text(&out_dir.join("heatmap_theoretical.csv"), &csv::sweep_csv(&theo))?;
    }
    if config.emit.heatmap || config.emit.svg {
        write_text(
            &out_dir.join("heatmap_theoretical.svg"),
            &svg::heatmap_svg(&theo, false, &digest),
        )?;
    }

    if sw.empirical {
        let n_cells = sw.p_grid.len() * sw.q_grid.len();
        if n_cells > sw.cell_cap {
            return Err(HarnessError::Config(format!(
                "empirical sweep of {n_cells} cells exceeds the cap of {} \
                 (raise sweep.cell_cap or thin the grids)",
                sw.cell_cap
            )));
        }
        let built = config.build_problem()?;
        let oracle = match Oracle::for_problem(&built.problem) {
            Ok(o) => o,
            Err(OracleError::TooLarge { detail }) => {
                return Err(HarnessError::OracleCap(detail))
            }
            Err(e) => return Err(HarnessError::Config(e.to_string())),
        };
        if oracle.xstar().is_none() {
            return Err(HarnessError::OracleCap(
                "problem too large for the SVD oracle; empirical sweeps need dist_sq to x_*"
                    .into(),
            ));
        }
        let rc = config.run_config()?;
        let _ = writeln!(
            log,
            "running {} x {} empirical cells, {} replicas each, {} iterations",
            sw.p_grid.len(),
            sw.q_grid.len(),
            config.n_replicas,
            rc.n_iterations
        );
        let emp = empirical_sweep(
            &built.problem,
            &rc,
            &sw.p_grid,
            &sw.q_grid,
            config.n_replicas,
            config.master_seed,
            &oracle,
            sw.mode,
            sw.xi,
        );
        let valid = emp.cells.iter().filter(|c| c.valid).count();
        let close = emp
            .cells
            .iter()
            .filter(|c| {
                c.valid
                    && c.empirical
                        .map(|e| (e - c.theoretical).abs() <= 0.1)
                        .unwrap_or(false)
            })
            .count();
        let _ = writeln!(
            log,
            "empirical cells: {valid}/{} valid, {close} within 0.1 of theoretical",
            emp.cells.len()
        );
        for c in &emp.cells {
            let _ = writeln!(
                log,
                "  cell p={}, q={}: theoretical {:.4}, empirical {}, valid {}",
                c.p,
                c.q,
                c.theoretical,
                c.empirical
                    .map(|e| format!("{e:.4}"))
                    .unwrap_or_else(|| "-".into()),
                c.valid
            );
        }
        if config.emit.csv {
            write_text(&out_dir.join("heatmap_empirical.csv"), &csv::sweep_csv(&emp))?;
        }
        if config.emit.heatmap || config.emit.svg {
            write_text(
                &out_dir.join("heatmap_empirical.svg"),
                &svg::heatmap_svg(&emp, true, &digest),
            )?;
        }
    }
    let _ = writeln!(log, "artifacts in {}", out_dir.display());
    Ok(())
}

pub fn cli_oracle(config_path: &Path, ov: &Overrides, log: &mut dyn Write) -> i32 {
    init_thread_pool();
    match oracle_inner(config_path, ov, log) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}

fn default_lambda_grid() -> Vec<f64> {
    (0..=12).map(|j| 10f64.powf(-(j as f64) / 2.0)).collect()
}

fn oracle_inner(
    config_path: &Path,
    ov: &Overrides,
    log: &mut dyn Write,
) -> Result<(), HarnessError> {
    let mut config = ExperimentConfig::load(config_path)?;
    ov.apply(&mut config);
    let built = config.build_problem()?;
    let problem: &LinearProblem = &built.problem;

    let oracle = match Oracle::spectral_for(problem) {
        Ok(o) => o,
        Err(OracleError::TooLarge { detail }) => return Err(HarnessError::OracleCap(detail)),
        Err(e) => return Err(HarnessError::Config(e.to_string())),
    };
    let decomp = oracle.decomposition().expect("spectral oracle");
    let xstar = oracle.xstar().expect("spectral oracle");
    let _ = writeln!(
        log,
        "problem {}: rank {}, |x_*| = {:.6}, fstar = {:.6e}",
        built.label,
        decomp.rank(),
        norm2(xstar),
        oracle.fstar().unwrap_or(f64::NAN)
    );

    let out_dir = PathBuf::from(&config.output_dir);
    ensure_dir(&out_dir)?;
    let digest = config.digest();

    pio::write_vector(&out_dir.join("xstar.txt"), xstar)
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    if let ProblemSpec::Radon { image_size, .. } = &config.problem {
        let img = DenseMatrix::from_flat(*image_size, *image_size, xstar.to_vec());
        pio::write_matrix(&out_dir.join("xstar_image.txt"), &img)
            .map_err(|e| HarnessError::Io(e.to_string()))?;
    }

    let lambdas = config
        .oracle_lambdas
        .clone()
        .unwrap_or_else(default_lambda_grid);
    let curve = viscosity_curve(decomp, problem.data(), &lambdas)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    if config.emit.csv {
        write_text(&out_dir.join("viscosity.csv"), &csv::viscosity_csv(&curve))?;
    }
    if config.emit.svg {
        let pts: Vec<(f64, f64)> = curve
            .points
            .iter()
            .map(|pt| (pt.lambda, pt.dist_to_xstar))
            .collect();
        let plot = svg::log_log_plot(
            &format!("{}: ridge path distance to x_*", built.label),
            "lambda",
            "|x_lambda - x_*|",
            &[svg::Series {
                label: "dist",
                points: &pts,
            }],
            None,
            &digest,
        );
        write_text(&out_dir.join("viscosity.svg"), &plot)?;
    }
    match curve.xi_hat {
        Some(xi) => {
            let _ = writeln!(
                log,
                "xi_hat = {xi:.4} (r2 {:.4}) over {} ridge weights",
                curve.fit_r_squared.unwrap_or(f64::NAN),
                curve.points.len()
            );
        }
        None => {
            let _ = writeln!(log, "xi_hat: not enough positive points to fit");
        }
    }
    let _ = writeln!(log, "artifacts in {}", out_dir.display());
    Ok(())
}
