//! Acceptance suite: ten end-to-end checks at desk scale, one test per
//! criterion.  Each test prints a single `criterion N: PASS/FAIL - detail`
//! line with the measured numbers before asserting, so a failing clause
//! still reports what was observed.

use reg_descent::analysis::{
    estimate_rate, fit_tail_exponent, grid_with_anchors, theoretical_exponent,
    theoretical_heatmap, SweepMode,
};
use reg_descent::harness::{cli_run, Overrides, EXIT_OK};
use reg_descent::linalg::{dist_sq, norm2, norm2_sq, DenseMatrix, Operator};
use reg_descent::noise::{NoiseModel, RngStream};
use reg_descent::optimizer::{
    monte_carlo, run, InitialPoint, MonteCarloResult, Recording, RunConfig, Trajectory, Variant,
};
use reg_descent::oracles::Oracle;
use reg_descent::problems::ode::ode_problem;
use reg_descent::problems::radon::{phantom, radon_problem, RadonGeometry};
use reg_descent::problems::toy::toy_problem;
use reg_descent::problems::{ridge_gradient, ridge_value, LinearProblem, Objective};
use reg_descent::schedules::{Exponent, PolynomialSchedule, DEFAULT_BETA_OFFSET};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

fn report(n: u32, clauses: &[(bool, String)]) {
    let pass = clauses.iter().all(|c| c.0);
    let detail = clauses
        .iter()
        .map(|(ok, s)| format!("{s} [{}]", if *ok { "ok" } else { "VIOLATED" }))
        .collect::<Vec<_>>()
        .join("; ");
    println!(
        "criterion {n}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn final_of(t: &Trajectory, field: fn(&Trajectory) -> Option<&Vec<f64>>) -> f64 {
    *field(t).expect("diagnostic missing").last().unwrap()
}

fn ok_replicas(mc: &MonteCarloResult) -> Vec<&Trajectory> {
    mc.replicas.iter().filter_map(|r| r.as_ref().ok()).collect()
}

// ---------------------------------------------------------------- shared runs

/// Reg-SGD on the toy problem, shared between criteria 1 and 2.
struct ToyRegRun {
    mc: MonteCarloResult,
    xstar_norm: f64,
    wall: Duration,
}

static TOY_REG: OnceLock<ToyRegRun> = OnceLock::new();

fn toy_reg() -> &'static ToyRegRun {
    TOY_REG.get_or_init(|| {
        let problem = toy_problem();
        let oracle = Oracle::for_problem(&problem).unwrap();
        let schedule =
            PolynomialSchedule::with_rational_exponents(0.1, (2, 3), 1.0, (1, 9)).unwrap();
        let mut cfg = RunConfig::new(
            Variant::RegSgd,
            schedule,
            NoiseModel::GaussianIso { sigma: 0.1 },
        );
        cfg.n_iterations = 100_000;
        let start = Instant::now();
        let mc = monte_carlo(&problem, &cfg, 20, 1001, Some(&oracle));
        let wall = start.elapsed();
        let xstar_norm = norm2(oracle.xstar().unwrap());
        ToyRegRun {
            mc,
            xstar_norm,
            wall,
        }
    })
}

/// Zero-noise full-gradient run on a diagonal problem with spectrum
/// sigma_n = 1/n and coefficients x_{*,n} = n^{-3/2}, recorded at every
/// step.  Shared between criteria 3 and 4.
struct DiagonalRun {
    traj: Trajectory,
    schedule: PolynomialSchedule,
    xstar: Vec<f64>,
    smoothness: f64,
}

static DIAGONAL: OnceLock<DiagonalRun> = OnceLock::new();

fn diagonal_run() -> &'static DiagonalRun {
    DIAGONAL.get_or_init(|| {
        let d = 64;
        let sigmas: Vec<f64> = (1..=d).map(|n| 1.0 / n as f64).collect();
        let xstar: Vec<f64> = (1..=d).map(|n| (n as f64).powf(-1.5)).collect();
        let y: Vec<f64> = sigmas.iter().zip(&xstar).map(|(s, x)| s * x).collect();
        let problem = LinearProblem::single_block(Operator::diagonal(&sigmas), y)
            .unwrap()
            .with_known_fstar(0.0);
        let oracle = Oracle::spectral_for(&problem).unwrap();
        let schedule = PolynomialSchedule::with_exponents(
            1.0,
            Exponent::rational(0, 1).unwrap(),
            1.0,
            Exponent::rational(1, 2).unwrap(),
        )
        .unwrap();
        let mut cfg = RunConfig::new(Variant::RegGd, schedule.clone(), NoiseModel::None);
        cfg.n_iterations = 100_000;
        cfg.recording = Recording::EveryM { stride: 1 };
        let smoothness = problem.smoothness();
        let traj = run(&problem, &cfg, &mut RngStream::new(0, 0), Some(&oracle)).unwrap();
        DiagonalRun {
            traj,
            schedule,
            xstar,
            smoothness,
        }
    })
}

// ------------------------------------------------------------------- criteria

#[test]
fn criterion_01_toy_min_norm_convergence() {
    let r = toy_reg();
    let mean = r.mc.mean.as_ref().unwrap();
    let dist = mean.dist_sq_xstar.as_ref().unwrap();
    let final_dist = *dist.last().unwrap();
    let fit = estimate_rate(&mean.iterations, dist, 0.5).unwrap();
    // min(1-q-p, beta-p, 2*xi*p) at xi = 1, p = 1/9, q = 2/3
    let target = theoretical_exponent(
        SweepMode::As,
        1.0,
        1.0 / 9.0,
        2.0 / 3.0,
        DEFAULT_BETA_OFFSET,
    );
    // note: the ridge path itself sits at squared distance
    // 2*(1/2 - 1/(2+lambda_N))^2 = 7.5e-3 from x_* at lambda_N =
    // 1e5^{-1/9} = 0.278, above the stated threshold; see the run detail
    let norm_cap = 10.0 * (r.xstar_norm + 0.0 + 1.0);
    report(
        1,
        &[
            (
                final_dist < 5e-3,
                format!("mean final dist_sq {final_dist:.4e} (want < 5e-3)"),
            ),
            (
                (fit.exponent - target).abs() <= 0.1,
                format!(
                    "fitted exponent {:.4} (want {:.4} +- 0.1)",
                    fit.exponent, target
                ),
            ),
            (
                r.mc.n_diverged == 0,
                format!("{} of 20 replicas diverged", r.mc.n_diverged),
            ),
            (
                mean.last_max_norm() < norm_cap,
                format!(
                    "max iterate norm {:.3} (want < {:.3})",
                    mean.last_max_norm(),
                    norm_cap
                ),
            ),
            (
                r.wall < Duration::from_secs(60),
                format!("runtime {:.1}s (want < 60s)", r.wall.as_secs_f64()),
            ),
        ],
    );
}

#[test]
fn criterion_02_vanilla_sgd_contrast() {
    let reg_med = median(
        ok_replicas(&toy_reg().mc)
            .iter()
            .map(|t| final_of(t, |t| t.dist_sq_xstar.as_ref()))
            .collect(),
    );

    let problem = toy_problem();
    let oracle = Oracle::for_problem(&problem).unwrap();
    let schedule = PolynomialSchedule::with_rational_exponents(0.1, (1, 2), 0.0, (1, 2)).unwrap();
    let mut cfg = RunConfig::new(
        Variant::VanillaSgd,
        schedule,
        NoiseModel::GaussianIso { sigma: 0.1 },
    );
    cfg.n_iterations = 100_000;
    cfg.init = InitialPoint::Gaussian { scale: 1.0 };
    let mc = monte_carlo(&problem, &cfg, 20, 1002, Some(&oracle));
    let reps = ok_replicas(&mc);
    let van_dist_med = median(
        reps.iter()
            .map(|t| final_of(t, |t| t.dist_sq_xstar.as_ref()))
            .collect(),
    );
    let van_fgap_med = median(
        reps.iter()
            .map(|t| final_of(t, |t| t.f_gap.as_ref()))
            .collect(),
    );
    report(
        2,
        &[
            (
                van_dist_med > 10.0 * reg_med,
                format!(
                    "vanilla median final dist_sq {van_dist_med:.4e} vs reg {reg_med:.4e} \
                     (want > 10x, got {:.1}x)",
                    van_dist_med / reg_med
                ),
            ),
            (
                van_fgap_med < 1e-3,
                format!("vanilla median final f_gap {van_fgap_med:.4e} (want < 1e-3)"),
            ),
            (
                mc.n_diverged == 0,
                format!("{} of 20 replicas diverged", mc.n_diverged),
            ),
        ],
    );
}

#[test]
fn criterion_03_deterministic_rates() {
    let r = diagonal_run();
    let dist = r.traj.dist_sq_xstar.as_ref().unwrap();
    let energy = r.traj.energy.as_ref().unwrap();
    let dist_fit = estimate_rate(&r.traj.iterations, dist, 0.5).unwrap();
    let energy_fit = estimate_rate(&r.traj.iterations, energy, 0.5).unwrap();
    // targets: 2*xi/(2*xi+1) = 1/2 for the squared distance and 1 - q = 1
    // for the energy, at xi = 1/2, q = 0, p = 1/2
    report(
        3,
        &[
            (
                (dist_fit.exponent - 0.5).abs() <= 0.1,
                format!(
                    "dist_sq exponent {:.4} (want 0.5 +- 0.1)",
                    dist_fit.exponent
                ),
            ),
            (
                (energy_fit.exponent - 1.0).abs() <= 0.1,
                format!(
                    "energy exponent {:.4} over {} points, {} excluded (want 1.0 +- 0.1)",
                    energy_fit.exponent, energy_fit.n_points, energy_fit.n_excluded
                ),
            ),
        ],
    );
}

#[test]
fn criterion_04_per_step_descent_inequality() {
    let r = diagonal_run();
    let energy = r.traj.energy.as_ref().unwrap();
    let xstar_sq = norm2_sq(&r.xstar);
    let l = r.smoothness;
    // stride-1 recording makes recorded neighbors consecutive iterations
    for (i, &k) in r.traj.iterations.iter().enumerate() {
        assert_eq!(k, i as u64, "recording must cover every step");
    }
    let mut violations = 0usize;
    let mut max_excess = f64::NEG_INFINITY;
    let mut step_ok = true;
    for i in 1..energy.len() {
        let k = i as u64;
        let (alpha, lambda) = r.schedule.at(k).unwrap();
        let lambda_next = r.schedule.at(k + 1).unwrap().1;
        if alpha > 2.0 / (l + lambda) {
            step_ok = false;
        }
        let factor = 1.0 - 2.0 * lambda * alpha * (1.0 - 0.5 * (l + lambda) * alpha);
        let bound = factor * energy[i - 1] + 0.5 * (lambda - lambda_next) * xstar_sq;
        let excess = (energy[i] - bound) / (1.0 + bound.abs());
        max_excess = max_excess.max(excess);
        if excess > 1e-12 {
            violations += 1;
        }
    }
    report(
        4,
        &[
            (
                violations == 0,
                format!(
                    "{violations} violations over {} steps (max relative excess {max_excess:.2e}, \
                     slack 1e-12)",
                    energy.len() - 1
                ),
            ),
            (
                step_ok,
                "step sizes satisfy alpha_k <= 2/(L + lambda_k)".to_string(),
            ),
        ],
    );
}

#[test]
fn criterion_05_inequality_suite() {
    let start = Instant::now();
    let mut problems: Vec<(&str, LinearProblem)> = vec![
        ("toy", toy_problem()),
        ("ode", ode_problem(6, 16, 13).unwrap().problem),
    ];
    {
        let mut s = RngStream::new(5001, 0);
        let op = Operator::Dense(DenseMatrix::from_flat(24, 16, s.normal_vec(24 * 16)));
        problems.push((
            "tall",
            LinearProblem::single_block(op, s.normal_vec(24)).unwrap(),
        ));
    }
    {
        let mut s = RngStream::new(5001, 1);
        let op = Operator::Dense(DenseMatrix::from_flat(12, 30, s.normal_vec(12 * 30)));
        problems.push((
            "wide",
            LinearProblem::single_block(op, s.normal_vec(12)).unwrap(),
        ));
    }
    {
        let mut s = RngStream::new(5001, 2);
        let b = nalgebra::DMatrix::from_row_slice(20, 8, &s.normal_vec(20 * 8));
        let c = nalgebra::DMatrix::from_row_slice(8, 20, &s.normal_vec(8 * 20));
        let a = b * c;
        let rows: Vec<Vec<f64>> = a.row_iter().map(|r| r.iter().copied().collect()).collect();
        let op = Operator::Dense(DenseMatrix::from_rows(rows));
        problems.push((
            "rank-deficient",
            LinearProblem::single_block(op, s.normal_vec(20)).unwrap(),
        ));
    }

    let rel = 1e-9; // floating-point slack only: the inequalities are exact
    let mut violations = 0usize;
    let mut checks = 0usize;
    let mut note = String::new();
    for (idx, (label, problem)) in problems.iter().enumerate() {
        let oracle = Oracle::for_problem(problem).unwrap();
        let xstar_sq = norm2_sq(oracle.xstar().unwrap());
        let fstar = oracle.fstar().unwrap();
        let l = problem.smoothness();
        let d = problem.dimension();
        let mut s = RngStream::new(5002, idx as u64);
        for _ in 0..100 {
            let x = s.normal_vec(d);
            let la = 10f64.powf(7.0 * s.uniform() - 6.0);
            let lb = 10f64.powf(7.0 * s.uniform() - 6.0);
            let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
            let m_hi = oracle.ridge_min_value(hi).unwrap();
            let m_lo = oracle.ridge_min_value(lo).unwrap();

            // ridge minimum grows with lambda, at most by (hi-lo)/2 |x_*|^2
            let cap = 0.5 * (hi - lo) * xstar_sq;
            let mut bad = m_hi - m_lo < -rel * (1.0 + m_hi.abs());
            bad |= m_hi - m_lo > cap + rel * (1.0 + cap);

            // strong convexity: |x - x_lambda|^2 <= 2 (f_l(x) - min f_l)/l
            let xl = oracle.xlambda(hi).unwrap();
            let gap = ridge_value(problem, &x, hi) - m_hi;
            let rhs = 2.0 * gap / hi;
            bad |= dist_sq(&x, &xl) > rhs + rel * (1.0 + rhs.abs());

            // PL for the ridge objective
            let g_sq = norm2_sq(&ridge_gradient(problem, &x, hi));
            let pl_rhs = g_sq / (2.0 * hi);
            bad |= gap > pl_rhs + rel * (1.0 + pl_rhs.abs());

            // smoothness: |grad f|^2 <= 2 L (f - f_*)
            let smooth_rhs = 2.0 * l * (problem.value(&x) - fstar);
            bad |= norm2_sq(&problem.gradient(&x)) > smooth_rhs + rel * (1.0 + smooth_rhs.abs());

            checks += 4;
            if bad {
                violations += 1;
                if note.is_empty() {
                    note = format!(" (first on {label})");
                }
            }
        }
    }

    // schedule increments: p/(k+1)^{p+1} <= lambda_k - lambda_{k+1} <= p/k^{p+1}
    for &p in &[0.1, 0.5, 1.0] {
        let sched = PolynomialSchedule::new(1.0, 0.0, 1.0, p).unwrap();
        for k in 1..=10_000u64 {
            let lam = sched.at(k).unwrap().1;
            let lam_next = sched.at(k + 1).unwrap().1;
            let diff = lam - lam_next;
            let lower = p / ((k + 1) as f64).powf(p + 1.0);
            let upper = p / (k as f64).powf(p + 1.0);
            checks += 1;
            if lower - diff > 1e-12 * (1.0 + lower) || diff - upper > 1e-12 * (1.0 + upper) {
                violations += 1;
            }
        }
    }
    let wall = start.elapsed();
    report(
        5,
        &[
            (
                violations == 0,
                format!("{violations} violations in {checks} checks{note}"),
            ),
            (
                wall < Duration::from_secs(30),
                format!("runtime {:.1}s (want < 30s)", wall.as_secs_f64()),
            ),
        ],
    );
}

#[test]
fn criterion_06_oracle_equivalence() {
    use nalgebra::{Cholesky, DMatrix, DVector};
    let lambdas = [1e-3, 0.1, 1.0];
    let mut max_rel = 0.0f64;
    let mut compared = 0usize;
    for i in 0..20u64 {
        let mut s = RngStream::new(6001, i);
        // cycle tall / wide / rank-deficient
        let (a, extra) = match i % 3 {
            0 => (DMatrix::from_row_slice(28, 18, &s.normal_vec(28 * 18)), None),
            1 => (DMatrix::from_row_slice(14, 30, &s.normal_vec(14 * 30)), None),
            _ => {
                let b = DMatrix::from_row_slice(22, 8, &s.normal_vec(22 * 8));
                let c = DMatrix::from_row_slice(8, 22, &s.normal_vec(8 * 22));
                (&b * &c, Some((b, c)))
            }
        };
        let y = DVector::from_vec(s.normal_vec(a.nrows()));
        let rows: Vec<Vec<f64>> = a.row_iter().map(|r| r.iter().copied().collect()).collect();
        let problem = LinearProblem::single_block(
            Operator::Dense(DenseMatrix::from_rows(rows)),
            y.iter().copied().collect(),
        )
        .unwrap();
        let oracle = Oracle::spectral_for(&problem).unwrap();

        // independent min-norm route via normal equations
        let x_ref: DVector<f64> = match (i % 3, &extra) {
            (0, _) => {
                let ata = a.transpose() * &a;
                Cholesky::new(ata).unwrap().solve(&(a.transpose() * &y))
            }
            (1, _) => {
                let aat = &a * a.transpose();
                a.transpose() * Cholesky::new(aat).unwrap().solve(&y)
            }
            (_, Some((b, c))) => {
                let z = Cholesky::new(b.transpose() * b)
                    .unwrap()
                    .solve(&(b.transpose() * &y));
                c.transpose() * Cholesky::new(c * c.transpose()).unwrap().solve(&z)
            }
            _ => unreachable!(),
        };
        let x_oracle = oracle.xstar().unwrap();
        let num = (DVector::from_column_slice(x_oracle) - &x_ref).norm();
        max_rel = max_rel.max(num / (1.0 + x_ref.norm()));
        compared += 1;

        // ridge solutions against (A^T A + l I) \ A^T y
        for &l in &lambdas {
            let mut reg = a.transpose() * &a;
            for j in 0..reg.nrows() {
                reg[(j, j)] += l;
            }
            let t_ref = Cholesky::new(reg).unwrap().solve(&(a.transpose() * &y));
            let t_oracle = oracle.xlambda(l).unwrap();
            let num = (DVector::from_column_slice(&t_oracle) - &t_ref).norm();
            max_rel = max_rel.max(num / (1.0 + t_ref.norm()));
            compared += 1;
        }
    }

    // closed forms on the toy problem
    let toy = toy_problem();
    let toy_oracle = Oracle::for_problem(&toy).unwrap();
    let xs = toy_oracle.xstar().unwrap();
    let mut toy_dev = (xs[0] - 0.5).abs().max((xs[1] - 0.5).abs());
    for &l in &lambdas {
        let xl = toy_oracle.xlambda(l).unwrap();
        let c = 1.0 / (2.0 + l);
        toy_dev = toy_dev.max((xl[0] - c).abs()).max((xl[1] - c).abs());
        let dist = dist_sq(xs, &xl).sqrt();
        let closed = l / (std::f64::consts::SQRT_2 * (2.0 + l));
        toy_dev = toy_dev.max((dist - closed).abs());
    }
    report(
        6,
        &[
            (
                max_rel <= 1e-8,
                format!("max relative deviation {max_rel:.2e} over {compared} solves (want <= 1e-8)"),
            ),
            (
                toy_dev <= 1e-12,
                format!("toy closed-form deviation {toy_dev:.2e} (want <= 1e-12)"),
            ),
        ],
    );
}

#[test]
fn criterion_07_heatmap_argmax() {
    let grid = grid_with_anchors(196, &[2.0 / 9.0, 0.25, 0.625, 2.0 / 3.0]);
    let cell = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let mut clauses = vec![(
        grid.len() == 200,
        format!("grid size {} (want 200)", grid.len()),
    )];

    let l2 = theoretical_heatmap(SweepMode::L2, 0.25, &grid, &grid, DEFAULT_BETA_OFFSET);
    let (lp, lq) = l2.argmax_pq().unwrap();
    clauses.push((
        (lp - 0.25).abs() <= cell + 1e-12 && (lq - 0.625).abs() <= cell + 1e-12,
        format!("mean-square argmax ({lp:.4}, {lq:.4}) (want within one cell of (0.25, 0.625))"),
    ));
    clauses.push((
        (l2.max_theoretical() - 0.125).abs() <= 1e-3 + 1e-9,
        format!(
            "mean-square max {:.6} (want 0.125 +- 1e-3)",
            l2.max_theoretical()
        ),
    ));

    let as_ = theoretical_heatmap(SweepMode::As, 0.25, &grid, &grid, DEFAULT_BETA_OFFSET);
    let (ap, aq) = as_.argmax_pq().unwrap();
    clauses.push((
        (ap - 2.0 / 9.0).abs() <= cell + 1e-12 && (aq - 2.0 / 3.0).abs() <= cell + 1e-12,
        format!("pathwise argmax ({ap:.4}, {aq:.4}) (want within one cell of (2/9, 2/3))"),
    ));
    clauses.push((
        (as_.max_theoretical() - 1.0 / 9.0).abs() <= 1e-3 + 1e-9,
        format!(
            "pathwise max {:.6} (want 1/9 +- 1e-3)",
            as_.max_theoretical()
        ),
    ));
    report(7, &clauses);
}

#[test]
fn criterion_08_ode_reconstruction() {
    // truth seed picked so the min-norm solution is not dominated by
    // singular directions too slow to reach within the iteration budget
    let ode = ode_problem(6, 16, 13).unwrap();
    let problem = &ode.problem;
    let oracle = Oracle::for_problem(problem).unwrap();
    let xstar = oracle.xstar().unwrap().to_vec();
    let xstar_norm = norm2(&xstar);

    // step prefactor: reference recipe value 100 rescaled by the smoothness
    // ratio between the reference discretization (d=256, 64 observations)
    // and this one (d=64, 16 observations); see configs/ode.cfg
    let c_alpha = 102.28495627944697;
    let schedule = PolynomialSchedule::with_exponents(
        c_alpha,
        Exponent::rational(2, 3).unwrap(),
        0.001,
        Exponent::rational(1, 3).unwrap(),
    )
    .unwrap();
    let mut cfg = RunConfig::new(
        Variant::RegSgd,
        schedule,
        NoiseModel::GaussianIso { sigma: 1e-3 },
    );
    cfg.batch_size = 4;
    cfg.n_iterations = 100_000;
    let mc = monte_carlo(problem, &cfg, 10, 2001, Some(&oracle));
    let mean = mc.mean.as_ref().unwrap();
    let dist = mean.dist_sq_xstar.as_ref().unwrap();
    let fit = estimate_rate(&mean.iterations, dist, 0.5).unwrap();
    // the reconstruction is the replica-averaged final iterate
    let reg_dist = dist_sq(&mean.final_x, &xstar).sqrt();
    let rel = reg_dist / xstar_norm;

    let van_schedule = PolynomialSchedule::with_exponents(
        c_alpha,
        Exponent::rational(1, 2).unwrap(),
        0.0,
        Exponent::rational(1, 3).unwrap(),
    )
    .unwrap();
    let mut van_cfg = RunConfig::new(
        Variant::VanillaSgd,
        van_schedule,
        NoiseModel::GaussianIso { sigma: 1e-3 },
    );
    van_cfg.batch_size = 4;
    van_cfg.n_iterations = 100_000;
    let van_mc = monte_carlo(problem, &van_cfg, 10, 2002, Some(&oracle));
    let van_reps = ok_replicas(&van_mc);
    let van_dist = van_reps
        .iter()
        .map(|t| dist_sq(&t.final_x, &xstar).sqrt())
        .sum::<f64>()
        / van_reps.len() as f64;

    report(
        8,
        &[
            (
                fit.exponent > 0.05,
                format!("fitted dist_sq exponent {:.4} (want > 0.05)", fit.exponent),
            ),
            (
                rel < 0.1,
                format!(
                    "reconstruction distance {reg_dist:.4} = {rel:.4} relative (want < 0.1)"
                ),
            ),
            (
                van_dist >= 3.0 * reg_dist,
                format!(
                    "plain-SGD mean final distance {van_dist:.4} vs {reg_dist:.4} \
                     (want >= 3x, got {:.1}x)",
                    van_dist / reg_dist
                ),
            ),
            (
                mc.n_diverged == 0 && van_mc.n_diverged == 0,
                format!(
                    "{}+{} diverged replicas",
                    mc.n_diverged, van_mc.n_diverged
                ),
            ),
        ],
    );
}

#[test]
fn criterion_09_radon_variant_ordering() {
    let start = Instant::now();
    let geom = RadonGeometry {
        image_size: 32,
        n_angles: 8,
        n_rays: 24,
    };
    let rp = radon_problem(&geom, &phantom(32)).unwrap();
    let problem = &rp.problem;
    let oracle = Oracle::for_problem(problem).unwrap();
    let xstar_norm = norm2(oracle.xstar().unwrap());

    // prefactors as in configs/radon.cfg; noise variance keeps
    // sigma^2 * dimension at the reference recipe's level
    let c_alpha = 0.6184586114002246;
    let c_lambda = 0.32338461509524286;
    let sigma = 2.0;
    let n_replicas = 3;

    let run_one = |q: (i64, i64), cl: f64, p: (i64, i64), variant, seed| {
        let schedule = PolynomialSchedule::with_exponents(
            c_alpha,
            Exponent::rational(q.0, q.1).unwrap(),
            cl,
            Exponent::rational(p.0, p.1).unwrap(),
        )
        .unwrap();
        let mut cfg = RunConfig::new(variant, schedule, NoiseModel::GaussianIso { sigma });
        cfg.batch_size = 1;
        cfg.n_iterations = 200_000;
        monte_carlo(problem, &cfg, n_replicas, seed, Some(&oracle))
    };

    let reg = run_one((2, 3), c_lambda, (1, 3), Variant::RegSgd, 3001);
    let agg = run_one((2, 3), c_lambda, (2, 3), Variant::RegSgd, 3002);
    let van = run_one((1, 2), 0.0, (1, 3), Variant::VanillaSgd, 3003);

    let final_dist = |mc: &MonteCarloResult| {
        *mc.mean
            .as_ref()
            .unwrap()
            .dist_sq_xstar
            .as_ref()
            .unwrap()
            .last()
            .unwrap()
    };
    let reg_final = final_dist(&reg);
    let agg_final = final_dist(&agg);
    let van_final = final_dist(&van);

    let agg_mean = agg.mean.as_ref().unwrap();
    let agg_exp = fit_tail_exponent(
        &agg_mean.iterations,
        agg_mean.dist_sq_xstar.as_ref().unwrap(),
    )
    .unwrap();

    let reg_mean = reg.mean.as_ref().unwrap();
    let norm_cap = 10.0 * (xstar_norm + 1.0);
    let wall = start.elapsed();
    report(
        9,
        &[
            (
                reg_final < agg_final && reg_final < van_final,
                format!(
                    "final mean dist_sq: decaying ridge {reg_final:.4e} vs fast-decay ridge \
                     {agg_final:.4e} vs plain {van_final:.4e} (want decaying ridge smallest)"
                ),
            ),
            (
                agg_exp < 0.05,
                format!("fast-decay ridge tail exponent {agg_exp:.4} (want < 0.05: plateau)"),
            ),
            (
                reg_mean.last_max_norm() < norm_cap,
                format!(
                    "max iterate norm {:.2} (want < {norm_cap:.2})",
                    reg_mean.last_max_norm()
                ),
            ),
            (
                reg.n_diverged + agg.n_diverged + van.n_diverged == 0,
                format!(
                    "{}+{}+{} diverged replicas",
                    reg.n_diverged, agg.n_diverged, van.n_diverged
                ),
            ),
            (
                wall < Duration::from_secs(300),
                format!("runtime {:.1}s (want < 300s)", wall.as_secs_f64()),
            ),
        ],
    );
}

#[test]
fn criterion_10_reproducible_csvs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let scratch = tempfile::tempdir().unwrap();

    // reduced radon config: same problem and schedule as the preset, fewer
    // iterations and replicas so the double run stays cheap
    let radon_cfg = scratch.path().join("radon_small.cfg");
    std::fs::write(
        &radon_cfg,
        "problem.kind = radon\n\
         problem.image_size = 32\n\
         problem.n_angles = 8\n\
         problem.n_rays = 24\n\
         run.variant = reg_sgd\n\
         run.batch_size = 1\n\
         run.n_iterations = 20000\n\
         run.n_replicas = 3\n\
         run.master_seed = 3001\n\
         schedule.c_alpha = 0.6184586114002246\n\
         schedule.q = 2/3\n\
         schedule.c_lambda = 0.32338461509524286\n\
         schedule.p = 1/3\n\
         noise.kind = gaussian\n\
         noise.sigma = 2\n\
         output.emit = csv\n",
    )
    .unwrap();

    let configs: Vec<(String, PathBuf)> = vec![
        ("toy".into(), manifest.join("../../configs/toy.cfg")),
        ("ode".into(), manifest.join("../../configs/ode.cfg")),
        ("radon-small".into(), radon_cfg),
    ];

    let mut clauses = Vec::new();
    for (label, cfg_path) in &configs {
        let mut dirs = Vec::new();
        for pass in 0..2 {
            let out = scratch.path().join(format!("{label}_{pass}"));
            let ov = Overrides {
                seed: None,
                out: Some(out.to_string_lossy().into_owned()),
                replicas: None,
            };
            let mut log = Vec::new();
            let code = cli_run(cfg_path, &ov, &mut log);
            assert_eq!(
                code,
                EXIT_OK,
                "run of {label} failed:\n{}",
                String::from_utf8_lossy(&log)
            );
            dirs.push(out);
        }
        let mut names: Vec<String> = std::fs::read_dir(&dirs[0])
            .unwrap()
            .filter_map(|e| {
                let name = e.unwrap().file_name().into_string().unwrap();
                (name.ends_with(".csv")).then_some(name)
            })
            .collect();
        names.sort();
        assert!(
            names.iter().any(|n| n.starts_with("replica_")) && names.contains(&"mean.csv".into()),
            "{label}: expected replica CSVs and mean.csv, found {names:?}"
        );
        let identical = names.iter().all(|n| {
            std::fs::read(dirs[0].join(n)).unwrap() == std::fs::read(dirs[1].join(n)).unwrap()
        });
        clauses.push((
            identical,
            format!("{label}: {} CSV files byte-identical across reruns", names.len()),
        ));
    }
    report(10, &clauses);
}
