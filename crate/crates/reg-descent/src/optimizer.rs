//! The iteration itself: `X_k = X_{k-1} - alpha_k (grad_hat + lambda_k X_{k-1} + D_k)`
//! with per-step block sampling and injected noise, plus Monte Carlo over
//! replicas.

use crate::noise::{NoiseModel, RngStream};
use crate::linalg::{dist_sq, norm2};
use crate::oracles::Oracle;
use crate::problems::{LinearProblem, Objective};
use crate::schedules::PolynomialSchedule;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Stochastic gradient plus decaying ridge term.
    RegSgd,
    /// Full gradient plus decaying ridge term, no noise.
    RegGd,
    /// Stochastic gradient only: the ridge weight is forced to zero.
    VanillaSgd,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::RegSgd => "REG_SGD",
            Variant::RegGd => "REG_GD",
            Variant::VanillaSgd => "VANILLA_SGD",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s.trim().to_ascii_uppercase().as_str() {
            "REG_SGD" => Some(Variant::RegSgd),
            "REG_GD" => Some(Variant::RegGd),
            "VANILLA_SGD" => Some(Variant::VanillaSgd),
            _ => None,
        }
    }

    pub fn all() -> [Variant; 3] {
        [Variant::RegSgd, Variant::RegGd, Variant::VanillaSgd]
    }
}

/// Which iterations get diagnostics recorded.  Iteration 0 (the initial
/// point) and the final iteration are always included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recording {
    /// `k = round(ratio^j)`, deduplicated: uniform spacing on a log axis.
    Geometric { ratio: f64 },
    /// Every `stride`-th iteration.
    EveryM { stride: u64 },
}

impl Default for Recording {
    fn default() -> Self {
        Recording::Geometric { ratio: 1.05 }
    }
}

impl Recording {
    /// Sorted, unique iteration indices in `0..=n`.
    pub fn points(&self, n: u64) -> Vec<u64> {
        let mut ks = vec![0];
        match *self {
            Recording::Geometric { ratio } => {
                assert!(ratio > 1.0, "geometric recording needs ratio > 1");
                let mut t = 1.0_f64;
                loop {
                    let k = t.round() as u64;
                    if k > n {
                        break;
                    }
                    if k > *ks.last().unwrap() {
                        ks.push(k);
                    }
                    t *= ratio;
                    if t > 2.0 * n as f64 + 2.0 {
                        break;
                    }
                }
            }
            Recording::EveryM { stride } => {
                assert!(stride >= 1, "stride must be positive");
                let mut k = stride;
                while k <= n {
                    ks.push(k);
                    k += stride;
                }
            }
        }
        if *ks.last().unwrap() != n {
            ks.push(n);
        }
        ks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    /// The zero vector (the default).
    Zero,
    /// Independent centered Gaussian coordinates with the given standard
    /// deviation, drawn from the replica stream before the first step.
    Gaussian { scale: f64 },
    Point(Vec<f64>),
}

impl Default for InitialPoint {
    fn default() -> Self {
        InitialPoint::Zero
    }
}

impl InitialPoint {
    fn sample(&self, dim: usize, stream: &mut RngStream) -> Result<Vec<f64>, RunError> {
        match self {
            InitialPoint::Zero => Ok(vec![0.0; dim]),
            InitialPoint::Gaussian { scale } => {
                if !(*scale >= 0.0) || !scale.is_finite() {
                    return Err(RunError::Config(format!(
                        "initial point scale must be finite and >= 0, got {scale}"
                    )));
                }
                let mut x = stream.normal_vec(dim);
                for v in &mut x {
                    *v *= scale;
                }
                Ok(x)
            }
            InitialPoint::Point(p) => {
                if p.len() != dim {
                    return Err(RunError::Config(format!(
                        "initial point has length {}, problem dimension is {dim}",
                        p.len()
                    )));
                }
                Ok(p.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub variant: Variant,
    pub schedule: PolynomialSchedule,
    pub noise: NoiseModel,
    /// Blocks drawn per step (without replacement).
    pub batch_size: usize,
    pub init: InitialPoint,
    pub n_iterations: u64,
    pub recording: Recording,
    /// Store the full iterate at every recorded point (memory-heavy).
    pub record_iterates: bool,
}

impl RunConfig {
    pub fn new(variant: Variant, schedule: PolynomialSchedule, noise: NoiseModel) -> Self {
        RunConfig {
            variant,
            schedule,
            noise,
            batch_size: 1,
            init: InitialPoint::Zero,
            n_iterations: 1000,
            recording: Recording::default(),
            record_iterates: false,
        }
    }

    fn validate(&self, problem: &LinearProblem) -> Result<(), RunError> {
        if self.variant != Variant::RegGd {
            if self.batch_size == 0 || self.batch_size > problem.n_blocks() {
                return Err(RunError::Config(format!(
                    "batch_size must be in 1..={}, got {}",
                    problem.n_blocks(),
                    self.batch_size
                )));
            }
            self.noise
                .validate()
                .map_err(|e| RunError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("bad run configuration: {0}")]
    Config(String),
    #[error("iterate diverged at step {first_bad_k} (last finite step {last_finite_k})")]
    Diverged {
        first_bad_k: u64,
        last_finite_k: u64,
        last_finite: Vec<f64>,
        partial: Box<Trajectory>,
    },
    #[error("problem error: {0}")]
    Problem(#[from] crate::problems::ProblemError),
    #[error("noise error: {0}")]
    Noise(#[from] crate::noise::NoiseError),
    #[error("oracle error: {0}")]
    Oracle(#[from] crate::oracles::OracleError),
}

/// Diagnostics at the recorded iterations.  Optional vectors are entirely
/// absent when their reference value is unavailable (no oracle, unknown
/// `min f`, or a zero ridge path).
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub iterations: Vec<u64>,
    /// `alpha_k` at each recorded `k`; `None` at `k = 0`.
    pub alpha: Vec<Option<f64>>,
    /// Effective `lambda_k` (zero for the plain-SGD variant); `None` at `k = 0`.
    pub lambda: Vec<Option<f64>>,
    pub f_gap: Option<Vec<f64>>,
    pub dist_sq_xstar: Option<Vec<f64>>,
    /// `|X_k - x_{lambda_{k+1}}|^2`.
    pub dist_sq_xlambda: Option<Vec<f64>>,
    /// `f_{lambda_{k+1}}(X_k) - min f_{lambda_{k+1}}`.
    pub energy: Option<Vec<f64>>,
    /// Running max of `|X_j|` over all steps `j <= k`, not only recorded ones.
    pub max_norm: Vec<f64>,
    pub iterates: Option<Vec<Vec<f64>>>,
    pub final_x: Vec<f64>,
    pub n_steps: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn last_max_norm(&self) -> f64 {
        self.max_norm.last().copied().unwrap_or(0.0)
    }
}

struct Recorder<'a> {
    problem: &'a LinearProblem,
    oracle: Option<&'a Oracle>,
    schedule: PolynomialSchedule,
    variant: Variant,
    fstar: Option<f64>,
    has_xlambda: bool,
    traj: Trajectory,
    record_iterates: bool,
}

impl<'a> Recorder<'a> {
    fn new(
        problem: &'a LinearProblem,
        config: &RunConfig,
        oracle: Option<&'a Oracle>,
    ) -> Recorder<'a> {
        let fstar = problem.known_fstar().or(oracle.and_then(|o| o.fstar()));
        let ridge_active = config.variant != Variant::VanillaSgd && config.schedule.c_lambda > 0.0;
        let has_xlambda = oracle.is_some() && ridge_active;
        let traj = Trajectory {
            f_gap: fstar.map(|_| Vec::new()),
            dist_sq_xstar: oracle.and_then(|o| o.xstar().map(|_| Vec::new())),
            dist_sq_xlambda: has_xlambda.then(Vec::new),
            energy: has_xlambda.then(Vec::new),
            iterates: config.record_iterates.then(Vec::new),
            ..Trajectory::default()
        };
        Recorder {
            problem,
            oracle,
            schedule: config.schedule.clone(),
            variant: config.variant,
            fstar,
            has_xlambda,
            traj,
            record_iterates: config.record_iterates,
        }
    }

    fn push(
        &mut self,
        k: u64,
        x: &[f64],
        alpha: Option<f64>,
        lambda: Option<f64>,
        max_norm: f64,
    ) -> Result<(), RunError> {
        self.traj.iterations.push(k);
        self.traj.alpha.push(alpha);
        self.traj.lambda.push(lambda);
        self.traj.max_norm.push(max_norm);
        if let Some(f_gap) = &mut self.traj.f_gap {
            f_gap.push(self.problem.value(x) - self.fstar.unwrap());
        }
        if let Some(d) = &mut self.traj.dist_sq_xstar {
            let xstar = self.oracle.unwrap().xstar().unwrap();
            d.push(dist_sq(x, xstar));
        }
        if self.has_xlambda {
            // next-step ridge weight, matching the energy definition
            let (_, lambda_next) = self
                .schedule
                .at(k + 1)
                .map_err(|e| RunError::Config(e.to_string()))?;
            debug_assert!(self.variant != Variant::VanillaSgd);
            let oracle = self.oracle.unwrap();
            let xl = oracle.xlambda(lambda_next)?;
            self.traj
                .dist_sq_xlambda
                .as_mut()
                .unwrap()
                .push(dist_sq(x, &xl));
            let e = oracle.energy(self.problem, x, lambda_next)?;
            self.traj.energy.as_mut().unwrap().push(e);
        }
        if self.record_iterates {
            self.traj.iterates.as_mut().unwrap().push(x.to_vec());
        }
        Ok(())
    }
}

fn finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Runs one trajectory.  The oracle (if any) supplies `x_*`, `x_lambda`, and
/// energy references for diagnostics; it never influences the iteration.
pub fn run(
    problem: &LinearProblem,
    config: &RunConfig,
    stream: &mut RngStream,
    oracle: Option<&Oracle>,
) -> Result<Trajectory, RunError> {
    config.validate(problem)?;
    let dim = problem.dimension();
    let n = config.n_iterations;
    let points = config.recording.points(n);
    let mut next_point = 0usize;

    let mut x = config.init.sample(dim, stream)?;
    if !finite(&x) {
        return Err(RunError::Config("initial point is not finite".into()));
    }
    let mut recorder = Recorder::new(problem, config, oracle);
    let mut max_norm = norm2(&x);
    if points[next_point] == 0 {
        recorder.push(0, &x, None, None, max_norm)?;
        next_point += 1;
    }

    let mut grad = vec![0.0; dim];
    let abc_needs_gap = matches!(config.noise, NoiseModel::AbcScaled { .. })
        && config.variant != Variant::RegGd;
    let fstar_for_gap = problem.known_fstar().or(oracle.and_then(|o| o.fstar()));

    for k in 1..=n {
        let (alpha, lambda_raw) = config
            .schedule
            .at(k)
            .map_err(|e| RunError::Config(e.to_string()))?;
        let lambda = if config.variant == Variant::VanillaSgd {
            0.0
        } else {
            lambda_raw
        };

        match config.variant {
            Variant::RegGd => problem.full_gradient_into(&x, &mut grad),
            Variant::RegSgd | Variant::VanillaSgd => {
                let batch =
                    stream.sample_without_replacement(problem.n_blocks(), config.batch_size);
                problem.stochastic_gradient_into(&x, &batch, &mut grad)?;
            }
        }

        if config.variant == Variant::RegGd || !config.noise.consumes_randomness() {
            for (xi, gi) in x.iter_mut().zip(&grad) {
                *xi -= alpha * (gi + lambda * *xi);
            }
        } else {
            let gap = if abc_needs_gap {
                fstar_for_gap
                    .map(|fs| (problem.value(&x) - fs).max(0.0))
                    .unwrap_or(0.0)
            } else {
                0.0
            };
            let d = config.noise.sample(stream, gap, dim)?;
            for ((xi, gi), di) in x.iter_mut().zip(&grad).zip(&d) {
                *xi -= alpha * (gi + lambda * *xi + di);
            }
        }

        if !finite(&x) {
            let last = recorder
                .traj
                .iterates
                .as_ref()
                .and_then(|it| it.last().cloned())
                .unwrap_or_default();
            let last_k = recorder.traj.iterations.last().copied().unwrap_or(0);
            recorder.traj.n_steps = k - 1;
            return Err(RunError::Diverged {
                first_bad_k: k,
                last_finite_k: last_k,
                last_finite: last,
                partial: Box::new(recorder.traj),
            });
        }
        let nx = norm2(&x);
        if nx > max_norm {
            max_norm = nx;
        }
        if next_point < points.len() && points[next_point] == k {
            recorder.push(k, &x, Some(alpha), Some(lambda), max_norm)?;
            next_point += 1;
        }
    }

    let mut traj = recorder.traj;
    traj.final_x = x;
    traj.n_steps = n;
    Ok(traj)
}

/// Result of a replicated run.  `mean` is `None` when every replica diverged.
pub struct MonteCarloResult {
    pub mean: Option<Trajectory>,
    pub replicas: Vec<Result<Trajectory, RunError>>,
    pub n_diverged: usize,
}

fn mean_of(trajs: &[&Trajectory]) -> Trajectory {
    let first = trajs[0];
    let n = trajs.len() as f64;
    let len = first.iterations.len();
    for t in trajs {
        assert_eq!(
            t.iterations, first.iterations,
            "replicas must share recording points"
        );
    }
    let avg_field = |get: fn(&Trajectory) -> Option<&Vec<f64>>| -> Option<Vec<f64>> {
        get(first)?;
        let mut acc = vec![0.0; len];
        for t in trajs {
            let v = get(t).expect("replicas share diagnostics");
            for (a, vi) in acc.iter_mut().zip(v) {
                *a += vi / n;
            }
        }
        Some(acc)
    };
    let mut mean_final = vec![0.0; first.final_x.len()];
    for t in trajs {
        for (m, v) in mean_final.iter_mut().zip(&t.final_x) {
            *m += v / n;
        }
    }
    // max_norm keeps the worst case across replicas: it backs boundedness
    // checks, where averaging would hide an excursion
    let mut max_norm = first.max_norm.clone();
    for t in &trajs[1..] {
        for (m, v) in max_norm.iter_mut().zip(&t.max_norm) {
            *m = m.max(*v);
        }
    }
    Trajectory {
        iterations: first.iterations.clone(),
        alpha: first.alpha.clone(),
        lambda: first.lambda.clone(),
        f_gap: avg_field(|t| t.f_gap.as_ref()),
        dist_sq_xstar: avg_field(|t| t.dist_sq_xstar.as_ref()),
        dist_sq_xlambda: avg_field(|t| t.dist_sq_xlambda.as_ref()),
        energy: avg_field(|t| t.energy.as_ref()),
        max_norm,
        iterates: None,
        final_x: mean_final,
        n_steps: first.n_steps,
    }
}

/// Runs `n_replicas` independent copies (replica `r` uses stream
/// `(master_seed, r)`) and averages the diagnostic fields pointwise over the
/// replicas that finished.
pub fn monte_carlo(
    problem: &LinearProblem,
    config: &RunConfig,
    n_replicas: usize,
    master_seed: u64,
    oracle: Option<&Oracle>,
) -> MonteCarloResult {
    assert!(n_replicas >= 1);
    let one = |r: usize| -> Result<Trajectory, RunError> {
        let mut stream = RngStream::new(master_seed, r as u64);
        run(problem, config, &mut stream, oracle)
    };
    #[cfg(feature = "parallel")]
    let replicas: Vec<Result<Trajectory, RunError>> = {
        use rayon::prelude::*;
        (0..n_replicas).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let replicas: Vec<Result<Trajectory, RunError>> = (0..n_replicas).map(one).collect();

    let finished: Vec<&Trajectory> = replicas.iter().filter_map(|r| r.as_ref().ok()).collect();
    let n_diverged = n_replicas - finished.len();
    let mean = (!finished.is_empty()).then(|| mean_of(&finished));
    MonteCarloResult {
        mean,
        replicas,
        n_diverged,
    }
}
