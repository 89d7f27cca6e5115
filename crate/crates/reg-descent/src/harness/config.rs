//! Flat key/value experiment configuration.
//!
//! Grammar (one pair per line, `#` starts a comment):
//!
//! ```text
//! file  := line*
//! line  := pair | comment | blank
//! pair  := key '=' value
//! key   := segment ('.' segment)+          e.g. problem.kind, schedule.q
//! value := number | 'a/b' rational | word | path | comma list
//! ```
//!
//! Exponents (`schedule.p`, `schedule.q`) accept exact rationals like `2/3`
//! so boundary checks such as `q = 1 - p` stay exact.  Relative paths are
//! resolved against the config file's directory and must exist at load time.
//! `serialize` emits a canonical form: parsing it back yields an identical
//! configuration, and its SHA-256 hex digest identifies the experiment in
//! artifact comments.

use crate::analysis::SweepMode;
use crate::linalg::Operator;
use crate::noise::NoiseModel;
use crate::optimizer::{InitialPoint, Recording, RunConfig, Variant};
use crate::problems::{io, ode, radon, toy, LinearProblem};
use crate::schedules::{Exponent, PolynomialSchedule, TheoremId};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Most empirical sweep cells a config may request (each cell is a full
/// Monte Carlo run).  Theoretical sweeps are uncapped.
pub const DEFAULT_CELL_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("duplicate config key `{0}`")]
    DuplicateKey(String),
    #[error("missing required config key `{0}`")]
    MissingKey(&'static str),
    #[error("config key `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("referenced file does not exist: {0}")]
    MissingFile(String),
    #[error("cannot read config {path}: {msg}")]
    Unreadable { path: String, msg: String },
    #[error("{0}")]
    Problem(String),
}

/// A schedule exponent as written in the config: exact rational or real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentSpec {
    Real(f64),
    Rational(i64, i64),
}

impl ExponentSpec {
    pub fn parse(s: &str) -> Result<ExponentSpec, String> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: i64 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if d == 0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(ExponentSpec::Rational(n, d))
        } else {
            let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
            Ok(ExponentSpec::Real(v))
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            ExponentSpec::Real(v) => v,
            ExponentSpec::Rational(n, d) => n as f64 / d as f64,
        }
    }

    fn to_exponent(self) -> Result<Exponent, String> {
        match self {
            ExponentSpec::Real(v) => Exponent::real(v).map_err(|e| e.to_string()),
            ExponentSpec::Rational(n, d) => Exponent::rational(n, d).map_err(|e| e.to_string()),
        }
    }
}

impl std::fmt::Display for ExponentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ExponentSpec::Real(v) => write!(f, "{v}"),
            ExponentSpec::Rational(n, d) => write!(f, "{n}/{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub c_alpha: f64,
    pub q: ExponentSpec,
    pub c_lambda: f64,
    pub p: ExponentSpec,
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<PolynomialSchedule, ConfigError> {
        let q = self.q.to_exponent().map_err(|msg| ConfigError::BadValue {
            key: "schedule.q".into(),
            msg,
        })?;
        let p = self.p.to_exponent().map_err(|msg| ConfigError::BadValue {
            key: "schedule.p".into(),
            msg,
        })?;
        PolynomialSchedule::with_exponents(self.c_alpha, q, self.c_lambda, p).map_err(|e| {
            ConfigError::BadValue {
                key: "schedule".into(),
                msg: e.to_string(),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Toy,
    Ode {
        mesh_exponent: u32,
        n_obs: usize,
        truth_seed: u64,
    },
    Radon {
        image_size: usize,
        n_angles: usize,
        n_rays: usize,
        image_path: Option<String>,
    },
    Linear {
        matrix_path: String,
        y_path: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Zero,
    Gaussian { scale: f64 },
}

impl InitSpec {
    fn to_initial_point(self) -> InitialPoint {
        match self {
            InitSpec::Zero => InitialPoint::Zero,
            InitSpec::Gaussian { scale } => InitialPoint::Gaussian { scale },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitSet {
    pub csv: bool,
    pub svg: bool,
    pub heatmap: bool,
}

impl Default for EmitSet {
    fn default() -> Self {
        EmitSet {
            csv: true,
            svg: true,
            heatmap: true,
        }
    }
}

impl EmitSet {
    fn parse(s: &str) -> Result<EmitSet, String> {
        let mut e = EmitSet {
            csv: false,
            svg: false,
            heatmap: false,
        };
        if s.trim() == "none" {
            return Ok(e);
        }
        for part in s.split(',') {
            match part.trim() {
                "csv" => e.csv = true,
                "svg" => e.svg = true,
                "heatmap" => e.heatmap = true,
                other => return Err(format!("unknown emit target `{other}`")),
            }
        }
        Ok(e)
    }

    fn serialize(&self) -> String {
        let mut parts = Vec::new();
        if self.csv {
            parts.push("csv");
        }
        if self.svg {
            parts.push("svg");
        }
        if self.heatmap {
            parts.push("heatmap");
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join(",")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub xi: f64,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub empirical: bool,
    pub cell_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub variant: Variant,
    pub schedule: ScheduleSpec,
    pub noise: NoiseModel,
    pub batch_size: usize,
    pub init: InitSpec,
    pub n_iterations: u64,
    pub recording: Recording,
    pub n_replicas: usize,
    pub master_seed: u64,
    pub output_dir: String,
    pub emit: EmitSet,
    /// Ridge-path exponent used for rate predictions, when known.
    pub xi: Option<f64>,
    /// Preferred regime for the plotted guide line.
    pub theorem: Option<TheoremId>,
    pub sweep: Option<SweepSpec>,
    /// Ridge weights (strictly descending) for the oracle viscosity curve.
    pub oracle_lambdas: Option<Vec<f64>>,
}

/// Key/value store that tracks which keys were consumed, so leftovers can be
/// reported as unknown.
struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn req(&mut self, key: &'static str) -> Result<String, ConfigError> {
        self.take(key).ok_or(ConfigError::MissingKey(key))
    }

    fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            key: key.into(),
            msg: msg.into(),
        }
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => parse_number(&v).map_err(|msg| Self::bad(key, msg)),
        }
    }

    fn take_opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => parse_number(&v).map(Some).map_err(|msg| Self::bad(key, msg)),
        }
    }

    fn take_u64(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Self::bad(key, format!("`{v}` is not an unsigned integer"))),
        }
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.take_u64(key, default as u64)? as usize)
    }

    fn req_usize(&mut self, key: &'static str) -> Result<usize, ConfigError> {
        let v = self.req(key)?;
        v.parse()
            .map_err(|_| Self::bad(key, format!("`{v}` is not an unsigned integer")))
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(Self::bad(key, format!("`{v}` is not true/false"))),
            },
        }
    }

    fn take_list_f64(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    out.push(parse_number(part).map_err(|msg| Self::bad(key, msg))?);
                }
                if out.is_empty() {
                    return Err(Self::bad(key, "empty list"));
                }
                Ok(Some(out))
            }
        }
    }
}

/// A plain float or an `a/b` rational.
fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s.contains('/') {
        return Ok(ExponentSpec::parse(s)?.value());
    }
    s.parse().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_pairs(text: &str) -> Result<Fields, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if key.is_empty()
            || !key.contains('.')
            || key
                .split('.')
                .any(|seg| seg.is_empty() || !seg.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'))
        {
            return Err(ConfigError::Syntax {
                line: i + 1,
                msg: format!("`{key}` is not a dotted lowercase key"),
            });
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::DuplicateKey(key));
        }
    }
    Ok(Fields { map })
}

fn resolve_path(base_dir: &Path, raw: &str) -> Result<String, ConfigError> {
    let p = Path::new(raw);
    let full = if p.is_absolute() {
        PathBuf::from(p)
    } else {
        base_dir.join(p)
    };
    if !full.is_file() {
        return Err(ConfigError::MissingFile(full.display().to_string()));
    }
    Ok(full.display().to_string())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        ExperimentConfig::parse_str(&text, base)
    }

    pub fn parse_str(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
        let mut f = parse_pairs(text)?;

        let problem = match f.req("problem.kind")?.as_str() {
            "toy" => ProblemSpec::Toy,
            "ode" => ProblemSpec::Ode {
                mesh_exponent: f.req_usize("problem.mesh_exponent")? as u32,
                n_obs: f.req_usize("problem.n_obs")?,
                truth_seed: f.take_u64("problem.truth_seed", 0)?,
            },
            "radon" => ProblemSpec::Radon {
                image_size: f.req_usize("problem.image_size")?,
                n_angles: f.req_usize("problem.n_angles")?,
                n_rays: f.req_usize("problem.n_rays")?,
                image_path: match f.take("problem.image_path") {
                    None => None,
                    Some(raw) => Some(resolve_path(base_dir, &raw)?),
                },
            },
            "linear" => ProblemSpec::Linear {
                matrix_path: resolve_path(base_dir, &f.req("problem.matrix_path")?)?,
                y_path: resolve_path(base_dir, &f.req("problem.y_path")?)?,
            },
            other => {
                return Err(Fields::bad(
                    "problem.kind",
                    format!("`{other}` is not one of toy|ode|radon|linear"),
                ))
            }
        };

        let variant = match f.take("run.variant") {
            None => Variant::RegSgd,
            Some(v) => Variant::parse(&v)
                .ok_or_else(|| Fields::bad("run.variant", format!("unknown variant `{v}`")))?,
        };

        let schedule = ScheduleSpec {
            c_alpha: {
                let v = f.req("schedule.c_alpha")?;
                parse_number(&v).map_err(|msg| Fields::bad("schedule.c_alpha", msg))?
            },
            q: {
                let v = f.req("schedule.q")?;
                ExponentSpec::parse(&v).map_err(|msg| Fields::bad("schedule.q", msg))?
            },
            c_lambda: f.take_f64("schedule.c_lambda", 0.0)?,
            p: match f.take("schedule.p") {
                None => ExponentSpec::Real(0.0),
                Some(v) => ExponentSpec::parse(&v).map_err(|msg| Fields::bad("schedule.p", msg))?,
            },
        };

        let noise = match f.take("noise.kind").as_deref() {
            None | Some("none") => NoiseModel::None,
            Some("gaussian") => NoiseModel::GaussianIso {
                sigma: f.take_f64("noise.sigma", 0.0)?,
            },
            Some("abc") => NoiseModel::AbcScaled {
                a: f.take_f64("noise.a", 0.0)?,
                sigma: f.take_f64("noise.sigma", 0.0)?,
            },
            Some(other) => {
                return Err(Fields::bad(
                    "noise.kind",
                    format!("`{other}` is not one of none|gaussian|abc"),
                ))
            }
        };

        let init = match f.take("run.init").as_deref() {
            None | Some("zero") => InitSpec::Zero,
            Some("gaussian") => InitSpec::Gaussian {
                scale: f.take_f64("run.init_scale", 1.0)?,
            },
            Some(other) => {
                return Err(Fields::bad(
                    "run.init",
                    format!("`{other}` is not one of zero|gaussian"),
                ))
            }
        };

        let recording = match f.take("run.recording").as_deref() {
            None | Some("geometric") => Recording::Geometric {
                ratio: f.take_f64("run.recording_ratio", 1.05)?,
            },
            Some("every") => Recording::EveryM {
                stride: f.take_u64("run.recording_stride", 1)?,
            },
            Some(other) => {
                return Err(Fields::bad(
                    "run.recording",
                    format!("`{other}` is not one of geometric|every"),
                ))
            }
        };

        let theorem = match f.take("rates.theorem") {
            None => None,
            Some(v) => Some(
                TheoremId::parse(&v)
                    .ok_or_else(|| Fields::bad("rates.theorem", format!("unknown theorem `{v}`")))?,
            ),
        };

        let sweep = match f.take("sweep.mode") {
            None => None,
            Some(m) => {
                let mode = SweepMode::parse(&m)
                    .ok_or_else(|| Fields::bad("sweep.mode", format!("`{m}` is not L2|AS|DET")))?;
                let xi = {
                    let v = f.req("sweep.xi")?;
                    parse_number(&v).map_err(|msg| Fields::bad("sweep.xi", msg))?
                };
                let p_grid = f
                    .take_list_f64("sweep.p_grid")?
                    .ok_or(ConfigError::MissingKey("sweep.p_grid"))?;
                let q_grid = f
                    .take_list_f64("sweep.q_grid")?
                    .ok_or(ConfigError::MissingKey("sweep.q_grid"))?;
                for (key, grid) in [("sweep.p_grid", &p_grid), ("sweep.q_grid", &q_grid)] {
                    if grid.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Fields::bad(key, "grid must be strictly ascending"));
                    }
                    if grid.iter().any(|v| !(0.0..1.0).contains(v)) {
                        return Err(Fields::bad(key, "grid values must lie in [0, 1)"));
                    }
                }
                Some(SweepSpec {
                    mode,
                    xi,
                    p_grid,
                    q_grid,
                    empirical: f.take_bool("sweep.empirical", false)?,
                    cell_cap: f.take_usize("sweep.cell_cap", DEFAULT_CELL_CAP)?,
                })
            }
        };

        let oracle_lambdas = f.take_list_f64("oracle.lambdas")?;
        if let Some(ls) = &oracle_lambdas {
            if ls.windows(2).any(|w| w[0] <= w[1]) || ls.iter().any(|l| *l <= 0.0) {
                return Err(Fields::bad(
                    "oracle.lambdas",
                    "ridge weights must be positive and strictly descending",
                ));
            }
        }

        let config = ExperimentConfig {
            problem,
            variant,
            schedule,
            noise,
            batch_size: f.take_usize("run.batch_size", 1)?,
            init,
            n_iterations: f.take_u64("run.n_iterations", 1000)?,
            recording,
            n_replicas: f.take_usize("run.n_replicas", 1)?,
            master_seed: f.take_u64("run.master_seed", 0)?,
            output_dir: f.take("output.dir").unwrap_or_else(|| "out".into()),
            emit: match f.take("output.emit") {
                None => EmitSet::default(),
                Some(v) => EmitSet::parse(&v).map_err(|msg| Fields::bad("output.emit", msg))?,
            },
            xi: f.take_opt_f64("rates.xi")?,
            theorem,
            sweep,
            oracle_lambdas,
        };

        if let Some(stray) = f.map.keys().next() {
            return Err(ConfigError::UnknownKey(stray.clone()));
        }
        if config.n_replicas == 0 {
            return Err(Fields::bad("run.n_replicas", "must be at least 1"));
        }
        config.schedule.build()?;
        config
            .noise
            .validate()
            .map_err(|e| Fields::bad("noise", e.to_string()))?;
        Ok(config)
    }

    /// Canonical text form; `parse_str(serialize(c))` reproduces `c` exactly.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        match &self.problem {
            ProblemSpec::Toy => {
                let _ = writeln!(s, "problem.kind = toy");
            }
            ProblemSpec::Ode {
                mesh_exponent,
                n_obs,
                truth_seed,
            } => {
                let _ = writeln!(s, "problem.kind = ode");
                let _ = writeln!(s, "problem.mesh_exponent = {mesh_exponent}");
                let _ = writeln!(s, "problem.n_obs = {n_obs}");
                let _ = writeln!(s, "problem.truth_seed = {truth_seed}");
            }
            ProblemSpec::Radon {
                image_size,
                n_angles,
                n_rays,
                image_path,
            } => {
                let _ = writeln!(s, "problem.kind = radon");
                let _ = writeln!(s, "problem.image_size = {image_size}");
                let _ = writeln!(s, "problem.n_angles = {n_angles}");
                let _ = writeln!(s, "problem.n_rays = {n_rays}");
                if let Some(p) = image_path {
                    let _ = writeln!(s, "problem.image_path = {p}");
                }
            }
            ProblemSpec::Linear {
                matrix_path,
                y_path,
            } => {
                let _ = writeln!(s, "problem.kind = linear");
                let _ = writeln!(s, "problem.matrix_path = {matrix_path}");
                let _ = writeln!(s, "problem.y_path = {y_path}");
            }
        }
        let _ = writeln!(s, "run.variant = {}", self.variant.name().to_ascii_lowercase());
        let _ = writeln!(s, "run.batch_size = {}", self.batch_size);
        let _ = writeln!(s, "run.n_iterations = {}", self.n_iterations);
        match self.init {
            InitSpec::Zero => {
                let _ = writeln!(s, "run.init = zero");
            }
            InitSpec::Gaussian { scale } => {
                let _ = writeln!(s, "run.init = gaussian");
                let _ = writeln!(s, "run.init_scale = {scale}");
            }
        }
        match self.recording {
            Recording::Geometric { ratio } => {
                let _ = writeln!(s, "run.recording = geometric");
                let _ = writeln!(s, "run.recording_ratio = {ratio}");
            }
            Recording::EveryM { stride } => {
                let _ = writeln!(s, "run.recording = every");
                let _ = writeln!(s, "run.recording_stride = {stride}");
            }
        }
        let _ = writeln!(s, "run.n_replicas = {}", self.n_replicas);
        let _ = writeln!(s, "run.master_seed = {}", self.master_seed);
        let _ = writeln!(s, "schedule.c_alpha = {}", self.schedule.c_alpha);
        let _ = writeln!(s, "schedule.q = {}", self.schedule.q);
        let _ = writeln!(s, "schedule.c_lambda = {}", self.schedule.c_lambda);
        let _ = writeln!(s, "schedule.p = {}", self.schedule.p);
        match self.noise {
            NoiseModel::None => {
                let _ = writeln!(s, "noise.kind = none");
            }
            NoiseModel::GaussianIso { sigma } => {
                let _ = writeln!(s, "noise.kind = gaussian");
                let _ = writeln!(s, "noise.sigma = {sigma}");
            }
            NoiseModel::AbcScaled { a, sigma } => {
                let _ = writeln!(s, "noise.kind = abc");
                let _ = writeln!(s, "noise.a = {a}");
                let _ = writeln!(s, "noise.sigma = {sigma}");
            }
        }
        let _ = writeln!(s, "output.dir = {}", self.output_dir);
        let _ = writeln!(s, "output.emit = {}", self.emit.serialize());
        if let Some(xi) = self.xi {
            let _ = writeln!(s, "rates.xi = {xi}");
        }
        if let Some(t) = self.theorem {
            let _ = writeln!(s, "rates.theorem = {}", t.name());
        }
        if let Some(sw) = &self.sweep {
            let _ = writeln!(s, "sweep.mode = {}", sw.mode.name());
            let _ = writeln!(s, "sweep.xi = {}", sw.xi);
            let _ = writeln!(s, "sweep.p_grid = {}", join_numbers(&sw.p_grid));
            let _ = writeln!(s, "sweep.q_grid = {}", join_numbers(&sw.q_grid));
            let _ = writeln!(s, "sweep.empirical = {}", sw.empirical);
            let _ = writeln!(s, "sweep.cell_cap = {}", sw.cell_cap);
        }
        if let Some(ls) = &self.oracle_lambdas {
            let _ = writeln!(s, "oracle.lambdas = {}", join_numbers(ls));
        }
        s
    }

    /// SHA-256 hex digest of the canonical serialization.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.serialize().as_bytes());
        let out = h.finalize();
        let mut hex = String::with_capacity(64);
        for b in out {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }

    pub fn run_config(&self) -> Result<RunConfig, ConfigError> {
        let mut rc = RunConfig::new(self.variant, self.schedule.build()?, self.noise);
        rc.batch_size = self.batch_size;
        rc.init = self.init.to_initial_point();
        rc.n_iterations = self.n_iterations;
        rc.recording = self.recording;
        Ok(rc)
    }

    pub fn build_problem(&self) -> Result<BuiltProblem, ConfigError> {
        let wrap = |e: crate::problems::ProblemError| ConfigError::Problem(e.to_string());
        match &self.problem {
            ProblemSpec::Toy => Ok(BuiltProblem {
                problem: toy::toy_problem(),
                label: "toy".into(),
            }),
            ProblemSpec::Ode {
                mesh_exponent,
                n_obs,
                truth_seed,
            } => {
                let ode = ode::ode_problem(*mesh_exponent, *n_obs, *truth_seed).map_err(wrap)?;
                Ok(BuiltProblem {
                    problem: ode.problem,
                    label: format!("ode(d={}, obs={n_obs})", 1usize << *mesh_exponent),
                })
            }
            ProblemSpec::Radon {
                image_size,
                n_angles,
                n_rays,
                image_path,
            } => {
                let geom = radon::RadonGeometry {
                    image_size: *image_size,
                    n_angles: *n_angles,
                    n_rays: *n_rays,
                };
                let image = match image_path {
                    None => radon::phantom(*image_size),
                    Some(p) => {
                        let m = io::read_matrix(Path::new(p)).map_err(wrap)?;
                        if m.nrows() != *image_size || m.ncols() != *image_size {
                            return Err(ConfigError::Problem(format!(
                                "image file is {}x{}, expected {image_size}x{image_size}",
                                m.nrows(),
                                m.ncols()
                            )));
                        }
                        m.data().to_vec()
                    }
                };
                let rp = radon::radon_problem(&geom, &image).map_err(wrap)?;
                Ok(BuiltProblem {
                    problem: rp.problem,
                    label: format!("radon({image_size}px, {n_angles} angles, {n_rays} rays)"),
                })
            }
            ProblemSpec::Linear {
                matrix_path,
                y_path,
            } => {
                let m = io::read_matrix(Path::new(matrix_path)).map_err(wrap)?;
                let y = io::read_vector(Path::new(y_path)).map_err(wrap)?;
                let label = format!("linear({}x{})", m.nrows(), m.ncols());
                let problem =
                    LinearProblem::row_blocks(Operator::Dense(m), y).map_err(wrap)?;
                Ok(BuiltProblem { problem, label })
            }
        }
    }
}

pub struct BuiltProblem {
    pub problem: LinearProblem,
    pub label: String,
}

fn join_numbers(vs: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}
