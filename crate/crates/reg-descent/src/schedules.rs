//! Polynomial step-size and ridge schedules, and the admissibility checks for
//! the convergence-rate regimes they unlock.
//!
//! A schedule is the pair `alpha_k = c_alpha * k^-q`, `lambda_k = c_lambda * k^-p`
//! with the iteration index starting at `k = 1`.  Everything downstream (rate
//! predictions, heatmaps, the optimizer) consumes this type.

use num_rational::Ratio;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Tolerance for boundary membership when an exponent is only known as a float.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("c_alpha must be positive, got {0}")]
    NonPositiveStepPrefactor(f64),
    #[error("c_lambda must be non-negative, got {0}")]
    NegativeRidgePrefactor(f64),
    #[error("exponent must be a finite non-negative real, got {0}")]
    BadExponent(f64),
    #[error("zero denominator in rational exponent")]
    ZeroDenominator,
    #[error("k_start must be positive")]
    BadKStart,
    #[error("iteration index must be >= 1, got {0}")]
    BadIteration(u64),
    #[error("xi must be positive and finite, got {0}")]
    BadXi(f64),
    #[error("optimal schedules exist for L2_RATE, AS_RATE and DET_RATE only")]
    NoOptimalSchedule,
}

/// A schedule exponent.  Carries an exact rational representation when the
/// caller supplied one, so that boundary cases like `q = 1 - p` can be decided
/// without floating-point guesswork.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    value: f64,
    exact: Option<Ratio<i64>>,
}

impl Exponent {
    pub fn real(value: f64) -> Result<Self, ScheduleError> {
        if !value.is_finite() || value < 0.0 {
            return Err(ScheduleError::BadExponent(value));
        }
        Ok(Exponent { value, exact: None })
    }

    pub fn rational(num: i64, den: i64) -> Result<Self, ScheduleError> {
        if den == 0 {
            return Err(ScheduleError::ZeroDenominator);
        }
        let r = Ratio::new(num, den);
        let value = *r.numer() as f64 / *r.denom() as f64;
        if value < 0.0 {
            return Err(ScheduleError::BadExponent(value));
        }
        Ok(Exponent {
            value,
            exact: Some(r),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn from_ratio(r: Ratio<i64>) -> Self {
        Exponent {
            value: *r.numer() as f64 / *r.denom() as f64,
            exact: Some(r),
        }
    }

    /// Exact comparison when both sides carry rationals, otherwise a
    /// comparison with absolute tolerance `BOUNDARY_TOL`.
    fn cmp_tol(&self, other: &Exponent) -> Ordering {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => {
                let d = self.value - other.value;
                if d.abs() <= BOUNDARY_TOL {
                    Ordering::Equal
                } else if d < 0.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    fn lt(&self, other: &Exponent) -> bool {
        self.cmp_tol(other) == Ordering::Less
    }
    fn le(&self, other: &Exponent) -> bool {
        self.cmp_tol(other) != Ordering::Greater
    }
    fn gt(&self, other: &Exponent) -> bool {
        self.cmp_tol(other) == Ordering::Greater
    }
    fn ge(&self, other: &Exponent) -> bool {
        self.cmp_tol(other) != Ordering::Less
    }
    fn eq_tol(&self, other: &Exponent) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }

    fn const_ratio(num: i64, den: i64) -> Exponent {
        Exponent::from_ratio(Ratio::new(num, den))
    }

    /// `1 - self`; exactness propagates.
    fn one_minus(&self) -> Exponent {
        match self.exact {
            Some(r) => Exponent::from_ratio(Ratio::from_integer(1) - r),
            None => Exponent {
                value: 1.0 - self.value,
                exact: None,
            },
        }
    }

    fn plus(&self, other: &Exponent) -> Exponent {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => Exponent::from_ratio(a + b),
            _ => Exponent {
                value: self.value + other.value,
                exact: None,
            },
        }
    }

    fn scale(&self, num: i64, den: i64) -> Exponent {
        match self.exact {
            Some(r) => Exponent::from_ratio(r * Ratio::new(num, den)),
            None => Exponent {
                value: self.value * num as f64 / den as f64,
                exact: None,
            },
        }
    }

    /// `(self + 1) / 2`
    fn half_way_to_one(&self) -> Exponent {
        self.plus(&Exponent::const_ratio(1, 1)).scale(1, 2)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

/// `alpha_k = c_alpha * k^-q`, `lambda_k = c_lambda * k^-p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSchedule {
    pub c_alpha: f64,
    pub q: Exponent,
    pub c_lambda: f64,
    pub p: Exponent,
    /// First iteration index fed to the power law (default 1); the optimizer
    /// evaluates step `k` of a run at index `k_start + k - 1`.
    pub k_start: u64,
}

impl PolynomialSchedule {
    pub fn new(c_alpha: f64, q: f64, c_lambda: f64, p: f64) -> Result<Self, ScheduleError> {
        Self::build(c_alpha, Exponent::real(q)?, c_lambda, Exponent::real(p)?)
    }

    /// Same as [`new`](Self::new) but with exponents given as exact fractions
    /// `q = q_num/q_den`, `p = p_num/p_den`, so boundary admissibility checks
    /// (`q = 1 - p`, `p = 1/2`, ...) are decided exactly.
    pub fn with_rational_exponents(
        c_alpha: f64,
        q: (i64, i64),
        c_lambda: f64,
        p: (i64, i64),
    ) -> Result<Self, ScheduleError> {
        Self::build(
            c_alpha,
            Exponent::rational(q.0, q.1)?,
            c_lambda,
            Exponent::rational(p.0, p.1)?,
        )
    }

    /// General form: exponents built separately via [`Exponent::real`] or
    /// [`Exponent::rational`], e.g. when only one of them is exact.
    pub fn with_exponents(
        c_alpha: f64,
        q: Exponent,
        c_lambda: f64,
        p: Exponent,
    ) -> Result<Self, ScheduleError> {
        Self::build(c_alpha, q, c_lambda, p)
    }

    fn build(
        c_alpha: f64,
        q: Exponent,
        c_lambda: f64,
        p: Exponent,
    ) -> Result<Self, ScheduleError> {
        if !(c_alpha > 0.0) || !c_alpha.is_finite() {
            return Err(ScheduleError::NonPositiveStepPrefactor(c_alpha));
        }
        if !(c_lambda >= 0.0) || !c_lambda.is_finite() {
            return Err(ScheduleError::NegativeRidgePrefactor(c_lambda));
        }
        Ok(PolynomialSchedule {
            c_alpha,
            q,
            c_lambda,
            p,
            k_start: 1,
        })
    }

    pub fn starting_at(mut self, k_start: u64) -> Result<Self, ScheduleError> {
        if k_start == 0 {
            return Err(ScheduleError::BadKStart);
        }
        self.k_start = k_start;
        Ok(self)
    }

    /// `(alpha_k, lambda_k)` at iteration `k >= 1`.
    pub fn at(&self, k: u64) -> Result<(f64, f64), ScheduleError> {
        if k == 0 {
            return Err(ScheduleError::BadIteration(k));
        }
        let kf = k as f64;
        Ok((
            self.c_alpha * kf.powf(-self.q.value),
            self.c_lambda * kf.powf(-self.p.value),
        ))
    }
}

/// The four guarantee regimes the validator knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// Mean-square rates for the stochastic iteration.
    L2Rate,
    /// Pathwise (almost-sure) rates, parametrized by a pathwise exponent
    /// `beta < 2q - 1`.
    AsRate,
    /// Mean-square convergence without a rate, checked symbolically for
    /// polynomial schedules.
    L2General,
    /// Rates for the noiseless (deterministic) iteration.
    DetRate,
}

impl TheoremId {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::L2Rate => "L2_RATE",
            TheoremId::AsRate => "AS_RATE",
            TheoremId::L2General => "L2_GENERAL",
            TheoremId::DetRate => "DET_RATE",
        }
    }

    pub fn parse(s: &str) -> Option<TheoremId> {
        match s.to_ascii_uppercase().as_str() {
            "L2_RATE" | "L2" => Some(TheoremId::L2Rate),
            "AS_RATE" | "AS" => Some(TheoremId::AsRate),
            "L2_GENERAL" => Some(TheoremId::L2General),
            "DET_RATE" | "DET" => Some(TheoremId::DetRate),
            _ => None,
        }
    }

    pub fn all() -> [TheoremId; 4] {
        [
            TheoremId::L2Rate,
            TheoremId::AsRate,
            TheoremId::L2General,
            TheoremId::DetRate,
        ]
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantities a regime predicts a decay exponent for.
///
/// Normalization: `FGap` is the exponent of `f(X_k) - f(x_*)`; `Energy` that
/// of the ridge-shifted gap `E_k`; `DistToXStar` that of the *squared*
/// distance to the minimum-norm solution.  `DistToXLambda` is the exponent of
/// the squared distance to the ridge path for `L2_RATE`/`DET_RATE` and of the
/// plain distance for `AS_RATE` (the pathwise statement is on the norm; its
/// squared version doubles the exponent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    FGap,
    Energy,
    DistToXLambda,
    DistToXStar,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::FGap => "f_gap",
            Quantity::Energy => "energy",
            Quantity::DistToXLambda => "dist_to_xlambda",
            Quantity::DistToXStar => "dist_to_xstar",
        }
    }
}

/// Outcome of checking one schedule against one regime.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub applies: bool,
    /// Human-readable conditions that failed; empty iff `applies`.
    pub violated: Vec<String>,
    /// Predicted decay exponents, keyed by quantity; see [`Quantity`] for the
    /// squared/plain-norm convention per regime.
    pub predicted: BTreeMap<Quantity, f64>,
    /// Informational remarks (defaulted beta, ignored arguments,
    /// problem-dependent conditions that could not be checked here).
    pub notes: Vec<String>,
}

impl TheoremReport {
    fn new(theorem: TheoremId) -> Self {
        TheoremReport {
            theorem,
            applies: true,
            violated: Vec::new(),
            predicted: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, condition: &str, detail: String) {
        self.applies = false;
        self.violated.push(format!("{condition}: {detail}"));
    }

    fn check(&mut self, ok: bool, condition: &str, detail: String) {
        if !ok {
            self.fail(condition, detail);
        }
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.theorem,
            if self.applies { "applies" } else { "does not apply" }
        )?;
        for v in &self.violated {
            writeln!(f, "  violated  {v}")?;
        }
        for (qty, e) in &self.predicted {
            writeln!(f, "  predicted {} ~ k^-{:.6}", qty.name(), e)?;
        }
        for n in &self.notes {
            writeln!(f, "  note      {n}")?;
        }
        Ok(())
    }
}

/// Default pathwise exponent when none is supplied: just below its supremum
/// `2q - 1`.
pub const DEFAULT_BETA_OFFSET: f64 = 1e-3;

/// Optional problem data for conditions that involve more than the schedule.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationExtras {
    /// Pathwise exponent `beta` for `AS_RATE`.
    pub beta: Option<f64>,
    /// Smoothness constant `L` of the objective, needed by the `q = 0` cases
    /// of `DET_RATE`.
    pub smoothness: Option<f64>,
    /// Decay exponent `xi` of the ridge path, `|x_lambda - x_*| <= C lambda^xi`;
    /// unlocks the `dist_to_xstar` prediction.
    pub xi: Option<f64>,
}

/// Check whether `theorem` applies to `s` and, if it does, fill in the
/// predicted exponents that follow from the schedule alone (plus `xi`/`beta`
/// when given).
pub fn validate_theorem(
    s: &PolynomialSchedule,
    theorem: TheoremId,
    extras: ValidationExtras,
) -> TheoremReport {
    let mut rep = TheoremReport::new(theorem);
    let p = s.p;
    let q = s.q;
    let zero = Exponent::const_ratio(0, 1);
    let one = Exponent::const_ratio(1, 1);
    let half = Exponent::const_ratio(1, 2);
    let third = Exponent::const_ratio(1, 3);
    let one_minus_p = p.one_minus();

    if extras.beta.is_some() && theorem != TheoremId::AsRate {
        rep.notes
            .push("beta is only used by AS_RATE; ignored here".into());
    }

    match theorem {
        TheoremId::L2Rate => {
            rep.check(
                p.gt(&zero) && p.le(&half),
                "p in (0, 1/2]",
                format!("p = {p}"),
            );
            rep.check(
                q.gt(&p) && q.le(&one_minus_p),
                "q in (p, 1-p]",
                format!("p = {p}, q = {q}"),
            );
            if rep.applies && q.eq_tol(&one_minus_p) {
                rep.check(
                    2.0 * s.c_lambda * s.c_alpha > 1.0 - q.value(),
                    "2*c_lambda*c_alpha > 1-q at the boundary q = 1-p",
                    format!("2*{}*{} vs {}", s.c_lambda, s.c_alpha, 1.0 - q.value()),
                );
            }
            if rep.applies {
                let pv = p.value();
                let qv = q.value();
                rep.predicted.insert(Quantity::FGap, pv.min(qv - pv));
                rep.predicted
                    .insert(Quantity::Energy, (1.0 - qv).min(qv - pv));
                // the distance bounds need the smaller window p < 1/3, 2p < q < 1-p
                let two_p = p.scale(2, 1);
                if p.lt(&third) && q.gt(&two_p) && q.lt(&one_minus_p) {
                    let d = (1.0 - qv - pv).min(qv - 2.0 * pv);
                    rep.predicted.insert(Quantity::DistToXLambda, d);
                    if let Some(xi) = extras.xi {
                        rep.predicted
                            .insert(Quantity::DistToXStar, d.min(2.0 * xi * pv));
                    }
                } else {
                    rep.notes.push(
                        "distance predictions need p < 1/3 and 2p < q < 1-p".into(),
                    );
                }
            }
        }
        TheoremId::AsRate => {
            rep.check(
                p.gt(&zero) && p.lt(&third),
                "p in (0, 1/3)",
                format!("p = {p}"),
            );
            let lower = p.half_way_to_one();
            rep.check(
                q.gt(&lower) && q.lt(&one_minus_p),
                "q in ((p+1)/2, 1-p)",
                format!("p = {p}, q = {q}"),
            );
            let beta_sup = 2.0 * q.value() - 1.0;
            let beta = match extras.beta {
                Some(b) => b,
                None => {
                    let b = beta_sup - DEFAULT_BETA_OFFSET;
                    rep.notes
                        .push(format!("beta defaulted to 2q-1-{DEFAULT_BETA_OFFSET} = {b}"));
                    b
                }
            };
            rep.check(
                beta > 0.0 && beta < beta_sup + BOUNDARY_TOL && beta_sup > 0.0,
                "beta in (0, 2q-1)",
                format!("beta = {beta}, 2q-1 = {beta_sup}"),
            );
            if rep.applies {
                let pv = p.value();
                let qv = q.value();
                rep.predicted.insert(Quantity::FGap, beta.min(pv));
                rep.predicted.insert(Quantity::Energy, beta.min(1.0 - qv));
                let d = (beta - pv).min(1.0 - qv - pv);
                if d > 0.0 {
                    // plain-norm exponent; the squared distance decays twice as fast
                    rep.predicted.insert(Quantity::DistToXLambda, d);
                }
                if let Some(xi) = extras.xi {
                    let ds = (1.0 - qv - pv).min(beta - pv).min(2.0 * xi * pv);
                    if ds > 0.0 {
                        rep.predicted.insert(Quantity::DistToXStar, ds);
                    }
                }
            }
        }
        TheoremId::L2General => {
            // symbolic form of the convergence conditions for polynomial
            // schedules: sum(alpha*lambda) = inf, alpha = o(lambda),
            // lambda increments = o(alpha*lambda), lambda -> 0
            rep.check(q.gt(&p), "q > p", format!("p = {p}, q = {q}"));
            rep.check(
                p.plus(&q).le(&one),
                "p + q <= 1",
                format!("p + q = {}", p.value() + q.value()),
            );
            rep.check(q.lt(&one), "q < 1", format!("q = {q}"));
            rep.check(p.gt(&zero), "p > 0 (needed for lambda_k -> 0)", format!("p = {p}"));
            rep.check(
                s.c_lambda > 0.0,
                "c_lambda > 0 (needed for a ridge path)",
                format!("c_lambda = {}", s.c_lambda),
            );
            rep.notes.push(
                "alternative route via the integrated ridge-gap series is problem-dependent; \
                 see oracles::viscosity_gap_series"
                    .into(),
            );
        }
        TheoremId::DetRate => {
            rep.check(p.gt(&zero) && p.le(&one), "p in (0, 1]", format!("p = {p}"));
            rep.check(
                q.ge(&zero) && q.le(&one_minus_p),
                "q in [0, 1-p]",
                format!("p = {p}, q = {q}"),
            );
            if rep.applies {
                let q_is_zero = q.eq_tol(&zero);
                let p_is_one = p.eq_tol(&one);
                if q_is_zero {
                    match extras.smoothness {
                        Some(l) => {
                            rep.check(
                                s.c_alpha < 2.0 / l,
                                "c_alpha < 2/L at q = 0",
                                format!("c_alpha = {}, 2/L = {}", s.c_alpha, 2.0 / l),
                            );
                            if p_is_one {
                                rep.check(
                                    2.0 * s.c_lambda * s.c_alpha * (1.0 - l * s.c_alpha / 2.0)
                                        > 1.0,
                                    "2*c_lambda*c_alpha*(1 - L*c_alpha/2) > 1 at q = 0, p = 1",
                                    format!(
                                        "lhs = {}",
                                        2.0 * s.c_lambda
                                            * s.c_alpha
                                            * (1.0 - l * s.c_alpha / 2.0)
                                    ),
                                );
                            }
                        }
                        None => rep.notes.push(
                            "q = 0 needs c_alpha < 2/L; problem-dependent, no L supplied".into(),
                        ),
                    }
                } else if q.eq_tol(&one_minus_p) {
                    rep.check(
                        2.0 * s.c_lambda * s.c_alpha > 1.0 - q.value(),
                        "2*c_lambda*c_alpha > 1-q at the boundary q = 1-p",
                        format!("2*{}*{} vs {}", s.c_lambda, s.c_alpha, 1.0 - q.value()),
                    );
                }
            }
            if rep.applies {
                let pv = p.value();
                let qv = q.value();
                rep.predicted.insert(Quantity::Energy, 1.0 - qv);
                rep.predicted.insert(Quantity::FGap, pv);
                let d = 1.0 - qv - pv;
                if d > 0.0 {
                    rep.predicted.insert(Quantity::DistToXLambda, d);
                    if let Some(xi) = extras.xi {
                        rep.predicted
                            .insert(Quantity::DistToXStar, d.min(2.0 * xi * pv));
                    }
                } else {
                    rep.notes
                        .push("no distance prediction at the boundary q = 1-p".into());
                }
            }
        }
    }
    rep
}

/// `validate_theorem` plus the `xi`-dependent `dist_to_xstar` prediction.
pub fn predicted_rates(
    s: &PolynomialSchedule,
    theorem: TheoremId,
    xi: Option<f64>,
    beta: Option<f64>,
) -> TheoremReport {
    validate_theorem(
        s,
        theorem,
        ValidationExtras {
            beta,
            xi,
            smoothness: None,
        },
    )
}

/// Exponent pair maximizing the predicted squared-distance decay to the
/// minimum-norm solution, for a ridge path with `|x_lambda - x_*| = O(lambda^xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalSchedule {
    pub mode: TheoremId,
    pub xi: f64,
    pub p: f64,
    pub q: f64,
    /// Decay exponent of the squared distance at the optimum.
    pub rate: f64,
}

pub fn optimal_schedule(xi: f64, mode: TheoremId) -> Result<OptimalSchedule, ScheduleError> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(ScheduleError::BadXi(xi));
    }
    let (p, q, rate) = match mode {
        TheoremId::L2Rate => {
            let p = 1.0 / (4.0 * xi + 3.0);
            (p, (1.0 + p) / 2.0, 2.0 * xi / (4.0 * xi + 3.0))
        }
        TheoremId::AsRate => {
            let p = 1.0 / (6.0 * xi + 3.0);
            (p, 2.0 / 3.0, 2.0 * xi / (6.0 * xi + 3.0))
        }
        TheoremId::DetRate => (1.0 / (2.0 * xi + 1.0), 0.0, 2.0 * xi / (2.0 * xi + 1.0)),
        TheoremId::L2General => return Err(ScheduleError::NoOptimalSchedule),
    };
    Ok(OptimalSchedule {
        mode,
        xi,
        p,
        q,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched(c_alpha: f64, q: f64, c_lambda: f64, p: f64) -> PolynomialSchedule {
        PolynomialSchedule::new(c_alpha, q, c_lambda, p).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn evaluates_power_laws() {
        let s = sched(1.0, 0.0, 1.0, 1.0);
        assert_eq!(s.at(4).unwrap(), (1.0, 0.25));

        let s = sched(20.0, 2.0 / 3.0, 0.01, 1.0 / 3.0);
        let (a, l) = s.at(1).unwrap();
        assert_eq!((a, l), (20.0, 0.01));

        let s = sched(100.0, 2.0 / 3.0, 0.001, 1.0 / 3.0);
        let (a, l) = s.at(8).unwrap();
        assert!(close(a, 25.0, 1e-12), "alpha_8 = {a}");
        assert!(close(l, 0.0005, 1e-12), "lambda_8 = {l}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PolynomialSchedule::new(0.0, 0.5, 1.0, 0.5).is_err());
        assert!(PolynomialSchedule::new(-1.0, 0.5, 1.0, 0.5).is_err());
        assert!(PolynomialSchedule::new(1.0, 0.5, -0.1, 0.5).is_err());
        assert!(PolynomialSchedule::new(1.0, -0.5, 1.0, 0.5).is_err());
        assert_eq!(
            sched(1.0, 0.5, 1.0, 0.5).at(0),
            Err(ScheduleError::BadIteration(0))
        );
        assert!(PolynomialSchedule::with_rational_exponents(1.0, (1, 0), 1.0, (1, 2)).is_err());
    }

    #[test]
    fn ridge_increment_bracket() {
        // p/(k+1)^(p+1) <= lambda_k - lambda_{k+1} <= p/k^(p+1) for c_lambda = 1
        for &p in &[0.1, 0.5, 1.0] {
            let s = sched(1.0, 0.5, 1.0, p);
            for k in 1..=10_000u64 {
                let lk = s.at(k).unwrap().1;
                let lk1 = s.at(k + 1).unwrap().1;
                let diff = lk - lk1;
                let lo = p / ((k + 1) as f64).powf(p + 1.0);
                let hi = p / (k as f64).powf(p + 1.0);
                assert!(
                    lo <= diff + 1e-15 && diff <= hi + 1e-15,
                    "p={p} k={k}: {lo} <= {diff} <= {hi}"
                );
            }
        }
    }

    #[test]
    fn l2_rate_admissibility() {
        let r = validate_theorem(
            &sched(0.1, 2.0 / 3.0, 1.0, 1.0 / 9.0),
            TheoremId::L2Rate,
            ValidationExtras::default(),
        );
        assert!(r.applies, "{r}");

        let r = validate_theorem(
            &sched(0.1, 0.5, 1.0, 0.67),
            TheoremId::L2Rate,
            ValidationExtras::default(),
        );
        assert!(!r.applies);
        assert!(
            r.violated.iter().any(|v| v.contains("q in (p, 1-p]")),
            "{:?}",
            r.violated
        );
    }

    #[test]
    fn l2_rate_boundary_uses_prefactors() {
        // q = 1 - p exactly, decided by rational arithmetic
        let s = PolynomialSchedule::with_rational_exponents(1.0, (2, 3), 1.0, (1, 3)).unwrap();
        let r = validate_theorem(&s, TheoremId::L2Rate, ValidationExtras::default());
        assert!(r.applies, "{r}");
        assert_eq!(r.predicted[&Quantity::FGap], 1.0 / 3.0);

        let weak = PolynomialSchedule::with_rational_exponents(0.1, (2, 3), 1.0, (1, 3)).unwrap();
        let r = validate_theorem(&weak, TheoremId::L2Rate, ValidationExtras::default());
        assert!(!r.applies, "2*c_lambda*c_alpha = 0.2 < 1/3 must fail: {r}");
    }

    #[test]
    fn as_rate_admissibility() {
        let r = validate_theorem(
            &sched(0.1, 0.667, 1.0, 0.111),
            TheoremId::AsRate,
            ValidationExtras {
                beta: Some(0.3),
                ..Default::default()
            },
        );
        assert!(r.applies, "{r}");

        // default beta lands just under 2q-1 and is noted
        let r = validate_theorem(
            &sched(0.1, 0.667, 1.0, 0.111),
            TheoremId::AsRate,
            ValidationExtras::default(),
        );
        assert!(r.applies);
        assert!(r.notes.iter().any(|n| n.contains("beta defaulted")));

        let r = validate_theorem(
            &sched(0.1, 0.29, 1.0, 0.111),
            TheoremId::AsRate,
            ValidationExtras::default(),
        );
        assert!(!r.applies, "q below (p+1)/2 must fail");
    }

    #[test]
    fn l2_general_needs_decaying_ridge() {
        let r = validate_theorem(
            &sched(0.1, 0.667, 1.0, 0.0),
            TheoremId::L2General,
            ValidationExtras::default(),
        );
        assert!(!r.applies);
        assert!(
            r.violated.iter().any(|v| v.contains("p > 0")),
            "{:?}",
            r.violated
        );

        let r = validate_theorem(
            &sched(0.1, 0.667, 1.0, 0.111),
            TheoremId::L2General,
            ValidationExtras::default(),
        );
        assert!(r.applies);
        assert!(r.predicted.is_empty(), "no rate from the general theorem");
    }

    #[test]
    fn det_rate_cases() {
        // q = 0 with L supplied
        let r = validate_theorem(
            &sched(1.0, 0.0, 1.0, 0.5),
            TheoremId::DetRate,
            ValidationExtras {
                smoothness: Some(1.0),
                ..Default::default()
            },
        );
        assert!(r.applies, "{r}");
        assert_eq!(r.predicted[&Quantity::Energy], 1.0);
        assert_eq!(r.predicted[&Quantity::FGap], 0.5);
        assert_eq!(r.predicted[&Quantity::DistToXLambda], 0.5);

        // q = 0 without L: applies but with a note
        let r = validate_theorem(
            &sched(1.0, 0.0, 1.0, 0.5),
            TheoremId::DetRate,
            ValidationExtras::default(),
        );
        assert!(r.applies);
        assert!(r.notes.iter().any(|n| n.contains("2/L")));

        // q = 0 with too large a step
        let r = validate_theorem(
            &sched(3.0, 0.0, 1.0, 0.5),
            TheoremId::DetRate,
            ValidationExtras {
                smoothness: Some(1.0),
                ..Default::default()
            },
        );
        assert!(!r.applies);

        // q = 0, p = 1 extra condition: 2*1*1*(1-1/2) = 1 is not > 1
        let r = validate_theorem(
            &sched(1.0, 0.0, 1.0, 1.0),
            TheoremId::DetRate,
            ValidationExtras {
                smoothness: Some(1.0),
                ..Default::default()
            },
        );
        assert!(!r.applies, "{r}");
    }

    #[test]
    fn det_rate_q0_p1_boundary() {
        // 2*c_lambda*c_alpha*(1 - L c_alpha/2) must exceed 1
        let r = validate_theorem(
            &sched(1.0, 0.0, 2.0, 1.0),
            TheoremId::DetRate,
            ValidationExtras {
                smoothness: Some(1.0),
                ..Default::default()
            },
        );
        // 2*2*1*(1-0.5) = 2 > 1
        assert!(r.applies, "{r}");

        let r = validate_theorem(
            &sched(1.0, 0.0, 0.4, 1.0),
            TheoremId::DetRate,
            ValidationExtras {
                smoothness: Some(1.0),
                ..Default::default()
            },
        );
        assert!(!r.applies, "2*0.4*1*0.5 = 0.4 < 1 must fail");
    }

    #[test]
    fn predicted_rates_examples() {
        let r = predicted_rates(
            &sched(1.0, 0.625, 1.0, 0.25),
            TheoremId::L2Rate,
            Some(0.25),
            None,
        );
        assert!(r.applies, "{r}");
        assert!(close(r.predicted[&Quantity::DistToXStar], 0.125, 1e-12));

        let r = predicted_rates(
            &sched(
                1.0,
                2.0 / 3.0,
                1.0,
                2.0 / 9.0,
            ),
            TheoremId::AsRate,
            Some(0.25),
            None,
        );
        assert!(r.applies, "{r}");
        // default beta sits 1e-3 under 2q-1, so the prediction sits within
        // that offset of 1/9
        let d = r.predicted[&Quantity::DistToXStar];
        assert!(
            (d - 1.0 / 9.0).abs() <= DEFAULT_BETA_OFFSET + 1e-12,
            "dist exponent {d}"
        );
    }

    #[test]
    fn beta_ignored_outside_as() {
        let r = validate_theorem(
            &sched(1.0, 0.625, 1.0, 0.25),
            TheoremId::L2Rate,
            ValidationExtras {
                beta: Some(0.2),
                ..Default::default()
            },
        );
        assert!(r.notes.iter().any(|n| n.contains("ignored")));
    }

    #[test]
    fn optimal_schedules() {
        let o = optimal_schedule(1.0, TheoremId::AsRate).unwrap();
        assert!(close(o.p, 1.0 / 9.0, 1e-12));
        assert!(close(o.q, 2.0 / 3.0, 1e-12));
        assert!(close(o.rate, 2.0 / 9.0, 1e-12));

        let o = optimal_schedule(1.0, TheoremId::L2Rate).unwrap();
        assert!(close(o.p, 1.0 / 7.0, 1e-12));
        assert!(close(o.q, 4.0 / 7.0, 1e-12));
        assert!(close(o.rate, 2.0 / 7.0, 1e-12));

        let o = optimal_schedule(0.25, TheoremId::DetRate).unwrap();
        assert!(close(o.p, 2.0 / 3.0, 1e-12));
        assert_eq!(o.q, 0.0);
        assert!(close(o.rate, 1.0 / 3.0, 1e-12));

        assert!(optimal_schedule(0.0, TheoremId::AsRate).is_err());
        assert!(optimal_schedule(1.0, TheoremId::L2General).is_err());
    }

    #[test]
    fn optimal_schedule_validates_in_its_own_mode() {
        for &xi in &[0.1, 0.25, 0.5, 1.0, 2.0, 10.0] {
            let o = optimal_schedule(xi, TheoremId::L2Rate).unwrap();
            let s = sched(1.0, o.q, 1.0, o.p);
            let r = validate_theorem(&s, TheoremId::L2Rate, ValidationExtras::default());
            assert!(r.applies, "xi={xi}: {r}");

            let o = optimal_schedule(xi, TheoremId::AsRate).unwrap();
            let s = sched(1.0, o.q, 1.0, o.p);
            let r = validate_theorem(
                &s,
                TheoremId::AsRate,
                ValidationExtras {
                    beta: Some(2.0 * o.q - 1.0 - 1e-6),
                    ..Default::default()
                },
            );
            assert!(r.applies, "xi={xi}: {r}");

            let o = optimal_schedule(xi, TheoremId::DetRate).unwrap();
            let s = sched(1.0, o.q, 1.0, o.p);
            let r = validate_theorem(
                &s,
                TheoremId::DetRate,
                ValidationExtras {
                    smoothness: Some(1.0),
                    ..Default::default()
                },
            );
            assert!(r.applies, "xi={xi}: {r}");
        }
    }

    #[test]
    fn schedule_values_nonincreasing() {
        for &(q, p) in &[(0.5, 0.1), (2.0 / 3.0, 1.0 / 3.0), (0.0, 0.5), (1.0, 0.0)] {
            let s = sched(2.0, q, 0.7, p);
            let mut prev = s.at(1).unwrap();
            for k in 2..2000 {
                let cur = s.at(k).unwrap();
                assert!(cur.0 <= prev.0 && cur.1 <= prev.1);
                prev = cur;
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn predictions_monotone_in_xi(xi1 in 0.05f64..2.0, dxi in 0.01f64..2.0) {
                let s = sched(1.0, 0.625, 1.0, 0.25);
                let lo = predicted_rates(&s, TheoremId::L2Rate, Some(xi1), None);
                let hi = predicted_rates(&s, TheoremId::L2Rate, Some(xi1 + dxi), None);
                let a = lo.predicted[&Quantity::DistToXStar];
                let b = hi.predicted[&Quantity::DistToXStar];
                prop_assert!(b >= a - 1e-15);
            }

            #[test]
            fn predicted_exponents_in_unit_interval(
                p in 0.01f64..0.33,
                dq in 0.01f64..0.3,
                xi in 0.05f64..3.0,
            ) {
                let q = ((p + 1.0) / 2.0 + dq).min(1.0 - p - 1e-6);
                prop_assume!(q > (p + 1.0) / 2.0);
                for theorem in [TheoremId::L2Rate, TheoremId::AsRate] {
                    let r = predicted_rates(&sched(1.0, q, 1.0, p), theorem, Some(xi), None);
                    prop_assert!(r.applies, "{}", r);
                    for (_, e) in &r.predicted {
                        prop_assert!(*e > 0.0 && *e <= 1.0, "exponent {e} out of (0,1]");
                    }
                }
            }

            #[test]
            fn applies_iff_no_violations(
                p in 0.0f64..1.2,
                q in 0.0f64..1.2,
                c_alpha in 0.01f64..10.0,
                c_lambda in 0.0f64..10.0,
            ) {
                let s = sched(c_alpha, q, c_lambda, p);
                for theorem in TheoremId::all() {
                    let r = validate_theorem(&s, theorem, ValidationExtras::default());
                    prop_assert_eq!(r.applies, r.violated.is_empty());
                }
            }
        }
    }
}
