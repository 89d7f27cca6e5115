//! Deterministic CSV emission.  All floats use Rust's shortest round-trip
//! `{}` formatting, so identical inputs produce byte-identical files.
//! Diagnostics the run could not compute stay as empty fields, never zeros.

use crate::analysis::SweepResult;
use crate::optimizer::Trajectory;
use crate::oracles::ViscosityCurve;
use std::fmt::Write as _;

pub const TRAJECTORY_HEADER: &str =
    "k,alpha,lambda,f_gap,dist_sq_xstar,dist_sq_xlambda,energy,max_norm";

fn push_opt(s: &mut String, v: Option<f64>) {
    s.push(',');
    if let Some(v) = v {
        let _ = write!(s, "{v}");
    }
}

fn column(col: &Option<Vec<f64>>, i: usize) -> Option<f64> {
    col.as_ref().map(|v| v[i])
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut s = String::with_capacity(64 * (t.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for i in 0..t.len() {
        let _ = write!(s, "{}", t.iterations[i]);
        push_opt(&mut s, t.alpha[i]);
        push_opt(&mut s, t.lambda[i]);
        push_opt(&mut s, column(&t.f_gap, i));
        push_opt(&mut s, column(&t.dist_sq_xstar, i));
        push_opt(&mut s, column(&t.dist_sq_xlambda, i));
        push_opt(&mut s, column(&t.energy, i));
        let _ = write!(s, ",{}", t.max_norm[i]);
        s.push('\n');
    }
    s
}

pub const SWEEP_HEADER: &str = "p,q,theoretical_exponent,empirical_exponent,valid";

pub fn sweep_csv(r: &SweepResult) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for c in &r.cells {
        let _ = write!(s, "{},{},{}", c.p, c.q, c.theoretical);
        push_opt(&mut s, c.empirical);
        let _ = writeln!(s, ",{}", c.valid);
    }
    s
}

pub const VISCOSITY_HEADER: &str = "lambda,dist,norm_gap";

pub fn viscosity_csv(c: &ViscosityCurve) -> String {
    let mut s = String::new();
    s.push_str(VISCOSITY_HEADER);
    s.push('\n');
    for pt in &c.points {
        let _ = writeln!(s, "{},{},{}", pt.lambda, pt.dist_to_xstar, pt.norm_gap);
    }
    s
}
