//! Parallel-beam tomography on the unit square `[-1/2, 1/2]^2`.
//!
//! The image is `n x n` pixels, flat index `iy * n + ix` with `ix` the column
//! (x direction).  Projection `i` uses angle `theta_i = i pi / n_angles`; ray
//! `r` passes through `t_r (cos theta, sin theta)` with direction
//! `(-sin theta, cos theta)` and centered offsets
//! `t_r = (r + 1/2) sqrt(2)/n_rays - sqrt(2)/2`.  Matrix entries are exact
//! intersection lengths of the ray with each pixel, so one matrix row is one
//! discrete line integral.

use super::{LinearProblem, ProblemError};
use crate::linalg::{CsrMatrix, Operator};
use std::collections::BTreeMap;

const DEGENERATE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadonGeometry {
    pub image_size: usize,
    pub n_angles: usize,
    pub n_rays: usize,
}

impl RadonGeometry {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if !(2..=512).contains(&self.image_size) {
            return Err(ProblemError::BadParameter(format!(
                "image_size must be in 2..=512, got {}",
                self.image_size
            )));
        }
        if self.n_angles == 0 || self.n_rays == 0 {
            return Err(ProblemError::BadParameter(
                "n_angles and n_rays must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn n_pixels(&self) -> usize {
        self.image_size * self.image_size
    }

    pub fn n_measurements(&self) -> usize {
        self.n_angles * self.n_rays
    }

    pub fn angle(&self, i: usize) -> f64 {
        i as f64 * std::f64::consts::PI / self.n_angles as f64
    }

    pub fn offset(&self, r: usize) -> f64 {
        let w = std::f64::consts::SQRT_2;
        (r as f64 + 0.5) * w / self.n_rays as f64 - w / 2.0
    }
}

/// Exact pixel intersection lengths for one ray, sorted by pixel index.
/// Rays that miss the square produce an empty row.
pub fn ray_weights(n: usize, theta: f64, t: f64) -> Vec<(usize, f64)> {
    let (sin_t, cos_t) = theta.sin_cos();
    let bx = t * cos_t;
    let by = t * sin_t;
    let dx = -sin_t;
    let dy = cos_t;

    // clip the ray parameter to the square
    let mut s_lo = f64::NEG_INFINITY;
    let mut s_hi = f64::INFINITY;
    for (b, d) in [(bx, dx), (by, dy)] {
        if d.abs() < DEGENERATE {
            if !(-0.5..=0.5).contains(&b) {
                return Vec::new();
            }
        } else {
            let a = (-0.5 - b) / d;
            let c = (0.5 - b) / d;
            s_lo = s_lo.max(a.min(c));
            s_hi = s_hi.min(a.max(c));
        }
    }
    if !(s_hi - s_lo > DEGENERATE) {
        return Vec::new();
    }

    // all gridline crossings inside (s_lo, s_hi), plus the endpoints
    let mut cross = vec![s_lo, s_hi];
    for (b, d) in [(bx, dx), (by, dy)] {
        if d.abs() < DEGENERATE {
            continue;
        }
        for j in 0..=n {
            let line = -0.5 + j as f64 / n as f64;
            let s = (line - b) / d;
            if s > s_lo && s < s_hi {
                cross.push(s);
            }
        }
    }
    cross.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let nf = n as f64;
    let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
    for w in cross.windows(2) {
        let len = w[1] - w[0];
        if len <= DEGENERATE {
            continue;
        }
        // the midpoint is interior to exactly one pixel; floor with a clamp
        // handles grazing contact with the outer boundary
        let s_mid = 0.5 * (w[0] + w[1]);
        let ix = (((bx + s_mid * dx + 0.5) * nf).floor() as isize).clamp(0, n as isize - 1);
        let iy = (((by + s_mid * dy + 0.5) * nf).floor() as isize).clamp(0, n as isize - 1);
        *weights.entry(iy as usize * n + ix as usize).or_insert(0.0) += len;
    }
    weights.into_iter().collect()
}

/// The full projection operator as a sparse matrix, rows grouped by angle
/// (row `i * n_rays + r` is angle `i`, ray `r`).
pub fn projection_operator(geom: &RadonGeometry) -> Result<Operator, ProblemError> {
    geom.validate()?;
    let n = geom.image_size;
    let mut rows = Vec::with_capacity(geom.n_measurements());
    for i in 0..geom.n_angles {
        let theta = geom.angle(i);
        for r in 0..geom.n_rays {
            rows.push(ray_weights(n, theta, geom.offset(r)));
        }
    }
    Ok(Operator::Sparse(CsrMatrix::from_row_entries(
        geom.n_pixels(),
        rows,
    )))
}

#[derive(Debug, Clone)]
pub struct RadonProblem {
    pub problem: LinearProblem,
    pub geometry: RadonGeometry,
    /// The image the data was generated from.
    pub image: Vec<f64>,
}

/// Noise-free sinogram of `image`, one block per projection angle.
pub fn radon_problem(geom: &RadonGeometry, image: &[f64]) -> Result<RadonProblem, ProblemError> {
    let op = projection_operator(geom)?;
    if image.len() != geom.n_pixels() {
        return Err(ProblemError::BadPoint {
            got: image.len(),
            want: geom.n_pixels(),
        });
    }
    let y = op.matvec(image);
    let blocks = (0..geom.n_angles)
        .map(|i| (i * geom.n_rays..(i + 1) * geom.n_rays).collect())
        .collect();
    let problem = LinearProblem::new(op, y, blocks)?.with_known_fstar(0.0);
    Ok(RadonProblem {
        problem,
        geometry: *geom,
        image: image.to_vec(),
    })
}

/// Piecewise-constant test image: a large disk, a smaller bright disk, and a
/// square, all strictly inside the domain.
pub fn phantom(n: usize) -> Vec<f64> {
    let mut img = vec![0.0; n * n];
    for iy in 0..n {
        for ix in 0..n {
            let x = (ix as f64 + 0.5) / n as f64 - 0.5;
            let y = (iy as f64 + 0.5) / n as f64 - 0.5;
            let mut v = 0.0;
            if (x + 0.05) * (x + 0.05) + y * y <= 0.35 * 0.35 {
                v += 1.0;
            }
            if (x - 0.18) * (x - 0.18) + (y - 0.1) * (y - 0.1) <= 0.1 * 0.1 {
                v += 0.6;
            }
            if (x + 0.2).abs() <= 0.07 && (y + 0.22).abs() <= 0.07 {
                v += 0.8;
            }
            img[iy * n + ix] = v;
        }
    }
    img
}
