//! Reproducible randomness and the gradient-noise models.
//!
//! Every replica draws from its own [`RngStream`], keyed by
//! `(master_seed, replica_index)`, so Monte Carlo runs are bit-reproducible
//! regardless of thread scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("sigma must be a finite non-negative real, got {0}")]
    BadSigma(f64),
    #[error("the gap-scaling coefficient must be finite and non-negative, got {0}")]
    BadGapCoefficient(f64),
    #[error("the optimality gap fed to the noise model must be >= 0, got {0}")]
    NegativeGap(f64),
}

/// A deterministic random stream for one replica.
///
/// The underlying generator is ChaCha8 seeded from `master_seed` (via the
/// standard splitmix expansion) with the 64-bit stream word set to
/// `replica_index`; distinct replica indices therefore yield independent
/// streams of the same keyed cipher.  `counter` counts raw 64-bit draws.
pub struct RngStream {
    rng: ChaCha8Rng,
    pub master_seed: u64,
    pub replica_index: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(replica_index);
        RngStream {
            rng,
            master_seed,
            replica_index,
            counter: 0,
        }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in `(0, 1]`; safe to feed to `ln`.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// One pair of independent standard normals via the basic (rejection-free)
    /// Box-Muller transform, so the draw count per sample is fixed.
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        (r * t.cos(), r * t.sin())
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        let mut i = 0;
        while i + 1 < out.len() {
            let (a, b) = self.standard_normal_pair();
            out[i] = a;
            out[i + 1] = b;
            i += 2;
        }
        if i < out.len() {
            out[i] = self.standard_normal_pair().0;
        }
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.fill_standard_normal(&mut v);
        v
    }

    /// Unbiased uniform integer in `[0, n)` (widening multiply with a
    /// rejection loop on the biased strip).
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// `k` distinct indices from `0..n`, returned sorted ascending.
    ///
    /// Sorted order keeps summation order canonical, which is what makes the
    /// full-batch stochastic gradient bitwise equal to the full gradient.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct items from {n}");
        // partial Fisher-Yates on an index table
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.uniform_below((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        let mut out = idx[..k].to_vec();
        out.sort_unstable();
        out
    }
}

/// Additive gradient-noise models.
///
/// All models report the bound `E|D|^2 <= A * gap + C` they satisfy, with
/// `gap = f(x) - f(x_*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// No noise; consumes no randomness.
    None,
    /// `sigma * z` with `z` standard normal, so `E|D|^2 = dim * sigma^2`.
    GaussianIso { sigma: f64 },
    /// `sqrt(a * gap / dim + sigma^2) * z`, so `E|D|^2 = a * gap + dim * sigma^2`
    /// exactly: noise that grows with the optimality gap.
    AbcScaled { a: f64, sigma: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), NoiseError> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::GaussianIso { sigma } => {
                if sigma.is_finite() && sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(NoiseError::BadSigma(sigma))
                }
            }
            NoiseModel::AbcScaled { a, sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(NoiseError::BadSigma(sigma));
                }
                if !(a.is_finite() && a >= 0.0) {
                    return Err(NoiseError::BadGapCoefficient(a));
                }
                Ok(())
            }
        }
    }

    /// `(A, C)` such that `E|D|^2 <= A * gap + C` for this model at
    /// dimension `dim`.
    pub fn second_moment_coefficients(&self, dim: usize) -> (f64, f64) {
        match *self {
            NoiseModel::None => (0.0, 0.0),
            NoiseModel::GaussianIso { sigma } => (0.0, dim as f64 * sigma * sigma),
            NoiseModel::AbcScaled { a, sigma } => (a, dim as f64 * sigma * sigma),
        }
    }

    pub fn consumes_randomness(&self) -> bool {
        !matches!(self, NoiseModel::None)
    }

    pub fn sample(
        &self,
        stream: &mut RngStream,
        gap: f64,
        dim: usize,
    ) -> Result<Vec<f64>, NoiseError> {
        if gap < 0.0 || !gap.is_finite() {
            return Err(NoiseError::NegativeGap(gap));
        }
        self.validate()?;
        Ok(match *self {
            NoiseModel::None => vec![0.0; dim],
            NoiseModel::GaussianIso { sigma } => {
                let mut v = stream.normal_vec(dim);
                for x in &mut v {
                    *x *= sigma;
                }
                v
            }
            NoiseModel::AbcScaled { a, sigma } => {
                let scale = (a * gap / dim as f64 + sigma * sigma).sqrt();
                let mut v = stream.normal_vec(dim);
                for x in &mut v {
                    *x *= scale;
                }
                v
            }
        })
    }
}
