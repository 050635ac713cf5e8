//! Seed derivation and Gaussian sampling.
//!
//! A stream is identified by `(master_seed, label, trial_index)`. Its
//! ChaCha20 key is the SHA-256 digest of
//!
//! ```text
//! "noisy-sysid/rng/v1" ‖ master_seed (u64 LE) ‖ len(label) (u64 LE) ‖ label ‖ trial_index (u64 LE)
//! ```
//!
//! Standard normals come from the Box–Muller transform applied to pairs of
//! 53-bit uniforms in `(0, 1]`, both outputs of each pair being used.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use super::Matrix;
use crate::error::{Error, Result};

const DOMAIN_TAG: &[u8] = b"noisy-sysid/rng/v1";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub label: String,
    pub trial_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, label: impl Into<String>, trial_index: u64) -> Self {
        Self { master_seed, label: label.into(), trial_index }
    }

    /// Same seed and trial, different label.
    pub fn with_label(&self, label: impl Into<String>) -> Self {
        Self { label: label.into(), ..self.clone() }
    }

    pub fn derived_key(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN_TAG);
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((self.label.len() as u64).to_le_bytes());
        hasher.update(self.label.as_bytes());
        hasher.update(self.trial_index.to_le_bytes());
        let mut key = [0u8; 32];
        key.copy_from_slice(&hasher.finalize());
        key
    }

    pub fn generator(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.derived_key())
    }

    pub fn sampler(&self) -> GaussianSampler {
        GaussianSampler::new(self.generator())
    }
}

/// Box–Muller standard-normal sampler over a ChaCha20 generator.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSampler {
    pub fn new(rng: ChaCha20Rng) -> Self {
        Self { rng, spare: None }
    }

    fn uniform_open_closed(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform_open_closed();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(radius * theta.sin());
        radius * theta.cos()
    }

    /// `count` draws of `factor · g`, one per column.
    pub fn draw(&mut self, factor: &Matrix, count: usize) -> Result<Matrix> {
        if !factor.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "covariance factor must be square, got {}x{}",
                factor.nrows(),
                factor.ncols()
            )));
        }
        let dim = factor.ncols();
        let mut standard = Matrix::zeros(dim, count);
        // Column-major storage: consecutive draws fill one vector at a time.
        for v in standard.iter_mut() {
            *v = self.next_standard();
        }
        Ok(factor * standard)
    }
}

/// `count` i.i.d. draws from `N(0, factor·factorᵀ)`, one per column.
pub fn draw_gaussian(stream: &RngStream, factor: &Matrix, count: usize) -> Result<Matrix> {
    stream.sampler().draw(factor, count)
}
