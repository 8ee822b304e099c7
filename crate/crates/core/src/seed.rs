//! Seed derivation and the pinned pseudo-random generator.
//!
//! Every stochastic component draws from its own [`Rng`] built from a seed
//! derived as the first eight bytes (little endian) of
//! `SHA-256("<master>/<run>/<role>")`. Results therefore do not depend on the
//! order in which runs or ensemble members are scheduled.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator used everywhere in the crate.
pub type Rng = ChaCha8Rng;

/// Identifier of the generator algorithm, recorded in run reports.
pub const PRNG_ID: &str = "chacha8 (rand_chacha 0.9), Box-Muller normals";

/// Human-readable description of [`derive_seed`] for run reports.
pub const SEED_DERIVATION: &str = "u64 little-endian from sha256(\"{master}/{run}/{role}\")[0..8]";

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for `(master, index, role)`.
pub fn derive_seed(master: u64, index: u64, role: &str) -> u64 {
    let digest = Sha256::digest(format!("{master}/{index}/{role}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Standard normal sampler (Box-Muller, both variates used).
#[derive(Debug, Default, Clone)]
pub struct Normal {
    spare: Option<f64>,
}

impl Normal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample(&mut self, rng: &mut Rng) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
