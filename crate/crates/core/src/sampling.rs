//! Poissonian shot noise and reproducible random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::processor::{BasisId, OutcomeProbs, NOMINAL_SUCCESS};

/// A single-owner random stream. Distinct `(master_seed, stream_id)` pairs
/// give independent sequences.
pub type RngStream = ChaCha20Rng;

pub fn seeded_rng(master_seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Packs a grid point, run index and purpose tag into one stream id.
pub fn stream_id(grid_index: u64, run_index: u64, purpose: u8) -> u64 {
    (grid_index << 40) | ((run_index & 0xFFFF_FFFF) << 8) | u64::from(purpose)
}

/// Expected coincidences per basis measurement while post-selection succeeds
/// at its nominal rate; a lower success probability scales the rate down.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShotScale(f64);

impl ShotScale {
    pub const DEFAULT: f64 = 1000.0;

    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidShotScale(scale));
        }
        Ok(Self(scale))
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

impl Default for ShotScale {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRecord {
    pub basis: BasisId,
    pub counts: [u64; 4],
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// Draws `nᵢⱼ ~ Poisson(S · (success / success₀) · pᵢⱼ)` independently, with
/// `success₀` the nominal 1/9.
pub fn sample_counts<R: Rng + ?Sized>(
    basis: BasisId,
    probs: &OutcomeProbs,
    success_prob: f64,
    scale: ShotScale,
    rng: &mut R,
) -> CountRecord {
    let rate = scale.get() * success_prob / NOMINAL_SUCCESS;
    let counts = probs.0.map(|p| poisson_draw(rate * p, rng));
    CountRecord { basis, counts }
}
