use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::filter::Psd;
use crate::error::{Error, Result};

/// Seed used when a run does not specify one.
pub const DEFAULT_SEED: u64 = 0x5151_C0DE;

/// Phenomenological noise acting on the spin during a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Standard deviation of the quasi-static detuning (coupled through S_z), MHz.
    #[serde(default)]
    pub sigma_detuning: f64,
    /// Homogeneous coherence time in microseconds; `None` means no homogeneous decay.
    #[serde(default)]
    pub t2_homogeneous: Option<f64>,
    /// Optional noise spectrum for filter-function decay of the coherent contrast.
    #[serde(default)]
    pub psd: Option<Psd>,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_ensemble() -> usize {
    1
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_detuning: 0.0,
            t2_homogeneous: None,
            psd: None,
            ensemble_size: 1,
            seed: DEFAULT_SEED,
        }
    }

    /// Quasi-static detuning whose Ramsey envelope exp(-(tau/T2*)^2) has the given T2*.
    pub fn sigma_for_t2_star(t2_star: f64) -> f64 {
        std::f64::consts::SQRT_2 / (std::f64::consts::TAU * t2_star)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_detuning.is_finite() && self.sigma_detuning >= 0.0) {
            return Err(Error::invalid("sigma_detuning", "must be finite and >= 0"));
        }
        if let Some(t2) = self.t2_homogeneous {
            if !(t2 > 0.0) {
                return Err(Error::invalid("t2_homogeneous", "must be > 0"));
            }
        }
        if self.ensemble_size == 0 {
            return Err(Error::invalid("ensemble_size", "must be >= 1"));
        }
        if let Some(psd) = &self.psd {
            psd.validate()?;
        }
        Ok(())
    }

    /// Detuning of ensemble member `index`. Each member draws from its own ChaCha stream so the
    /// value does not depend on how members are scheduled.
    pub fn member_detuning(&self, index: usize) -> f64 {
        if self.sigma_detuning == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        self.sigma_detuning * z
    }

    /// Number of distinct members that need simulating (one when there is no spread).
    pub fn effective_ensemble(&self) -> usize {
        if self.sigma_detuning == 0.0 {
            1
        } else {
            self.ensemble_size
        }
    }

    /// exp(-t_free / T2) for the homogeneous part.
    pub fn homogeneous_factor(&self, t_free: f64) -> f64 {
        match self.t2_homogeneous {
            Some(t2) => (-t_free / t2).exp(),
            None => 1.0,
        }
    }
}
