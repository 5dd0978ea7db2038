//! Constructive subset extraction and covering.
//!
//! Logarithms in the step parameters are base 2. Every result re-verifies its
//! guarantee by direct recount rather than trusting the construction.

mod cover;
mod subset;
mod tuples;

pub use cover::{
    chang_cover, petridis_large_subset, petridis_subset, ruzsa_cover, CoverResult, PetridisResult,
    PetridisStrategy, PETRIDIS_EXHAUSTIVE_CAP,
};
pub use subset::{extract_energy_subset, extract_tk_subset, ExtractionResult, ExtractionStep, StopReason};
pub use tuples::{select_disjoint_tuples, TupleSelection};

use serde::{Deserialize, Serialize};

use crate::dissociation::PartitionConfig;
use crate::error::{Error, Result};

/// Terms summed exactly before the tail estimate.
const ETA_TERMS: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub epsilon: f64,
    pub eta: f64,
    /// Moment parameter; `None` means `2 + log2 |A|`. Recorded in traces only.
    pub p: Option<f64>,
    pub max_steps: usize,
    pub partition: PartitionConfig,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self::new(1.0).expect("epsilon = 1 is valid")
    }
}

impl ExtractorConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        Ok(Self { epsilon, eta: eta_for(epsilon)?, p: None, max_steps: 64, partition: PartitionConfig::default() })
    }

    /// Replaces the computed `eta`, e.g. to explore step sizes that actually peel at small scale.
    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn moment(&self, set_size: usize) -> f64 {
        self.p.unwrap_or(2.0 + (set_size.max(1) as f64).log2())
    }
}

/// `eta` with `1/eta = 16 sum_{j>=1} j^{-1-eps}`.
///
/// The first 2^20 terms are summed (smallest first); the remainder is the
/// midpoint integral `(J + 1/2)^{-eps} / eps`, whose error is `O(J^{-3-eps})`.
pub fn eta_for(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let s = 1.0 + epsilon;
    let partial: f64 = (1..=ETA_TERMS).rev().map(|j| (j as f64).powf(-s)).sum();
    let tail = (ETA_TERMS as f64 + 0.5).powf(-epsilon) / epsilon;
    Ok(1.0 / (16.0 * (partial + tail)))
}
