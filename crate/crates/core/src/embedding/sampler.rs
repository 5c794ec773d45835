use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::{Error, Result};

/// Exponent applied to unigram counts for the noise distribution.
pub const UNIGRAM_POWER: f64 = 0.75;

/// Draws negative samples from the smoothed unigram distribution.
pub struct NegativeSampler {
    alias: WeightedAliasIndex<f64>,
    probs: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(UNIGRAM_POWER)).collect();
        let total: f64 = weights.iter().sum();
        if counts.is_empty() || total <= 0.0 {
            return Err(Error::Config("negative sampler needs positive counts".into()));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::Config(format!("negative sampler: {e}")))?;
        Ok(NegativeSampler { alias, probs })
    }

    /// Target probability of each word.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.alias.sample(rng) as u32
    }
}
