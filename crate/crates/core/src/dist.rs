//! Classical outcome distributions and seeded multinomial shot sampling.

use rand::distributions::{Distribution as RandDistribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities below this are clamped to zero before renormalization, so
/// negative-zero artifacts never reach Hellinger square roots.
const CLAMP_EPS: f64 = 1e-12;

/// Probability distribution over consecutively labeled outcomes `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probabilities: Vec<f64>,
}

impl Distribution {
    /// Build from raw probabilities, clamping sub-epsilon values to zero and
    /// renormalizing.
    pub fn from_probabilities(mut probabilities: Vec<f64>) -> Self {
        for p in probabilities.iter_mut() {
            if *p < CLAMP_EPS {
                *p = 0.0;
            }
        }
        let total: f64 = probabilities.iter().sum();
        if total > 0.0 {
            for p in probabilities.iter_mut() {
                *p /= total;
            }
        }
        Distribution { probabilities }
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        let probs = counts
            .iter()
            .map(|&c| c as f64 / total.max(1) as f64)
            .collect();
        Distribution { probabilities: probs }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probabilities.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Outcome with the highest probability; ties break toward the lowest
    /// index.
    pub fn argmax(&self) -> Result<usize> {
        if self.probabilities.is_empty() {
            return Err(Error::InvalidParameter("argmax of empty distribution".into()));
        }
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Multinomial sample of `shots` outcomes. Deterministic for a fixed seed.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = WeightedIndex::new(&self.probabilities)
            .map_err(|e| Error::InvalidParameter(format!("bad weights: {e}")))?;
        let mut counts = vec![0u64; self.probabilities.len()];
        for _ in 0..shots {
            counts[weights.sample(&mut rng)] += 1;
        }
        Ok(counts)
    }

    /// Pad two distributions to a common outcome count (zero-fill).
    pub fn aligned(&self, other: &Distribution) -> (Vec<f64>, Vec<f64>) {
        let n = self.len().max(other.len());
        let mut a = self.probabilities.clone();
        let mut b = other.probabilities.clone();
        a.resize(n, 0.0);
        b.resize(n, 0.0);
        (a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_outcome_gets_all_shots() {
        let d = Distribution::from_probabilities(vec![1.0]);
        assert_eq!(d.sample_counts(100, 7).unwrap(), vec![100]);
    }

    #[test]
    fn fair_coin_counts_within_three_sigma() {
        let d = Distribution::from_probabilities(vec![0.5, 0.5]);
        let counts = d.sample_counts(100_000, 42).unwrap();
        // 3σ ≈ 474 for binomial(1e5, 0.5)
        assert!((counts[0] as i64 - 50_000).abs() < 474);
        assert_eq!(counts[0] + counts[1], 100_000);
    }

    #[test]
    fn same_seed_same_counts() {
        let d = Distribution::from_probabilities(vec![0.25, 0.25, 0.5]);
        assert_eq!(
            d.sample_counts(5000, 9).unwrap(),
            d.sample_counts(5000, 9).unwrap()
        );
    }

    #[test]
    fn clamps_and_renormalizes() {
        let d = Distribution::from_probabilities(vec![0.5, 0.5, -1e-14]);
        assert_eq!(d.probability(2), 0.0);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_tie_breaks_low() {
        let d = Distribution::from_probabilities(vec![0.5, 0.5]);
        assert_eq!(d.argmax().unwrap(), 0);
    }
}
