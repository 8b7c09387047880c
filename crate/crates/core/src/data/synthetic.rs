//! Synthetic training distributions for the bias benchmark: independent
//! per-bit Bernoulli models with probabilities drawn uniformly from
//! [0.1, 0.9], sampled into small training sets whose empirical tables
//! serve as KL ground truth.

use rand::Rng;

use super::{BinaryDataset, DataError};
use crate::rbm::{BitVector, DEFAULT_ENUMERATION_GUARD};
use crate::rng::Prng;

pub const BERNOULLI_LOW: f64 = 0.1;
pub const BERNOULLI_HIGH: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDistribution {
    pub dataset: BinaryDataset,
    /// Empirical probability of every visible state in the sampled set,
    /// indexed by [`BitVector::index`]. This is the training distribution.
    pub table: Vec<f64>,
    /// The generating per-bit probabilities.
    pub bernoulli: Vec<f64>,
}

/// Generate `n_distributions` independent training sets of
/// `samples_per_dist` vectors over `visible` bits.
pub fn gen_synthetic(
    n_distributions: usize,
    samples_per_dist: usize,
    visible: usize,
    rng: &mut Prng,
) -> Vec<SyntheticDistribution> {
    (0..n_distributions)
        .map(|d| {
            let bernoulli: Vec<f64> = (0..visible)
                .map(|_| rng.random_range(BERNOULLI_LOW..BERNOULLI_HIGH))
                .collect();
            let mut counts = vec![0usize; 1 << visible];
            let samples: Vec<BitVector> = (0..samples_per_dist)
                .map(|_| {
                    let bits: Vec<u8> = bernoulli
                        .iter()
                        .map(|&p| u8::from(rng.random::<f64>() < p))
                        .collect();
                    let v = BitVector::new(bits).expect("bits are 0/1");
                    counts[v.index()] += 1;
                    v
                })
                .collect();
            let table = counts
                .iter()
                .map(|&c| c as f64 / samples_per_dist as f64)
                .collect();
            SyntheticDistribution {
                dataset: BinaryDataset {
                    samples,
                    labels: None,
                    source: format!("synthetic:{d}"),
                },
                table,
                bernoulli,
            }
        })
        .collect()
}

/// Guarded variant for callers taking `visible` from a config file.
pub fn gen_synthetic_checked(
    n_distributions: usize,
    samples_per_dist: usize,
    visible: usize,
    rng: &mut Prng,
) -> Result<Vec<SyntheticDistribution>, DataError> {
    if visible > DEFAULT_ENUMERATION_GUARD {
        return Err(DataError::SyntheticGuard { visible });
    }
    Ok(gen_synthetic(
        n_distributions,
        samples_per_dist,
        visible,
        rng,
    ))
}
