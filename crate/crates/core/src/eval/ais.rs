//! Annealed importance sampling for the partition function.
//!
//! Chains start at a base-rate model (zero weights, chosen visible biases),
//! pass through a ladder of intermediate models with geometrically scaled
//! weights and hidden biases (visible biases interpolated linearly), and
//! accumulate log importance weights whose mean estimates log(Z / Z_base).

use ndarray::Array1;
use rand::Rng;

use super::EvalError;
use crate::rbm::{self, sigmoid, softplus, BitVector, RbmParams};
use crate::rng::Prng;

/// Base-rate model of a chain: always zero-weight, with these visible biases.
#[derive(Debug, Clone, PartialEq)]
pub enum AisBase {
    Uniform,
    VisibleBias(Array1<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AisConfig {
    /// Number of interpolating distributions, endpoints included.
    pub n_temps: usize,
    /// Independent annealed chains.
    pub n_runs: usize,
    pub base: AisBase,
}

impl Default for AisConfig {
    fn default() -> Self {
        Self {
            n_temps: 1000,
            n_runs: 100,
            base: AisBase::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AisEstimate {
    pub log_z: f64,
    pub stderr: f64,
    /// Chains discarded for producing non-finite weights.
    pub dropped_runs: usize,
}

/// Visible biases matched to the data marginals (with light smoothing), the
/// standard base-rate choice.
pub fn fitted_visible_base(data: &[BitVector]) -> Result<AisBase, EvalError> {
    if data.is_empty() {
        return Err(EvalError::Rbm(rbm::RbmError::EmptyData));
    }
    let m = data[0].len();
    let mut counts = vec![0.0f64; m];
    for v in data {
        for i in v.ones_iter() {
            counts[i] += 1.0;
        }
    }
    let t = data.len() as f64;
    let biases = Array1::from_iter(counts.iter().map(|&c| {
        let p = (c + 1.0) / (t + 2.0);
        (p / (1.0 - p)).ln()
    }));
    Ok(AisBase::VisibleBias(biases))
}

/// log of the intermediate unnormalized visible marginal at inverse
/// temperature `beta`.
fn log_intermediate(
    params: &RbmParams,
    base_bias: &Array1<f64>,
    beta: f64,
    v: &BitVector,
) -> f64 {
    let mut total = 0.0;
    for i in v.ones_iter() {
        total += (1.0 - beta) * base_bias[i] + beta * params.visible_bias[i];
    }
    // Weights and hidden biases scale together, so the intermediate hidden
    // activation is just beta times the target's.
    let act = rbm::scaled_hidden_activation(params, v, beta);
    total + act.iter().map(|&a| softplus(a)).sum::<f64>()
}

/// One block-Gibbs sweep under the intermediate model at `beta`.
fn gibbs_sweep(
    params: &RbmParams,
    base_bias: &Array1<f64>,
    beta: f64,
    v: &mut BitVector,
    rng: &mut Prng,
) {
    let act = rbm::scaled_hidden_activation(params, v, beta);
    let n = params.num_hidden();
    let mut h = BitVector::zeros(n);
    for j in 0..n {
        h.set(j, rng.random::<f64>() < sigmoid(act[j]));
    }
    let m = params.num_visible();
    for i in 0..m {
        let mut a = (1.0 - beta) * base_bias[i] + beta * params.visible_bias[i];
        let row = params.weights.row(i);
        for j in h.ones_iter() {
            a += beta * row[j];
        }
        v.set(i, rng.random::<f64>() < sigmoid(a));
    }
}

/// Estimate log Z with annealed importance sampling.
pub fn ais_log_partition(
    params: &RbmParams,
    cfg: &AisConfig,
    rng: &mut Prng,
) -> Result<AisEstimate, EvalError> {
    if cfg.n_temps < 2 {
        return Err(EvalError::InvalidConfig(format!(
            "n_temps {} must be >= 2",
            cfg.n_temps
        )));
    }
    if cfg.n_runs < 1 {
        return Err(EvalError::InvalidConfig("n_runs must be >= 1".into()));
    }
    let m = params.num_visible();
    let n = params.num_hidden();
    let base_bias = match &cfg.base {
        AisBase::Uniform => Array1::zeros(m),
        AisBase::VisibleBias(b) => {
            if b.len() != m {
                return Err(EvalError::InvalidConfig(format!(
                    "base bias has {} entries, model has {m} visible units",
                    b.len()
                )));
            }
            b.clone()
        }
    };

    // Z of the base model: free hidden units times independent visibles.
    let log_z_base =
        n as f64 * 2.0f64.ln() + base_bias.iter().map(|&b| softplus(b)).sum::<f64>();

    let mut log_weights = Vec::with_capacity(cfg.n_runs);
    let mut dropped = 0usize;
    for _ in 0..cfg.n_runs {
        // Exact sample from the base model.
        let mut v = BitVector::zeros(m);
        for i in 0..m {
            v.set(i, rng.random::<f64>() < sigmoid(base_bias[i]));
        }
        let mut log_w = 0.0f64;
        let steps = cfg.n_temps - 1;
        for k in 1..=steps {
            let beta_prev = (k - 1) as f64 / steps as f64;
            let beta = k as f64 / steps as f64;
            log_w += log_intermediate(params, &base_bias, beta, &v)
                - log_intermediate(params, &base_bias, beta_prev, &v);
            if k < steps {
                gibbs_sweep(params, &base_bias, beta, &mut v, rng);
            }
        }
        if log_w.is_finite() {
            log_weights.push(log_w);
        } else {
            dropped += 1;
        }
    }
    if log_weights.is_empty() {
        return Err(EvalError::AisFailed(cfg.n_runs));
    }

    // Log-domain mean and a delta-method standard error.
    let max_w = log_weights.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let scaled: Vec<f64> = log_weights.iter().map(|&w| (w - max_w).exp()).collect();
    let count = scaled.len() as f64;
    let mean = scaled.iter().sum::<f64>() / count;
    let stderr = if scaled.len() > 1 {
        let var = scaled.iter().map(|&u| (u - mean) * (u - mean)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt() / mean
    } else {
        0.0
    };
    Ok(AisEstimate {
        log_z: log_z_base + max_w + mean.ln(),
        stderr,
        dropped_runs: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_model_is_exact_regardless_of_budget() {
        let params = RbmParams::zeros(5, 3);
        for (temps, runs) in [(2, 1), (10, 3), (50, 20)] {
            let cfg = AisConfig {
                n_temps: temps,
                n_runs: runs,
                base: AisBase::Uniform,
            };
            let mut r = rng::stream(1, 0);
            let est = ais_log_partition(&params, &cfg, &mut r).unwrap();
            assert_eq!(est.log_z, 8.0 * 2.0f64.ln());
            assert_eq!(est.stderr, 0.0);
            assert_eq!(est.dropped_runs, 0);
        }
    }

    #[test]
    fn config_is_validated() {
        let params = RbmParams::zeros(2, 2);
        let mut r = rng::stream(1, 0);
        let cfg = AisConfig {
            n_temps: 1,
            n_runs: 1,
            base: AisBase::Uniform,
        };
        assert!(ais_log_partition(&params, &cfg, &mut r).is_err());
        let cfg = AisConfig {
            n_temps: 10,
            n_runs: 0,
            base: AisBase::Uniform,
        };
        assert!(ais_log_partition(&params, &cfg, &mut r).is_err());
    }

    #[test]
    fn fitted_base_matches_marginals() {
        let data = vec![
            BitVector::new(vec![1, 0]).unwrap(),
            BitVector::new(vec![1, 0]).unwrap(),
            BitVector::new(vec![1, 1]).unwrap(),
            BitVector::new(vec![0, 0]).unwrap(),
        ];
        let AisBase::VisibleBias(b) = fitted_visible_base(&data).unwrap() else {
            panic!("expected fitted biases");
        };
        // Smoothed marginals: (3+1)/6 and (1+1)/6.
        assert!((b[0] - (4.0f64 / 2.0).ln()).abs() < 1e-12);
        assert!((b[1] - (2.0f64 / 4.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn ais_tracks_exact_log_z_on_small_model() {
        let mut r = rng::stream(12, 0);
        let params = RbmParams::random_init(6, 3, 0.7, &mut r);
        let exact = rbm::exact_log_partition(&params).unwrap();
        let cfg = AisConfig {
            n_temps: 300,
            n_runs: 60,
            base: AisBase::Uniform,
        };
        let est = ais_log_partition(&params, &cfg, &mut r).unwrap();
        assert!(
            (est.log_z - exact).abs() < 0.1,
            "AIS {} vs exact {exact}",
            est.log_z
        );
    }
}
