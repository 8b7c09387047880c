//! Model quality measurement: exact small-model evaluation, annealed
//! importance sampling, the KL-divergence bias benchmark, a logistic
//! classification head, and the noise sweep harness.

mod ais;
mod bias;
mod classify;
mod sweep;

pub use ais::{ais_log_partition, fitted_visible_base, AisBase, AisConfig, AisEstimate};
pub use bias::{bias_experiment, kl_cdf, BiasAlgo, BiasBenchConfig, BiasBenchResult};
pub use classify::{classifier_accuracy, classifier_head_train, hidden_features, LogisticHead};
pub use sweep::{
    evaluate_trace, moving_average, noise_sweep, run_sweep_point, EvalReport, SweepPoint,
    SweepSpec,
};

use thiserror::Error;

use crate::rbm::{self, BitVector, RbmError, RbmParams};
use crate::train::{self, Algo, TrainConfig, TrainError, TrainTrace};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("probability tables have different lengths: {left} vs {right}")]
    TableLength { left: usize, right: usize },
    #[error("reference table sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("model table entry {index} is negative: {value}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("invalid eval config: {0}")]
    InvalidConfig(String),
    #[error("all {0} annealed runs produced non-finite weights")]
    AisFailed(usize),
    #[error("classifier needs at least two classes, got {0}")]
    DegenerateClasses(usize),
    #[error("feature matrix has {rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error(transparent)]
    Rbm(#[from] RbmError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Hw(#[from] crate::hw::HwError),
}

/// Mean log probability of `data` given a (exact or estimated) log Z.
pub fn avg_log_prob(params: &RbmParams, data: &[BitVector], log_z: f64) -> Result<f64, EvalError> {
    if data.is_empty() {
        return Err(EvalError::Rbm(RbmError::EmptyData));
    }
    let mut total = 0.0;
    for v in data {
        total += rbm::log_unnorm_marginal(params, v)?;
    }
    Ok(total / data.len() as f64 - log_z)
}

/// P(v) for every visible state, indexed by [`BitVector::index`].
pub fn model_visible_distribution(params: &RbmParams) -> Result<Vec<f64>, EvalError> {
    model_visible_distribution_guarded(params, rbm::DEFAULT_ENUMERATION_GUARD)
}

pub fn model_visible_distribution_guarded(
    params: &RbmParams,
    guard: usize,
) -> Result<Vec<f64>, EvalError> {
    let log_z = rbm::exact_log_partition_guarded(params, guard)?;
    let m = params.num_visible();
    let mut table = vec![0.0f64; 1 << m];
    for index in 0..table.len() {
        let v = BitVector::from_index(index, m);
        table[index] = (rbm::log_unnorm_marginal(params, &v)? - log_z).exp();
    }
    Ok(table)
}

/// KL(p || q) with the 0 log 0 convention; +infinity where q vanishes on
/// the support of p.
pub fn kl_divergence(p_true: &[f64], q_model: &[f64]) -> Result<f64, EvalError> {
    if p_true.len() != q_model.len() {
        return Err(EvalError::TableLength {
            left: p_true.len(),
            right: q_model.len(),
        });
    }
    let sum: f64 = p_true.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(EvalError::NotNormalized { sum });
    }
    for (index, &value) in q_model.iter().enumerate() {
        if value < 0.0 {
            return Err(EvalError::NegativeProbability { index, value });
        }
    }
    let mut kl = 0.0;
    for (&p, &q) in p_true.iter().zip(q_model.iter()) {
        if p > 0.0 {
            if q == 0.0 {
                return Ok(f64::INFINITY);
            }
            kl += p * (p / q).ln();
        }
    }
    Ok(kl)
}

/// Maximum-likelihood baseline: full-batch exact-gradient ascent.
pub fn ml_train(
    params: &RbmParams,
    data: &[BitVector],
    cfg: &TrainConfig,
) -> Result<TrainTrace, EvalError> {
    if cfg.algo != Algo::Ml {
        return Err(EvalError::Train(TrainError::WrongAlgo {
            expected: Algo::Ml,
            actual: cfg.algo,
        }));
    }
    cfg.validate().map_err(EvalError::Train)?;
    if data.is_empty() {
        return Err(EvalError::Rbm(RbmError::EmptyData));
    }
    let mut params = params.clone();
    let mut snapshots = Vec::new();
    for update in 1..=cfg.epochs {
        let grad = rbm::exact_gradient(&params, data)?;
        params.apply_gradient(&grad, cfg.alpha);
        if cfg.snapshot_every > 0 && update % cfg.snapshot_every == 0 {
            snapshots.push((update, params.clone()));
        }
    }
    Ok(TrainTrace {
        snapshots,
        final_params: params,
        rng_seed: cfg.seed,
    })
}

/// Dispatch a training run by algorithm; the gradient follower builds its
/// substrate from `hw_cfg` on the fly.
pub fn run_trainer(
    params: &RbmParams,
    data: &[BitVector],
    cfg: &TrainConfig,
    hw_cfg: &crate::hw::HwConfig,
) -> Result<TrainTrace, EvalError> {
    match cfg.algo {
        Algo::Cd => Ok(train::cd_k_train(params, data, cfg)?),
        Algo::Gs => Ok(train::gs_train(params, data, cfg, hw_cfg)?),
        Algo::Bgf => {
            let mut particle_rng = crate::rng::stream(cfg.seed, 3);
            let mut hw =
                crate::hw::HwState::init(params, hw_cfg, cfg.particles, &mut particle_rng)?;
            Ok(train::bgf_train(&mut hw, data, cfg, hw_cfg)?)
        }
        Algo::Ml => ml_train(params, data, cfg),
    }
}
