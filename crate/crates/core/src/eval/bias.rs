//! KL-divergence bias benchmark.
//!
//! Small enumerable models are trained on randomly generated product-of-
//! Bernoulli distributions by each configured algorithm, from many random
//! initial conditions; the final KL divergence of the training distribution
//! against the learned visible marginal is collected into per-algorithm
//! cumulative distributions.

use rand::Rng;
use rayon::prelude::*;

use super::{kl_divergence, ml_train, model_visible_distribution, EvalError};
use crate::data::synthetic::{gen_synthetic, SyntheticDistribution};
use crate::hw::{HwConfig, HwState, PumpMode};
use crate::rbm::RbmParams;
use crate::rng::{self, Prng};
use crate::train::{bgf_train, cd_k_train, Algo, TrainConfig};

const DIST_STREAM: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasAlgo {
    Ml,
    Cd1,
    CdK,
    Bgf,
}

impl BiasAlgo {
    pub fn label(self) -> &'static str {
        match self {
            BiasAlgo::Ml => "ml",
            BiasAlgo::Cd1 => "cd1",
            BiasAlgo::CdK => "cdk",
            BiasAlgo::Bgf => "bgf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiasBenchConfig {
    pub n_distributions: usize,
    pub samples_per_dist: usize,
    pub visible: usize,
    pub hidden: usize,
    /// Full passes over each training set.
    pub iterations: usize,
    /// Random restarts per distribution.
    pub runs: usize,
    pub algorithms: Vec<BiasAlgo>,
    /// k for the CD-k entry.
    pub cd_k: usize,
    /// Full-batch learning rate for ML / CD; the gradient follower derives
    /// its per-event rate from this.
    pub alpha: f64,
    /// Per-event pump magnitude = alpha * bgf_alpha_scale / samples_per_dist.
    pub bgf_alpha_scale: f64,
    pub bgf_anneal_passes: usize,
    pub bgf_particles: usize,
    /// Substrate for the gradient-follower runs. Sampling nonidealities stay
    /// off by default so the benchmark isolates algorithmic bias; the pump
    /// and anneal schedule remain active because they are the algorithm.
    pub bgf_hw: HwConfig,
}

impl Default for BiasBenchConfig {
    fn default() -> Self {
        Self {
            n_distributions: 60,
            samples_per_dist: 100,
            visible: 12,
            hidden: 4,
            iterations: 1000,
            runs: 400,
            algorithms: vec![BiasAlgo::Ml, BiasAlgo::Cd1, BiasAlgo::Bgf],
            cd_k: 10,
            alpha: 0.1,
            bgf_alpha_scale: 2.0,
            bgf_anneal_passes: 5,
            bgf_particles: 10,
            bgf_hw: HwConfig {
                variation_rms: 0.0,
                noise_rms: 0.0,
                gain_variation_rms: 0.0,
                w_min: -8.0,
                w_max: 8.0,
                pump_mode: PumpMode::ChargeRedistribution,
                readout_bits: 0,
                anneal_t_start: 2.0,
                ..HwConfig::default()
            },
        }
    }
}

impl BiasBenchConfig {
    /// The reduced configuration used for quick statistical replication.
    pub fn desk_scale() -> Self {
        Self {
            n_distributions: 10,
            runs: 40,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.visible + self.hidden > crate::rbm::DEFAULT_ENUMERATION_GUARD {
            return Err(EvalError::InvalidConfig(format!(
                "{}x{} model exceeds the enumeration guard",
                self.visible, self.hidden
            )));
        }
        if self.n_distributions == 0 || self.runs == 0 {
            return Err(EvalError::InvalidConfig(
                "need at least one distribution and one run".into(),
            ));
        }
        if self.samples_per_dist == 0 {
            return Err(EvalError::InvalidConfig(
                "samples_per_dist must be >= 1".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(EvalError::InvalidConfig("no algorithms selected".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasBenchResult {
    /// Sorted KL values per algorithm, in `algorithms` order.
    pub per_algo: Vec<(BiasAlgo, Vec<f64>)>,
}

impl BiasBenchResult {
    pub fn kl_values(&self, algo: BiasAlgo) -> Option<&[f64]> {
        self.per_algo
            .iter()
            .find(|(a, _)| *a == algo)
            .map(|(_, v)| v.as_slice())
    }

    pub fn median(&self, algo: BiasAlgo) -> Option<f64> {
        self.kl_values(algo).map(|v| {
            let n = v.len();
            if n % 2 == 1 {
                v[n / 2]
            } else {
                0.5 * (v[n / 2 - 1] + v[n / 2])
            }
        })
    }
}

/// Sorted KL values paired with their cumulative probability.
pub fn kl_cdf(sorted_kl: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted_kl.len() as f64;
    sorted_kl
        .iter()
        .enumerate()
        .map(|(i, &kl)| (kl, (i + 1) as f64 / n))
        .collect()
}

fn train_one(
    algo: BiasAlgo,
    dist: &SyntheticDistribution,
    cfg: &BiasBenchConfig,
    job_seed: u64,
) -> Result<f64, EvalError> {
    let mut init_rng = rng::stream(job_seed, 0);
    let params = RbmParams::random_init(cfg.visible, cfg.hidden, 0.01, &mut init_rng);
    let data = &dist.dataset.samples;

    let base = TrainConfig {
        alpha: cfg.alpha,
        batch_size: cfg.samples_per_dist,
        epochs: cfg.iterations,
        seed: job_seed,
        snapshot_every: 0,
        ..TrainConfig::default()
    };
    let final_params = match algo {
        BiasAlgo::Ml => {
            let cfg = TrainConfig {
                algo: Algo::Ml,
                ..base
            };
            ml_train(&params, data, &cfg)?.final_params
        }
        BiasAlgo::Cd1 => {
            let cfg = TrainConfig {
                algo: Algo::Cd,
                cd_steps: 1,
                ..base
            };
            cd_k_train(&params, data, &cfg)?.final_params
        }
        BiasAlgo::CdK => {
            let cfg = TrainConfig {
                algo: Algo::Cd,
                cd_steps: cfg.cd_k,
                ..base
            };
            cd_k_train(&params, data, &cfg)?.final_params
        }
        BiasAlgo::Bgf => {
            let hw_cfg = HwConfig {
                seed: job_seed,
                ..cfg.bgf_hw.clone()
            };
            let train_cfg = TrainConfig {
                algo: Algo::Bgf,
                alpha: cfg.alpha * cfg.bgf_alpha_scale / cfg.samples_per_dist as f64,
                batch_size: 1,
                cd_steps: cfg.bgf_anneal_passes,
                particles: cfg.bgf_particles,
                ..base
            };
            let mut particle_rng = rng::stream(job_seed, 3);
            let mut hw = HwState::init(&params, &hw_cfg, cfg.bgf_particles, &mut particle_rng)?;
            bgf_train(&mut hw, data, &train_cfg, &hw_cfg)?.final_params
        }
    };
    let model = model_visible_distribution(&final_params)?;
    kl_divergence(&dist.table, &model)
}

/// Run the benchmark. Jobs fan out across the current rayon pool; results
/// depend only on the draw taken from `rng` at entry.
pub fn bias_experiment(
    cfg: &BiasBenchConfig,
    rng: &mut Prng,
) -> Result<BiasBenchResult, EvalError> {
    cfg.validate()?;
    let master = rng.random::<u64>();
    let mut dist_rng = rng::stream(master, DIST_STREAM);
    let dists = gen_synthetic(
        cfg.n_distributions,
        cfg.samples_per_dist,
        cfg.visible,
        &mut dist_rng,
    );

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.algorithms.len())
        .flat_map(|a| {
            (0..cfg.n_distributions)
                .flat_map(move |d| (0..cfg.runs).map(move |r| (a, d, r)))
        })
        .collect();

    let kls: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|&(a, d, r)| {
            let algo = cfg.algorithms[a];
            let job_seed = rng::mix_seed(master, &[a as u64, d as u64, r as u64]);
            train_one(algo, &dists[d], cfg, job_seed).map(|kl| (a, kl))
        })
        .collect::<Result<_, _>>()?;

    let mut per_algo: Vec<(BiasAlgo, Vec<f64>)> = cfg
        .algorithms
        .iter()
        .map(|&a| (a, Vec::with_capacity(cfg.n_distributions * cfg.runs)))
        .collect();
    for (a, kl) in kls {
        per_algo[a].1.push(kl);
    }
    for (_, v) in per_algo.iter_mut() {
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    Ok(BiasBenchResult { per_algo })
}
