//! The three training procedures: software contrastive divergence (with an
//! optional persistent-chain variant), the hardware-sampled Gibbs trainer
//! with host-side updates, and the fully in-substrate gradient follower.
//!
//! All trainers are deterministic given (seed, config, data order): every
//! random draw comes from substreams derived from the config seed, so a
//! hardware trainer with all nonidealities zeroed replays the software
//! trainer's trajectory bit for bit.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use thiserror::Error;

use crate::hw::{self, HwConfig, HwError, HwState, PassDirection, PumpDirection};
use crate::rbm::{self, BitVector, RbmError, RbmParams};
use crate::rng::{self, Prng};

const SHUFFLE_STREAM: u64 = 1;
const SAMPLING_STREAM: u64 = 2;
const PARTICLE_STREAM: u64 = 3;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("trainer invoked with algo {actual:?}, expected {expected:?}")]
    WrongAlgo { expected: Algo, actual: Algo },
    #[error("batch size must be 1 for the gradient follower, got {0}")]
    BatchSizeNotOne(usize),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training sample {index} has {actual} bits, model has {expected} visible units")]
    SampleDimension {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Rbm(#[from] RbmError),
    #[error(transparent)]
    Hw(#[from] HwError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    /// Software CD-k (plain or persistent).
    Cd,
    /// Hardware sampling passes, host-side updates.
    Gs,
    /// In-substrate half-step updates, minibatch one.
    Bgf,
    /// Exact-gradient ascent baseline (enumerable models only).
    Ml,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub algo: Algo,
    /// Learning rate. For the gradient follower this is the per-event pump
    /// magnitude and should be pre-scaled for minibatch one.
    pub alpha: f64,
    /// Negative-phase depth: Gibbs steps for CD/GS, anneal passes for BGF.
    pub cd_steps: usize,
    pub batch_size: usize,
    /// Full passes over the training data.
    pub epochs: usize,
    /// Persistent-chain count.
    pub particles: usize,
    pub persistent: bool,
    /// Parameter updates between recorded snapshots; 0 records none.
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Cd,
            alpha: 0.1,
            cd_steps: 1,
            batch_size: 100,
            epochs: 1000,
            particles: 10,
            persistent: false,
            snapshot_every: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(TrainError::InvalidConfig(format!(
                "alpha {} must be finite and >= 0",
                self.alpha
            )));
        }
        if self.cd_steps == 0 {
            return Err(TrainError::InvalidConfig("cd_steps must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.particles == 0 {
            return Err(TrainError::InvalidConfig("particles must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameter snapshots along one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// (update index, parameters) pairs, ordered by update index.
    pub snapshots: Vec<(usize, RbmParams)>,
    pub final_params: RbmParams,
    pub rng_seed: u64,
}

fn check_data(params: &RbmParams, data: &[BitVector]) -> Result<(), TrainError> {
    if data.is_empty() {
        return Err(RbmError::EmptyData.into());
    }
    let expected = params.num_visible();
    for (index, v) in data.iter().enumerate() {
        if v.len() != expected {
            return Err(TrainError::SampleDimension {
                index,
                expected,
                actual: v.len(),
            });
        }
    }
    Ok(())
}

/// Per-epoch presentation order: one pass over a fixed shuffle.
fn epoch_order(len: usize, rng: &mut Prng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(rng);
    order
}

/// Minibatch accumulator for the Algorithm-style update arithmetic shared by
/// the software and hardware-sampled trainers.
struct BatchStats {
    pos_w: Array2<f64>,
    neg_w: Array2<f64>,
    pos_v: Array1<f64>,
    neg_v: Array1<f64>,
    pos_h: Array1<f64>,
    neg_h: Array1<f64>,
    count: usize,
}

impl BatchStats {
    fn new(m: usize, n: usize) -> Self {
        Self {
            pos_w: Array2::zeros((m, n)),
            neg_w: Array2::zeros((m, n)),
            pos_v: Array1::zeros(m),
            neg_v: Array1::zeros(m),
            pos_h: Array1::zeros(n),
            neg_h: Array1::zeros(n),
            count: 0,
        }
    }

    fn reset(&mut self) {
        self.pos_w.fill(0.0);
        self.neg_w.fill(0.0);
        self.pos_v.fill(0.0);
        self.neg_v.fill(0.0);
        self.pos_h.fill(0.0);
        self.neg_h.fill(0.0);
        self.count = 0;
    }

    fn add(&mut self, v_pos: &BitVector, h_pos: &BitVector, v_neg: &BitVector, h_neg: &BitVector) {
        accumulate_products(&mut self.pos_w, v_pos, h_pos);
        accumulate_products(&mut self.neg_w, v_neg, h_neg);
        for i in v_pos.ones_iter() {
            self.pos_v[i] += 1.0;
        }
        for i in v_neg.ones_iter() {
            self.neg_v[i] += 1.0;
        }
        for j in h_pos.ones_iter() {
            self.pos_h[j] += 1.0;
        }
        for j in h_neg.ones_iter() {
            self.neg_h[j] += 1.0;
        }
        self.count += 1;
    }

    /// W += alpha (<v+ h+> - <v- h->), and likewise for the biases.
    fn apply(&self, params: &mut RbmParams, alpha: f64) {
        let scale = alpha / self.count as f64;
        ndarray::Zip::from(&mut params.weights)
            .and(&self.pos_w)
            .and(&self.neg_w)
            .for_each(|w, &p, &n| *w += scale * (p - n));
        ndarray::Zip::from(&mut params.visible_bias)
            .and(&self.pos_v)
            .and(&self.neg_v)
            .for_each(|b, &p, &n| *b += scale * (p - n));
        ndarray::Zip::from(&mut params.hidden_bias)
            .and(&self.pos_h)
            .and(&self.neg_h)
            .for_each(|b, &p, &n| *b += scale * (p - n));
    }
}

fn accumulate_products(acc: &mut Array2<f64>, v: &BitVector, h: &BitVector) {
    for i in v.ones_iter() {
        let mut row = acc.row_mut(i);
        for j in h.ones_iter() {
            row[j] += 1.0;
        }
    }
}

struct SnapshotRecorder {
    every: usize,
    snapshots: Vec<(usize, RbmParams)>,
}

impl SnapshotRecorder {
    fn new(every: usize) -> Self {
        Self {
            every,
            snapshots: Vec::new(),
        }
    }

    fn record_with(&mut self, update: usize, params: impl FnOnce() -> RbmParams) {
        if self.every > 0 && update % self.every == 0 {
            self.snapshots.push((update, params()));
        }
    }
}

/// Software contrastive divergence (CD-k), with the persistent-chain
/// variant when `cfg.persistent` is set.
pub fn cd_k_train(
    params: &RbmParams,
    data: &[BitVector],
    cfg: &TrainConfig,
) -> Result<TrainTrace, TrainError> {
    if cfg.algo != Algo::Cd {
        return Err(TrainError::WrongAlgo {
            expected: Algo::Cd,
            actual: cfg.algo,
        });
    }
    cfg.validate()?;
    check_data(params, data)?;

    let mut params = params.clone();
    let m = params.num_visible();
    let n = params.num_hidden();
    let mut shuffle_rng = rng::stream(cfg.seed, SHUFFLE_STREAM);
    let mut sample_rng = rng::stream(cfg.seed, SAMPLING_STREAM);
    let mut particle_rng = rng::stream(cfg.seed, PARTICLE_STREAM);

    let mut particles: Vec<BitVector> = if cfg.persistent {
        (0..cfg.particles)
            .map(|_| BitVector::random(n, &mut particle_rng))
            .collect()
    } else {
        Vec::new()
    };
    let mut sample_counter = 0usize;

    let mut stats = BatchStats::new(m, n);
    let mut recorder = SnapshotRecorder::new(cfg.snapshot_every);
    let mut update = 0usize;

    for _ in 0..cfg.epochs {
        let order = epoch_order(data.len(), &mut shuffle_rng);
        for batch in order.chunks(cfg.batch_size) {
            stats.reset();
            for &idx in batch {
                let v_pos = &data[idx];
                let probs = rbm::hidden_conditional(&params, v_pos)?;
                let h_pos = rbm::sample_bernoulli(&probs, &mut sample_rng)?;

                let particle_slot = sample_counter % cfg.particles;
                sample_counter += 1;
                let mut h_neg = if cfg.persistent {
                    particles[particle_slot].clone()
                } else {
                    h_pos.clone()
                };
                let mut v_neg = BitVector::zeros(m);
                for _ in 0..cfg.cd_steps {
                    let probs = rbm::visible_conditional(&params, &h_neg)?;
                    v_neg = rbm::sample_bernoulli(&probs, &mut sample_rng)?;
                    let probs = rbm::hidden_conditional(&params, &v_neg)?;
                    h_neg = rbm::sample_bernoulli(&probs, &mut sample_rng)?;
                }
                if cfg.persistent {
                    particles[particle_slot] = h_neg.clone();
                }
                stats.add(v_pos, &h_pos, &v_neg, &h_neg);
            }
            stats.apply(&mut params, cfg.alpha);
            update += 1;
            recorder.record_with(update, || params.clone());
        }
    }

    Ok(TrainTrace {
        snapshots: recorder.snapshots,
        final_params: params,
        rng_seed: cfg.seed,
    })
}

/// Hardware-sampled Gibbs trainer: every sampling pass runs on the
/// substrate, the update arithmetic runs host-side, and the couplings are
/// reprogrammed (fresh clipping, same device gains) at each minibatch
/// boundary.
pub fn gs_train(
    params: &RbmParams,
    data: &[BitVector],
    cfg: &TrainConfig,
    hw_cfg: &HwConfig,
) -> Result<TrainTrace, TrainError> {
    if cfg.algo != Algo::Gs {
        return Err(TrainError::WrongAlgo {
            expected: Algo::Gs,
            actual: cfg.algo,
        });
    }
    cfg.validate()?;
    check_data(params, data)?;

    let mut host_params = params.clone();
    let m = host_params.num_visible();
    let n = host_params.num_hidden();
    let mut shuffle_rng = rng::stream(cfg.seed, SHUFFLE_STREAM);
    let mut sample_rng = rng::stream(cfg.seed, SAMPLING_STREAM);
    let mut particle_rng = rng::stream(cfg.seed, PARTICLE_STREAM);

    let mut hw = HwState::init(&host_params, hw_cfg, cfg.particles, &mut particle_rng)?;
    let mut sample_counter = 0usize;

    let mut stats = BatchStats::new(m, n);
    let mut recorder = SnapshotRecorder::new(cfg.snapshot_every);
    let mut update = 0usize;

    for _ in 0..cfg.epochs {
        let order = epoch_order(data.len(), &mut shuffle_rng);
        for batch in order.chunks(cfg.batch_size) {
            hw.program(&host_params, hw_cfg)?;
            stats.reset();
            for &idx in batch {
                let v_pos = &data[idx];
                let h_pos =
                    hw.sample_pass(v_pos, PassDirection::VisibleToHidden, hw_cfg, &mut sample_rng)?;

                let particle_slot = sample_counter % cfg.particles;
                sample_counter += 1;
                let mut h_neg = if cfg.persistent {
                    hw.particle(particle_slot).clone()
                } else {
                    h_pos.clone()
                };
                let mut v_neg = BitVector::zeros(m);
                for _ in 0..cfg.cd_steps {
                    v_neg = hw.sample_pass(
                        &h_neg,
                        PassDirection::HiddenToVisible,
                        hw_cfg,
                        &mut sample_rng,
                    )?;
                    h_neg = hw.sample_pass(
                        &v_neg,
                        PassDirection::VisibleToHidden,
                        hw_cfg,
                        &mut sample_rng,
                    )?;
                }
                if cfg.persistent {
                    hw.set_particle(particle_slot, h_neg.clone());
                }
                stats.add(v_pos, &h_pos, &v_neg, &h_neg);
            }
            stats.apply(&mut host_params, cfg.alpha);
            update += 1;
            recorder.record_with(update, || host_params.clone());
        }
    }

    Ok(TrainTrace {
        snapshots: recorder.snapshots,
        final_params: host_params,
        rng_seed: cfg.seed,
    })
}

/// In-substrate gradient follower: minibatch one, per-sample half-step pump
/// updates (positive increments applied before the negative phase samples),
/// persistent particles cycled round-robin, parameters observed only
/// through readout.
pub fn bgf_train(
    hw: &mut HwState,
    data: &[BitVector],
    cfg: &TrainConfig,
    hw_cfg: &HwConfig,
) -> Result<TrainTrace, TrainError> {
    if cfg.algo != Algo::Bgf {
        return Err(TrainError::WrongAlgo {
            expected: Algo::Bgf,
            actual: cfg.algo,
        });
    }
    if cfg.batch_size != 1 {
        return Err(TrainError::BatchSizeNotOne(cfg.batch_size));
    }
    cfg.validate()?;
    check_data(hw.params(), data)?;

    let mut shuffle_rng = rng::stream(cfg.seed, SHUFFLE_STREAM);
    let mut sample_rng = rng::stream(cfg.seed, SAMPLING_STREAM);

    let particle_count = hw.particle_count();
    let mut sample_counter = 0usize;
    let mut recorder = SnapshotRecorder::new(cfg.snapshot_every);
    let mut update = 0usize;

    for _ in 0..cfg.epochs {
        let order = epoch_order(data.len(), &mut shuffle_rng);
        for &idx in &order {
            let v_pos = &data[idx];
            // Positive phase: clamp the sample, one settle pass, increment.
            let h_pos =
                hw.sample_pass(v_pos, PassDirection::VisibleToHidden, hw_cfg, &mut sample_rng)?;
            pump_phase(hw, v_pos, &h_pos, PumpDirection::Increment, cfg.alpha, hw_cfg);

            // Negative phase: anneal the next particle, decrement.
            let particle_slot = sample_counter % particle_count;
            sample_counter += 1;
            let (v_neg, h_neg) =
                hw.anneal_run(particle_slot, cfg.cd_steps, hw_cfg, &mut sample_rng)?;
            pump_phase(hw, &v_neg, &h_neg, PumpDirection::Decrement, cfg.alpha, hw_cfg);

            update += 1;
            recorder.record_with(update, || hw.readout(hw_cfg));
        }
    }

    Ok(TrainTrace {
        snapshots: recorder.snapshots,
        final_params: hw.readout(hw_cfg),
        rng_seed: cfg.seed,
    })
}

/// Apply one phase's pump events: every coupler whose two endpoint units are
/// both 1 fires, and each bias fires with its unit (partner treated as 1).
fn pump_phase(
    hw: &mut HwState,
    v: &BitVector,
    h: &BitVector,
    direction: PumpDirection,
    magnitude: f64,
    cfg: &HwConfig,
) {
    if magnitude == 0.0 {
        return;
    }
    let gains = hw.static_gain().clone();
    let params = hw.params_mut();
    for i in v.ones_iter() {
        let mut w_row = params.weights.row_mut(i);
        let g_row = gains.row(i);
        for j in h.ones_iter() {
            w_row[j] = hw::charge_pump_update(w_row[j], direction, magnitude, g_row[j], cfg);
        }
        params.visible_bias[i] =
            hw::charge_pump_update(params.visible_bias[i], direction, magnitude, 1.0, cfg);
    }
    for j in h.ones_iter() {
        params.hidden_bias[j] =
            hw::charge_pump_update(params.hidden_bias[j], direction, magnitude, 1.0, cfg);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn toy_data(m: usize, count: usize, seed: u64) -> Vec<BitVector> {
        let mut r = rng::stream(seed, 0);
        (0..count).map(|_| BitVector::random(m, &mut r)).collect()
    }

    fn toy_params(m: usize, n: usize, seed: u64) -> RbmParams {
        let mut r = rng::stream(seed, 1);
        RbmParams::random_init(m, n, 0.01, &mut r)
    }

    #[test]
    fn zero_alpha_leaves_params_unchanged() {
        let params = toy_params(4, 3, 1);
        let data = toy_data(4, 12, 2);
        let cfg = TrainConfig {
            alpha: 0.0,
            epochs: 3,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let trace = cd_k_train(&params, &data, &cfg).unwrap();
        assert_eq!(trace.final_params, params);

        let gs_cfg = TrainConfig {
            algo: Algo::Gs,
            ..cfg.clone()
        };
        let hw_cfg = HwConfig {
            noise_rms: 0.2,
            variation_rms: 0.2,
            ..HwConfig::default()
        };
        let trace = gs_train(&params, &data, &gs_cfg, &hw_cfg).unwrap();
        assert_eq!(trace.final_params, params);

        let bgf_cfg = TrainConfig {
            algo: Algo::Bgf,
            batch_size: 1,
            alpha: 0.0,
            epochs: 2,
            ..TrainConfig::default()
        };
        let mut r = rng::stream(5, 0);
        let mut hw = HwState::init(&params, &hw_cfg, 3, &mut r).unwrap();
        let before = hw.readout(&hw_cfg);
        bgf_train(&mut hw, &data, &bgf_cfg, &hw_cfg).unwrap();
        assert_eq!(hw.readout(&hw_cfg), before);
    }

    #[test]
    fn trainers_reject_wrong_algo_and_bad_batch() {
        let params = toy_params(3, 2, 1);
        let data = toy_data(3, 4, 2);
        let cfg = TrainConfig {
            algo: Algo::Gs,
            ..TrainConfig::default()
        };
        assert!(matches!(
            cd_k_train(&params, &data, &cfg).unwrap_err(),
            TrainError::WrongAlgo { .. }
        ));

        let hw_cfg = HwConfig::default();
        let mut r = rng::stream(1, 0);
        let mut hw = HwState::init(&params, &hw_cfg, 2, &mut r).unwrap();
        let cfg = TrainConfig {
            algo: Algo::Bgf,
            batch_size: 2,
            ..TrainConfig::default()
        };
        assert!(matches!(
            bgf_train(&mut hw, &data, &cfg, &hw_cfg).unwrap_err(),
            TrainError::BatchSizeNotOne(2)
        ));
    }

    #[test]
    fn trainers_reject_dimension_mismatch_and_empty_data() {
        let params = toy_params(3, 2, 1);
        let cfg = TrainConfig::default();
        assert!(matches!(
            cd_k_train(&params, &[], &cfg).unwrap_err(),
            TrainError::Rbm(RbmError::EmptyData)
        ));
        let bad = toy_data(4, 2, 3);
        assert!(matches!(
            cd_k_train(&params, &bad, &cfg).unwrap_err(),
            TrainError::SampleDimension { index: 0, expected: 3, actual: 4 }
        ));
    }

    #[test]
    fn cd_is_deterministic_per_seed() {
        let params = toy_params(5, 3, 7);
        let data = toy_data(5, 20, 8);
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 5,
            snapshot_every: 2,
            seed: 33,
            ..TrainConfig::default()
        };
        let a = cd_k_train(&params, &data, &cfg).unwrap();
        let b = cd_k_train(&params, &data, &cfg).unwrap();
        assert_eq!(a, b);
        let other = cd_k_train(
            &params,
            &data,
            &TrainConfig {
                seed: 34,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a.final_params, other.final_params);
    }

    #[test]
    fn snapshots_are_ordered_and_final_matches() {
        let params = toy_params(4, 2, 9);
        let data = toy_data(4, 8, 10);
        let cfg = TrainConfig {
            epochs: 4,
            batch_size: 4,
            snapshot_every: 2,
            ..TrainConfig::default()
        };
        let trace = cd_k_train(&params, &data, &cfg).unwrap();
        // 8 updates, snapshots at 2, 4, 6, 8.
        assert_eq!(
            trace.snapshots.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            vec![2, 4, 6, 8]
        );
        assert_eq!(trace.snapshots.last().unwrap().1, trace.final_params);
    }

    #[test]
    fn update_sign_follows_sample_products() {
        // Saturated biases force positive-phase products to 1 and
        // negative-phase products to 0, so every weight must rise.
        let mut params = RbmParams::zeros(3, 2);
        params.hidden_bias.fill(30.0);
        params.visible_bias.fill(-30.0);
        let data = vec![BitVector::ones(3); 4];
        let cfg = TrainConfig {
            alpha: 0.5,
            epochs: 1,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let trace = cd_k_train(&params, &data, &cfg).unwrap();
        for (w_new, w_old) in trace.final_params.weights.iter().zip(params.weights.iter()) {
            assert!(w_new > w_old);
        }

        let hw_cfg = HwConfig {
            w_min: -40.0,
            w_max: 40.0,
            ..HwConfig::default()
        };
        let gs_cfg = TrainConfig {
            algo: Algo::Gs,
            ..cfg
        };
        let trace = gs_train(&params, &data, &gs_cfg, &hw_cfg).unwrap();
        for (w_new, w_old) in trace.final_params.weights.iter().zip(params.weights.iter()) {
            assert!(w_new > w_old);
        }
    }

    #[test]
    fn bgf_single_pair_updates_only_active_couplers() {
        // One visible and one hidden unit pinned on; every other product is
        // zero and must leave its coupler untouched.
        let mut params = RbmParams::zeros(3, 2);
        params.visible_bias[0] = 30.0;
        params.visible_bias[1] = -30.0;
        params.visible_bias[2] = -30.0;
        params.hidden_bias[0] = 30.0;
        params.hidden_bias[1] = -30.0;
        let hw_cfg = HwConfig {
            w_min: -40.0,
            w_max: 40.0,
            anneal_t_start: 1.0,
            readout_bits: 0,
            ..HwConfig::default()
        };
        let mut r = rng::stream(2, 0);
        let mut hw = HwState::init(&params, &hw_cfg, 1, &mut r).unwrap();

        let data = vec![BitVector::new(vec![1, 0, 0]).unwrap()];
        let cfg = TrainConfig {
            algo: Algo::Bgf,
            alpha: 0.8,
            batch_size: 1,
            epochs: 1,
            cd_steps: 1,
            particles: 1,
            ..TrainConfig::default()
        };
        let before = hw.params().clone();
        bgf_train(&mut hw, &data, &cfg, &hw_cfg).unwrap();
        let after = hw.params();

        // Positive phase: (0,0) fires. Negative phase: the anneal settles to
        // the same saturated state, so (0,0) also decrements; the pump rails
        // make the pair net-positive from mid-rail zero only when the
        // negative step shrinks it from a positive value. Every other
        // coupler saw product zero both times.
        for i in 0..3 {
            for j in 0..2 {
                if (i, j) != (0, 0) {
                    assert_eq!(after.weights[[i, j]], before.weights[[i, j]]);
                }
            }
        }
        assert_ne!(after.weights[[0, 0]], before.weights[[0, 0]]);
    }

    #[test]
    fn bgf_positive_only_pair_strictly_increases() {
        // Freeze the negative phase off by zero-probability units: visible
        // bias very negative makes v_neg all zero, so only the positive
        // increment lands.
        let mut params = RbmParams::zeros(2, 2);
        params.visible_bias.fill(-30.0);
        params.hidden_bias.fill(30.0);
        let hw_cfg = HwConfig {
            w_min: -40.0,
            w_max: 40.0,
            anneal_t_start: 1.0,
            readout_bits: 0,
            ..HwConfig::default()
        };
        let mut r = rng::stream(3, 0);
        let mut hw = HwState::init(&params, &hw_cfg, 1, &mut r).unwrap();
        let data = vec![BitVector::ones(2)];
        let cfg = TrainConfig {
            algo: Algo::Bgf,
            alpha: 1.0,
            batch_size: 1,
            epochs: 1,
            cd_steps: 1,
            particles: 1,
            ..TrainConfig::default()
        };
        let before = hw.params().weights.clone();
        bgf_train(&mut hw, &data, &cfg, &hw_cfg).unwrap();
        for (w_new, w_old) in hw.params().weights.iter().zip(before.iter()) {
            assert!(w_new > w_old);
        }
    }

    #[test]
    fn particle_round_robin_uses_each_equally() {
        // With p particles and p*n samples per epoch, every particle is
        // refreshed n times; verify via the persistence side effect that
        // each slot changed from its initial value (statistically certain
        // with a mixing model) and that slot selection is by sample order.
        let params = toy_params(3, 4, 21);
        let data = toy_data(3, 12, 22);
        let hw_cfg = HwConfig::default();
        let cfg = TrainConfig {
            algo: Algo::Bgf,
            alpha: 0.01,
            batch_size: 1,
            epochs: 3,
            cd_steps: 2,
            particles: 4,
            seed: 77,
            ..TrainConfig::default()
        };
        let mut r = rng::stream(cfg.seed, PARTICLE_STREAM);
        let mut hw = HwState::init(&params, &hw_cfg, cfg.particles, &mut r).unwrap();
        let initial: Vec<BitVector> = (0..4).map(|i| hw.particle(i).clone()).collect();
        bgf_train(&mut hw, &data, &cfg, &hw_cfg).unwrap();
        // 36 samples over 4 slots: each used exactly 9 times. All slots were
        // visited (each almost surely differs from init after 9 refreshes).
        let changed = (0..4).filter(|&i| *hw.particle(i) != initial[i]).count();
        assert!(changed >= 3, "only {changed} of 4 particles were refreshed");
    }
}
