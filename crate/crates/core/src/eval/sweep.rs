//! Noise/variation sweep harness: one training run per grid point with an
//! independent derived seed, evaluated on the training data.

use rayon::prelude::*;

use super::{
    ais_log_partition, avg_log_prob, kl_divergence, model_visible_distribution_guarded,
    run_trainer, AisConfig, EvalError,
};
use crate::hw::HwConfig;
use crate::rbm::{self, BitVector, RbmParams};
use crate::rng::{self, Prng};
use crate::train::TrainConfig;

/// One experiment shape shared by every grid point.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub train: TrainConfig,
    /// Base hardware config; each grid point overrides the variation and
    /// noise terms and receives its own device seed.
    pub hw: HwConfig,
    pub data: Vec<BitVector>,
    /// Hidden layer width for the freshly initialized model of each point.
    pub hidden_units: usize,
    /// Ground-truth visible table for KL reporting, when available.
    pub reference_table: Option<Vec<f64>>,
    /// Moving-average window for the reported trajectory.
    pub smoothing_window: usize,
    /// Fallback AIS budget for models beyond the enumeration guard.
    pub ais: AisConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub avg_log_prob: f64,
    pub log_z: f64,
    pub log_z_stderr: f64,
    pub kl: Option<f64>,
    pub accuracy: Option<f64>,
    /// (update index, smoothed avg log probability) per snapshot.
    pub trajectory: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub variation_rms: f64,
    pub noise_rms: f64,
    pub seed: u64,
    pub report: EvalReport,
}

/// Trailing moving average with the window clipped at the series start.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i.min(window - 1) + 1) as f64);
    }
    out
}

fn log_partition_any(
    params: &RbmParams,
    ais: &AisConfig,
    rng: &mut Prng,
) -> Result<(f64, f64), EvalError> {
    let units = params.num_visible() + params.num_hidden();
    if units <= rbm::DEFAULT_ENUMERATION_GUARD {
        Ok((rbm::exact_log_partition(params)?, 0.0))
    } else {
        let est = ais_log_partition(params, ais, rng)?;
        Ok((est.log_z, est.stderr))
    }
}

/// Evaluate one finished run: final metrics plus the smoothed trajectory
/// over its snapshots.
pub fn evaluate_trace(
    snapshots: &[(usize, RbmParams)],
    final_params: &RbmParams,
    spec: &SweepSpec,
    rng: &mut Prng,
) -> Result<EvalReport, EvalError> {
    let (log_z, log_z_stderr) = log_partition_any(final_params, &spec.ais, rng)?;
    let final_alp = avg_log_prob(final_params, &spec.data, log_z)?;

    let mut raw = Vec::with_capacity(snapshots.len());
    for (_, params) in snapshots {
        let (z, _) = log_partition_any(params, &spec.ais, rng)?;
        raw.push(avg_log_prob(params, &spec.data, z)?);
    }
    let smoothed = moving_average(&raw, spec.smoothing_window);
    let trajectory = snapshots
        .iter()
        .map(|(i, _)| *i)
        .zip(smoothed)
        .collect();

    let kl = match &spec.reference_table {
        Some(table)
            if final_params.num_visible() + final_params.num_hidden()
                <= rbm::DEFAULT_ENUMERATION_GUARD =>
        {
            let model = model_visible_distribution_guarded(
                final_params,
                rbm::DEFAULT_ENUMERATION_GUARD,
            )?;
            Some(kl_divergence(table, &model)?)
        }
        _ => None,
    };

    Ok(EvalReport {
        avg_log_prob: final_alp,
        log_z,
        log_z_stderr,
        kl,
        accuracy: None,
        trajectory,
    })
}

/// Train at every grid point and evaluate. Point seeds derive from a single
/// draw off `rng`, so reruns with the same entry state reproduce the table
/// regardless of worker count.
pub fn noise_sweep(
    grid: &[(f64, f64)],
    spec: &SweepSpec,
    rng: &mut Prng,
) -> Result<Vec<SweepPoint>, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidConfig("empty sweep grid".into()));
    }
    let master = rand::Rng::random::<u64>(rng);
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(index, &(variation_rms, noise_rms))| {
            let seed = rng::mix_seed(master, &[index as u64]);
            run_sweep_point(spec, variation_rms, noise_rms, seed)
        })
        .collect::<Result<_, _>>()?;
    Ok(points)
}

/// One grid point: a fresh device with the given nonideality levels.
pub fn run_sweep_point(
    spec: &SweepSpec,
    variation_rms: f64,
    noise_rms: f64,
    seed: u64,
) -> Result<SweepPoint, EvalError> {
    let hw_cfg = HwConfig {
        variation_rms,
        noise_rms,
        seed,
        ..spec.hw.clone()
    };
    let train_cfg = TrainConfig {
        seed,
        ..spec.train.clone()
    };
    let mut init_rng = rng::stream(seed, 0);
    let params = RbmParams::random_init(spec.data[0].len(), spec.hidden_units, 0.01, &mut init_rng);
    let trace = run_trainer(&params, &spec.data, &train_cfg, &hw_cfg)?;
    let mut eval_rng = rng::stream(seed, 1);
    let report = evaluate_trace(&trace.snapshots, &trace.final_params, spec, &mut eval_rng)?;
    Ok(SweepPoint {
        variation_rms,
        noise_rms,
        seed,
        report,
    })
}
