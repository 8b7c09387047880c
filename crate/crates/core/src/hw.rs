//! Behavioral model of the analog substrate.
//!
//! Nodes carry a tunable sigmoid circuit and a comparator fed with a random
//! voltage; couplers carry a programmable conductance with fabrication-time
//! gain variation and an in-place charge-pump adjustment circuit. Dynamic
//! noise is injected per pass as additive Gaussian on each target unit's
//! activation, scaled relative to the RMS of that pass's noiseless
//! activations. With every nonideality zeroed the operations here reduce
//! exactly to their software counterparts in [`crate::rbm`].

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rbm::{self, BitVector, RbmParams};
use crate::rng::{self, Prng};

/// Fabrication-time randomness (static gains) is drawn from this stream of
/// the config seed, so one seed identifies one physical device.
const FABRICATION_STREAM: u64 = 0xFAB;

#[derive(Debug, Error)]
pub enum HwError {
    #[error("clamped vector has {actual} units, pass source side has {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("particle index {index} out of range (p = {count})")]
    ParticleIndex { index: usize, count: usize },
    #[error("invalid hardware config: {reason}")]
    InvalidConfig { reason: String },
    #[error(transparent)]
    Rbm(#[from] rbm::RbmError),
}

/// How the in-place weight adjustment behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpMode {
    /// Charge redistribution: step size shrinks linearly with the headroom
    /// to the approached rail.
    ChargeRedistribution,
    /// Idealized adjustment: fixed step, clipped at the rails.
    LinearClip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpDirection {
    Increment,
    Decrement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassDirection {
    VisibleToHidden,
    HiddenToVisible,
}

/// All analog nonideality parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HwConfig {
    /// Static coupler gain spread (RMS, fraction of nominal).
    pub variation_rms: f64,
    /// Dynamic per-pass activation noise (RMS, fraction of activation scale).
    pub noise_rms: f64,
    /// Sigmoid circuit gain c1.
    pub sigmoid_gain: f64,
    /// Sigmoid circuit offset c2.
    pub sigmoid_offset: f64,
    /// Per-node spread of the sigmoid gain (RMS, fraction).
    pub gain_variation_rms: f64,
    /// Weight rails.
    pub w_min: f64,
    pub w_max: f64,
    /// Nominal per-event weight increment magnitude.
    pub pump_step: f64,
    pub pump_mode: PumpMode,
    /// ADC resolution for readout; 0 reads exact values.
    pub readout_bits: u8,
    /// Starting temperature of the anneal ladder; 1.0 is a flat schedule.
    pub anneal_t_start: f64,
    /// Device identity; fixes the fabrication-time variation draw.
    pub seed: u64,
}

impl Default for HwConfig {
    fn default() -> Self {
        Self {
            variation_rms: 0.0,
            noise_rms: 0.0,
            sigmoid_gain: 1.0,
            sigmoid_offset: 0.0,
            gain_variation_rms: 0.0,
            w_min: -6.0,
            w_max: 6.0,
            pump_step: 0.01,
            pump_mode: PumpMode::ChargeRedistribution,
            readout_bits: 8,
            anneal_t_start: 2.0,
            seed: 0,
        }
    }
}

impl HwConfig {
    /// Nonideality-free configuration under which every operation is
    /// distribution-identical to its software counterpart: no variation or
    /// noise, unit sigmoid, rails too wide to clip, exact readout, flat
    /// anneal schedule, clipped-identity pump.
    pub fn ideal() -> Self {
        Self {
            variation_rms: 0.0,
            noise_rms: 0.0,
            sigmoid_gain: 1.0,
            sigmoid_offset: 0.0,
            gain_variation_rms: 0.0,
            w_min: -1e300,
            w_max: 1e300,
            pump_step: 0.01,
            pump_mode: PumpMode::LinearClip,
            readout_bits: 0,
            anneal_t_start: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), HwError> {
        let fail = |reason: String| Err(HwError::InvalidConfig { reason });
        if !(self.variation_rms >= 0.0) {
            return fail(format!("variation_rms {} must be >= 0", self.variation_rms));
        }
        if !(self.noise_rms >= 0.0) {
            return fail(format!("noise_rms {} must be >= 0", self.noise_rms));
        }
        if !(self.gain_variation_rms >= 0.0) {
            return fail(format!(
                "gain_variation_rms {} must be >= 0",
                self.gain_variation_rms
            ));
        }
        if !(self.w_min < self.w_max) {
            return fail(format!(
                "weight rails must satisfy w_min < w_max, got [{}, {}]",
                self.w_min, self.w_max
            ));
        }
        if !(self.pump_step > 0.0) {
            return fail(format!("pump_step {} must be > 0", self.pump_step));
        }
        if self.readout_bits > 16 {
            return fail(format!("readout_bits {} must be <= 16", self.readout_bits));
        }
        if !(self.anneal_t_start >= 1.0) {
            return fail(format!(
                "anneal_t_start {} must be >= 1",
                self.anneal_t_start
            ));
        }
        Ok(())
    }
}

/// The in-substrate mutable model: effective (clipped) parameters, the
/// device's static gain factors, and the persistent hidden-state particles.
#[derive(Debug, Clone, PartialEq)]
pub struct HwState {
    params: RbmParams,
    static_gain: Array2<f64>,
    visible_node_gain: Array1<f64>,
    hidden_node_gain: Array1<f64>,
    particles: Vec<BitVector>,
}

impl HwState {
    /// Program initial parameters and draw the device's static variation.
    ///
    /// Static gains come from the config seed (they belong to the device);
    /// the particle initial conditions come from the caller's stream.
    pub fn init(
        params: &RbmParams,
        cfg: &HwConfig,
        particle_count: usize,
        rng: &mut Prng,
    ) -> Result<Self, HwError> {
        cfg.validate()?;
        if particle_count == 0 {
            return Err(HwError::InvalidConfig {
                reason: "particle count must be >= 1".into(),
            });
        }
        params.check_finite()?;
        let m = params.num_visible();
        let n = params.num_hidden();
        let mut fab = rng::stream(cfg.seed, FABRICATION_STREAM);
        let coupler_gain = |rng: &mut Prng, rms: f64| -> f64 {
            let z: f64 = rng.sample(StandardNormal);
            (1.0 + rms * z).max(0.05)
        };
        let static_gain =
            Array2::from_shape_fn((m, n), |_| coupler_gain(&mut fab, cfg.variation_rms));
        let visible_node_gain =
            Array1::from_shape_fn(m, |_| coupler_gain(&mut fab, cfg.gain_variation_rms));
        let hidden_node_gain =
            Array1::from_shape_fn(n, |_| coupler_gain(&mut fab, cfg.gain_variation_rms));
        let particles = (0..particle_count)
            .map(|_| BitVector::random(n, rng))
            .collect();
        Ok(Self {
            params: params.clipped(cfg.w_min, cfg.w_max),
            static_gain,
            visible_node_gain,
            hidden_node_gain,
            particles,
        })
    }

    /// Reprogram the coupling matrix and biases (fresh clipping); the
    /// device's static gains and the particles are untouched.
    pub fn program(&mut self, params: &RbmParams, cfg: &HwConfig) -> Result<(), HwError> {
        params.check_finite()?;
        if params.num_visible() != self.num_visible() || params.num_hidden() != self.num_hidden() {
            return Err(HwError::InvalidConfig {
                reason: format!(
                    "cannot program a {}x{} model into a {}x{} device",
                    params.num_visible(),
                    params.num_hidden(),
                    self.num_visible(),
                    self.num_hidden()
                ),
            });
        }
        self.params = params.clipped(cfg.w_min, cfg.w_max);
        Ok(())
    }

    pub fn num_visible(&self) -> usize {
        self.params.num_visible()
    }

    pub fn num_hidden(&self) -> usize {
        self.params.num_hidden()
    }

    pub fn particle_count(&self) -> usize {
        self.particles.len()
    }

    pub fn particle(&self, index: usize) -> &BitVector {
        &self.particles[index]
    }

    pub fn set_particle(&mut self, index: usize, h: BitVector) {
        self.particles[index] = h;
    }

    pub fn static_gain(&self) -> &Array2<f64> {
        &self.static_gain
    }

    /// Effective in-substrate parameters, without readout quantization.
    pub fn params(&self) -> &RbmParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut RbmParams {
        &mut self.params
    }

    /// Noiseless activations a target unit sees for a clamped source side.
    fn activations(&self, clamped: &BitVector, direction: PassDirection) -> Vec<f64> {
        match direction {
            PassDirection::VisibleToHidden => {
                let mut act: Vec<f64> = self.params.hidden_bias.to_vec();
                for i in clamped.ones_iter() {
                    let w_row = self.params.weights.row(i);
                    let g_row = self.static_gain.row(i);
                    for (a, (&w, &g)) in act.iter_mut().zip(w_row.iter().zip(g_row.iter())) {
                        *a += w * g;
                    }
                }
                act
            }
            PassDirection::HiddenToVisible => {
                let mut act: Vec<f64> = self.params.visible_bias.to_vec();
                for (i, a) in act.iter_mut().enumerate() {
                    let w_row = self.params.weights.row(i);
                    let g_row = self.static_gain.row(i);
                    for j in clamped.ones_iter() {
                        *a += w_row[j] * g_row[j];
                    }
                }
                act
            }
        }
    }

    /// One hardware sampling pass at unit temperature.
    pub fn sample_pass(
        &self,
        clamped: &BitVector,
        direction: PassDirection,
        cfg: &HwConfig,
        rng: &mut Prng,
    ) -> Result<BitVector, HwError> {
        self.sample_pass_tempered(clamped, direction, 1.0, cfg, rng)
    }

    /// One hardware sampling pass with the sigmoid gain scaled by
    /// `gain_multiplier` (the anneal ladder passes 1/T here).
    pub fn sample_pass_tempered(
        &self,
        clamped: &BitVector,
        direction: PassDirection,
        gain_multiplier: f64,
        cfg: &HwConfig,
        rng: &mut Prng,
    ) -> Result<BitVector, HwError> {
        let acts = self.pass_activations(clamped, direction, cfg, rng)?;
        let node_gain = match direction {
            PassDirection::VisibleToHidden => &self.hidden_node_gain,
            PassDirection::HiddenToVisible => &self.visible_node_gain,
        };
        let mut bits = BitVector::zeros(acts.len());
        for (u, &a) in acts.iter().enumerate() {
            let p = sigmoid(a, node_gain[u] * gain_multiplier, cfg);
            bits.set(u, rng.random::<f64>() < p);
        }
        Ok(bits)
    }

    /// Per-unit activations of one pass with dynamic noise applied; exposed
    /// so the injected noise distribution itself can be inspected.
    pub fn pass_activations(
        &self,
        clamped: &BitVector,
        direction: PassDirection,
        cfg: &HwConfig,
        rng: &mut Prng,
    ) -> Result<Vec<f64>, HwError> {
        let expected = match direction {
            PassDirection::VisibleToHidden => self.num_visible(),
            PassDirection::HiddenToVisible => self.num_hidden(),
        };
        if clamped.len() != expected {
            return Err(HwError::Dimension {
                expected,
                actual: clamped.len(),
            });
        }
        let mut acts = self.activations(clamped, direction);
        if cfg.noise_rms > 0.0 {
            let scale = activation_scale(&acts);
            let sd = cfg.noise_rms * scale;
            for a in acts.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *a += sd * z;
            }
        }
        Ok(acts)
    }

    /// Load a particle, run `n_passes` alternating pass pairs down the
    /// anneal ladder, store the final hidden state back into the particle
    /// slot and return the final sample.
    pub fn anneal_run(
        &mut self,
        particle_index: usize,
        n_passes: usize,
        cfg: &HwConfig,
        rng: &mut Prng,
    ) -> Result<(BitVector, BitVector), HwError> {
        if particle_index >= self.particles.len() {
            return Err(HwError::ParticleIndex {
                index: particle_index,
                count: self.particles.len(),
            });
        }
        if n_passes == 0 {
            return Err(HwError::InvalidConfig {
                reason: "anneal run needs at least one pass".into(),
            });
        }
        let mut h = self.particles[particle_index].clone();
        let mut v = BitVector::zeros(self.num_visible());
        for pass in 0..n_passes {
            let gain = 1.0 / anneal_temperature(cfg.anneal_t_start, pass, n_passes);
            v = self.sample_pass_tempered(&h, PassDirection::HiddenToVisible, gain, cfg, rng)?;
            h = self.sample_pass_tempered(&v, PassDirection::VisibleToHidden, gain, cfg, rng)?;
        }
        self.particles[particle_index] = h.clone();
        Ok((v, h))
    }

    /// Read the trained parameters out through the ADCs.
    pub fn readout(&self, cfg: &HwConfig) -> RbmParams {
        if cfg.readout_bits == 0 {
            return self.params.clone();
        }
        let q = |w: f64| quantize(w, cfg.w_min, cfg.w_max, cfg.readout_bits);
        RbmParams {
            weights: self.params.weights.mapv(q),
            visible_bias: self.params.visible_bias.mapv(q),
            hidden_bias: self.params.hidden_bias.mapv(q),
        }
    }
}

/// Geometric ladder from `t_start` down to 1.0 across `n_passes` passes.
pub fn anneal_temperature(t_start: f64, pass: usize, n_passes: usize) -> f64 {
    if n_passes <= 1 || t_start <= 1.0 {
        return 1.0;
    }
    let frac = pass as f64 / (n_passes - 1) as f64;
    t_start.powf(1.0 - frac)
}

/// The sigmoid circuit transfer function: 1 / (1 + e^{-c1 g (x - c2)}).
pub fn sigmoid(x: f64, gain: f64, cfg: &HwConfig) -> f64 {
    rbm::sigmoid(cfg.sigmoid_gain * gain * (x - cfg.sigmoid_offset))
}

/// RMS of a pass's noiseless activations; the reference scale for dynamic
/// noise injection.
pub fn activation_scale(acts: &[f64]) -> f64 {
    if acts.is_empty() {
        return 0.0;
    }
    (acts.iter().map(|a| a * a).sum::<f64>() / acts.len() as f64).sqrt()
}

/// One in-place weight adjustment event.
///
/// In charge-redistribution mode the step is `gain * magnitude` scaled by
/// the fraction of headroom left toward the approached rail, so repeated
/// events converge on the rail without crossing it.
pub fn charge_pump_update(
    w: f64,
    direction: PumpDirection,
    magnitude: f64,
    gain: f64,
    cfg: &HwConfig,
) -> f64 {
    debug_assert!(magnitude >= 0.0 && gain >= 0.0);
    match cfg.pump_mode {
        PumpMode::ChargeRedistribution => {
            let fraction = (gain * magnitude / (cfg.w_max - cfg.w_min)).min(1.0);
            match direction {
                PumpDirection::Increment => w + fraction * (cfg.w_max - w),
                PumpDirection::Decrement => w - fraction * (w - cfg.w_min),
            }
        }
        PumpMode::LinearClip => {
            let step = gain * magnitude;
            match direction {
                PumpDirection::Increment => (w + step).min(cfg.w_max),
                PumpDirection::Decrement => (w - step).max(cfg.w_min),
            }
        }
    }
}

/// Round-to-nearest onto 2^bits levels spanning the rails inclusively.
fn quantize(w: f64, w_min: f64, w_max: f64, bits: u8) -> f64 {
    let levels = (1u32 << bits) as f64;
    let step = (w_max - w_min) / (levels - 1.0);
    let level = ((w - w_min) / step).round().clamp(0.0, levels - 1.0);
    w_min + level * step
}
