//! Exact restricted Boltzmann machine mathematics.
//!
//! Everything here is ground truth: the energy function, the two
//! conditionals, exact (enumerated) partition function, likelihood and
//! gradients, plus the bit/spin conversion layer. Units take values {0,1}
//! internally; the spin form is a conversion only.

use ndarray::{Array1, Array2};
use rand::Rng;
use thiserror::Error;

use crate::rng::Prng;

/// Enumeration is refused above this many total units unless a caller
/// supplies its own guard.
pub const DEFAULT_ENUMERATION_GUARD: usize = 24;

#[derive(Debug, Error)]
pub enum RbmError {
    #[error("visible dimension mismatch: model has {expected} visible units, input has {actual}")]
    VisibleDimension { expected: usize, actual: usize },
    #[error("hidden dimension mismatch: model has {expected} hidden units, input has {actual}")]
    HiddenDimension { expected: usize, actual: usize },
    #[error("probability {value} at index {index} is outside [0, 1]")]
    ProbabilityRange { index: usize, value: f64 },
    #[error("model has {units} units; enumeration guard allows at most {guard}")]
    EnumerationGuard { units: usize, guard: usize },
    #[error("empty dataset")]
    EmptyData,
    #[error("non-finite value in {location}")]
    NonFinite { location: &'static str },
    #[error("bit value {value} at index {index} is not 0 or 1")]
    NotABit { index: usize, value: u8 },
    #[error("spin value {value} at index {index} is not -1 or +1")]
    NotASpin { index: usize, value: i8 },
    #[error("model dimensions must be at least 1x1, got {visible}x{hidden}")]
    DegenerateShape { visible: usize, hidden: usize },
}

// ── Domain types ────────────────────────────────────────────────────────

/// Weights and biases of one RBM: `weights` is visible x hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    pub weights: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden_bias: Array1<f64>,
}

impl RbmParams {
    pub fn new(
        weights: Array2<f64>,
        visible_bias: Array1<f64>,
        hidden_bias: Array1<f64>,
    ) -> Result<Self, RbmError> {
        let (m, n) = weights.dim();
        if m == 0 || n == 0 {
            return Err(RbmError::DegenerateShape {
                visible: m,
                hidden: n,
            });
        }
        if visible_bias.len() != m {
            return Err(RbmError::VisibleDimension {
                expected: m,
                actual: visible_bias.len(),
            });
        }
        if hidden_bias.len() != n {
            return Err(RbmError::HiddenDimension {
                expected: n,
                actual: hidden_bias.len(),
            });
        }
        let params = Self {
            weights,
            visible_bias,
            hidden_bias,
        };
        params.check_finite()?;
        Ok(params)
    }

    pub fn zeros(visible: usize, hidden: usize) -> Self {
        Self {
            weights: Array2::zeros((visible, hidden)),
            visible_bias: Array1::zeros(visible),
            hidden_bias: Array1::zeros(hidden),
        }
    }

    /// Small-Gaussian weights, zero biases: the conventional training start.
    pub fn random_init(visible: usize, hidden: usize, weight_sd: f64, rng: &mut Prng) -> Self {
        let normal = rand_distr::Normal::new(0.0, weight_sd).expect("finite sd");
        let weights = Array2::from_shape_fn((visible, hidden), |_| rng.sample(normal));
        Self {
            weights,
            visible_bias: Array1::zeros(visible),
            hidden_bias: Array1::zeros(hidden),
        }
    }

    pub fn num_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn check_finite(&self) -> Result<(), RbmError> {
        if !self.weights.iter().all(|w| w.is_finite()) {
            return Err(RbmError::NonFinite {
                location: "weights",
            });
        }
        if !self.visible_bias.iter().all(|b| b.is_finite()) {
            return Err(RbmError::NonFinite {
                location: "visible bias",
            });
        }
        if !self.hidden_bias.iter().all(|b| b.is_finite()) {
            return Err(RbmError::NonFinite {
                location: "hidden bias",
            });
        }
        Ok(())
    }

    /// Copy with every entry clamped into `[lo, hi]`.
    pub fn clipped(&self, lo: f64, hi: f64) -> Self {
        Self {
            weights: self.weights.mapv(|w| w.clamp(lo, hi)),
            visible_bias: self.visible_bias.mapv(|b| b.clamp(lo, hi)),
            hidden_bias: self.hidden_bias.mapv(|b| b.clamp(lo, hi)),
        }
    }

    /// `self += alpha * grad` (gradients are ascent-direction).
    pub fn apply_gradient(&mut self, grad: &GradientEstimate, alpha: f64) {
        self.weights.scaled_add(alpha, &grad.d_weights);
        self.visible_bias.scaled_add(alpha, &grad.d_visible_bias);
        self.hidden_bias.scaled_add(alpha, &grad.d_hidden_bias);
    }
}

/// A fixed-length vector of {0,1} values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self, RbmError> {
        for (index, &value) in bits.iter().enumerate() {
            if value > 1 {
                return Err(RbmError::NotABit { index, value });
            }
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![0u8; len],
        }
    }

    pub fn ones(len: usize) -> Self {
        Self {
            bits: vec![1u8; len],
        }
    }

    /// Each bit set independently with probability 1/2.
    pub fn random(len: usize, rng: &mut Prng) -> Self {
        Self {
            bits: (0..len).map(|_| u8::from(rng.random::<bool>())).collect(),
        }
    }

    /// Decode `index` as a bit pattern; bit i of the index becomes element i.
    pub fn from_index(index: usize, len: usize) -> Self {
        Self {
            bits: (0..len).map(|i| ((index >> i) & 1) as u8).collect(),
        }
    }

    /// Inverse of [`BitVector::from_index`].
    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.bits[i] = u8::from(bit);
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// Indices of the bits that are 1.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
    }
}

/// A fixed-length vector of {-1,+1} spins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinVector {
    spins: Vec<i8>,
}

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self, RbmError> {
        for (index, &value) in spins.iter().enumerate() {
            if value != -1 && value != 1 {
                return Err(RbmError::NotASpin { index, value });
            }
        }
        Ok(Self { spins })
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.spins
    }
}

/// Ascent-direction gradient of the mean log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub d_weights: Array2<f64>,
    pub d_visible_bias: Array1<f64>,
    pub d_hidden_bias: Array1<f64>,
}

impl GradientEstimate {
    pub fn zeros(visible: usize, hidden: usize) -> Self {
        Self {
            d_weights: Array2::zeros((visible, hidden)),
            d_visible_bias: Array1::zeros(visible),
            d_hidden_bias: Array1::zeros(hidden),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.d_weights
            .iter()
            .chain(self.d_visible_bias.iter())
            .chain(self.d_hidden_bias.iter())
            .fold(0.0f64, |m, &g| m.max(g.abs()))
    }
}

// ── Scalar helpers ──────────────────────────────────────────────────────

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable log(1 + e^x).
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

// ── Activations and conditionals ────────────────────────────────────────

fn check_visible(params: &RbmParams, v: &BitVector) -> Result<(), RbmError> {
    if v.len() != params.num_visible() {
        return Err(RbmError::VisibleDimension {
            expected: params.num_visible(),
            actual: v.len(),
        });
    }
    Ok(())
}

fn check_hidden(params: &RbmParams, h: &BitVector) -> Result<(), RbmError> {
    if h.len() != params.num_hidden() {
        return Err(RbmError::HiddenDimension {
            expected: params.num_hidden(),
            actual: h.len(),
        });
    }
    Ok(())
}

/// Hidden-side pre-sigmoid inputs: `b_h + W^T v`.
///
/// Accumulates one weight row per set visible bit; the hardware model uses
/// the same traversal order so ideal configurations reproduce these values
/// bit for bit.
pub(crate) fn hidden_activation(params: &RbmParams, v: &BitVector) -> Array1<f64> {
    let mut act = params.hidden_bias.clone();
    for i in v.ones_iter() {
        act += &params.weights.row(i);
    }
    act
}

/// Hidden activation with weights and hidden biases scaled by `beta`.
pub(crate) fn scaled_hidden_activation(params: &RbmParams, v: &BitVector, beta: f64) -> Array1<f64> {
    let mut act = hidden_activation(params, v);
    act *= beta;
    act
}

/// Visible-side pre-sigmoid inputs: `b_v + W h`.
pub(crate) fn visible_activation(params: &RbmParams, h: &BitVector) -> Array1<f64> {
    let mut act = params.visible_bias.clone();
    for (i, a) in act.iter_mut().enumerate() {
        let row = params.weights.row(i);
        for j in h.ones_iter() {
            *a += row[j];
        }
    }
    act
}

/// P(h_j = 1 | v) for every hidden unit.
pub fn hidden_conditional(params: &RbmParams, v: &BitVector) -> Result<Array1<f64>, RbmError> {
    check_visible(params, v)?;
    Ok(hidden_activation(params, v).mapv(sigmoid))
}

/// P(v_i = 1 | h) for every visible unit.
pub fn visible_conditional(params: &RbmParams, h: &BitVector) -> Result<Array1<f64>, RbmError> {
    check_hidden(params, h)?;
    Ok(visible_activation(params, h).mapv(sigmoid))
}

/// Joint energy of a (visible, hidden) bit configuration.
pub fn energy(params: &RbmParams, v: &BitVector, h: &BitVector) -> Result<f64, RbmError> {
    check_visible(params, v)?;
    check_hidden(params, h)?;
    let mut e = 0.0;
    for i in v.ones_iter() {
        let row = params.weights.row(i);
        for j in h.ones_iter() {
            e -= row[j];
        }
        e -= params.visible_bias[i];
    }
    for j in h.ones_iter() {
        e -= params.hidden_bias[j];
    }
    Ok(e)
}

/// Draw one bit per probability; element i is 1 with probability `probs[i]`.
pub fn sample_bernoulli(probs: &Array1<f64>, rng: &mut Prng) -> Result<BitVector, RbmError> {
    for (index, &value) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(RbmError::ProbabilityRange { index, value });
        }
    }
    let bits = probs
        .iter()
        .map(|&p| u8::from(rng.random::<f64>() < p))
        .collect();
    Ok(BitVector { bits })
}

// ── Bit/spin conversion ─────────────────────────────────────────────────

/// sigma_i = 2 b_i - 1.
pub fn spins_from_bits(b: &BitVector) -> SpinVector {
    SpinVector {
        spins: b.bits.iter().map(|&bit| 2 * (bit as i8) - 1).collect(),
    }
}

/// b_i = (sigma_i + 1) / 2.
pub fn bits_from_spins(s: &SpinVector) -> BitVector {
    BitVector {
        bits: s.spins.iter().map(|&spin| ((spin + 1) / 2) as u8).collect(),
    }
}

/// The same model expressed over {-1,+1} spins: couplings, per-spin fields
/// and a constant offset such that the spin Hamiltonian plus offset equals
/// the bit-form energy for corresponding states.
#[derive(Debug, Clone)]
pub struct IsingForm {
    pub couplings: Array2<f64>,
    pub visible_field: Array1<f64>,
    pub hidden_field: Array1<f64>,
    pub offset: f64,
}

impl IsingForm {
    /// Spin Hamiltonian including the constant offset of the bit form.
    pub fn energy(&self, v: &SpinVector, h: &SpinVector) -> f64 {
        let mut e = self.offset;
        for (i, &sv) in v.spins.iter().enumerate() {
            let row = self.couplings.row(i);
            for (j, &sh) in h.spins.iter().enumerate() {
                e -= row[j] * (sv as f64) * (sh as f64);
            }
            e -= self.visible_field[i] * (sv as f64);
        }
        for (j, &sh) in h.spins.iter().enumerate() {
            e -= self.hidden_field[j] * (sh as f64);
        }
        e
    }
}

/// Affine parameter transform induced by sigma = 2b - 1.
pub fn ising_form(params: &RbmParams) -> IsingForm {
    let m = params.num_visible();
    let n = params.num_hidden();
    let couplings = params.weights.mapv(|w| w / 4.0);
    let mut visible_field = Array1::zeros(m);
    for i in 0..m {
        visible_field[i] = params.weights.row(i).sum() / 4.0 + params.visible_bias[i] / 2.0;
    }
    let mut hidden_field = Array1::zeros(n);
    for j in 0..n {
        hidden_field[j] = params.weights.column(j).sum() / 4.0 + params.hidden_bias[j] / 2.0;
    }
    let offset = -(params.weights.sum() / 4.0
        + params.visible_bias.sum() / 2.0
        + params.hidden_bias.sum() / 2.0);
    IsingForm {
        couplings,
        visible_field,
        hidden_field,
        offset,
    }
}

// ── Exact enumeration ───────────────────────────────────────────────────

fn check_guard(params: &RbmParams, guard: usize) -> Result<(), RbmError> {
    let units = params.num_visible() + params.num_hidden();
    if units > guard {
        return Err(RbmError::EnumerationGuard { units, guard });
    }
    Ok(())
}

/// Walk all 2^M visible states in Gray-code order, maintaining the hidden
/// activations and the visible-bias dot product incrementally. The closure
/// sees each state's bits, activations and `b_v . v`.
fn enumerate_visible<F>(params: &RbmParams, mut f: F)
where
    F: FnMut(&BitVector, &Array1<f64>, f64),
{
    let m = params.num_visible();
    let mut v = BitVector::zeros(m);
    let mut act = params.hidden_bias.clone();
    let mut bias_dot = 0.0;
    f(&v, &act, bias_dot);
    let total = 1usize << m;
    for counter in 1..total {
        let flip = counter.trailing_zeros() as usize;
        let turned_on = !v.is_set(flip);
        v.set(flip, turned_on);
        let sign = if turned_on { 1.0 } else { -1.0 };
        let row = params.weights.row(flip);
        for (a, &w) in act.iter_mut().zip(row.iter()) {
            *a += sign * w;
        }
        bias_dot += sign * params.visible_bias[flip];
        f(&v, &act, bias_dot);
    }
}

/// log of the unnormalized visible marginal: log sum_h e^{-E(v, h)}.
pub fn log_unnorm_marginal(params: &RbmParams, v: &BitVector) -> Result<f64, RbmError> {
    check_visible(params, v)?;
    let act = hidden_activation(params, v);
    let bias_dot: f64 = v.ones_iter().map(|i| params.visible_bias[i]).sum();
    Ok(bias_dot + act.iter().map(|&a| softplus(a)).sum::<f64>())
}

/// log Z by exact enumeration with the hidden sum taken analytically,
/// so only the 2^M visible states are visited.
pub fn exact_log_partition(params: &RbmParams) -> Result<f64, RbmError> {
    exact_log_partition_guarded(params, DEFAULT_ENUMERATION_GUARD)
}

pub fn exact_log_partition_guarded(params: &RbmParams, guard: usize) -> Result<f64, RbmError> {
    check_guard(params, guard)?;
    // Streaming log-sum-exp keeps the accumulation stable for large |W|.
    let mut max_term = f64::NEG_INFINITY;
    let mut scaled_sum = 0.0f64;
    enumerate_visible(params, |_, act, bias_dot| {
        let term = bias_dot + act.iter().map(|&a| softplus(a)).sum::<f64>();
        if term > max_term {
            scaled_sum = scaled_sum * (max_term - term).exp() + 1.0;
            max_term = term;
        } else {
            scaled_sum += (term - max_term).exp();
        }
    });
    Ok(max_term + scaled_sum.ln())
}

/// Total log-likelihood of `data` under the model.
pub fn exact_log_likelihood(params: &RbmParams, data: &[BitVector]) -> Result<f64, RbmError> {
    exact_log_likelihood_guarded(params, data, DEFAULT_ENUMERATION_GUARD)
}

pub fn exact_log_likelihood_guarded(
    params: &RbmParams,
    data: &[BitVector],
    guard: usize,
) -> Result<f64, RbmError> {
    if data.is_empty() {
        return Err(RbmError::EmptyData);
    }
    let log_z = exact_log_partition_guarded(params, guard)?;
    let mut total = 0.0;
    for v in data {
        total += log_unnorm_marginal(params, v)? - log_z;
    }
    Ok(total)
}

/// Exact ascent-direction gradient of the mean log-likelihood: the data
/// expectation minus the fully enumerated model expectation.
pub fn exact_gradient(params: &RbmParams, data: &[BitVector]) -> Result<GradientEstimate, RbmError> {
    exact_gradient_guarded(params, data, DEFAULT_ENUMERATION_GUARD)
}

pub fn exact_gradient_guarded(
    params: &RbmParams,
    data: &[BitVector],
    guard: usize,
) -> Result<GradientEstimate, RbmError> {
    check_guard(params, guard)?;
    if data.is_empty() {
        return Err(RbmError::EmptyData);
    }
    let m = params.num_visible();
    let n = params.num_hidden();
    let mut grad = GradientEstimate::zeros(m, n);

    // Data term: v_i averaged against P(h_j = 1 | v).
    for v in data {
        check_visible(params, v)?;
        let probs = hidden_activation(params, v).mapv(sigmoid);
        for i in v.ones_iter() {
            let mut row = grad.d_weights.row_mut(i);
            row += &probs;
            grad.d_visible_bias[i] += 1.0;
        }
        grad.d_hidden_bias += &probs;
    }
    let scale = 1.0 / data.len() as f64;
    grad.d_weights *= scale;
    grad.d_visible_bias *= scale;
    grad.d_hidden_bias *= scale;

    // Model term from enumeration over all visible states.
    let log_z = exact_log_partition_guarded(params, guard)?;
    enumerate_visible(params, |v, act, bias_dot| {
        let log_p = bias_dot + act.iter().map(|&a| softplus(a)).sum::<f64>() - log_z;
        let p = log_p.exp();
        let probs = act.mapv(sigmoid);
        for i in v.ones_iter() {
            let mut row = grad.d_weights.row_mut(i);
            row.scaled_add(-p, &probs);
            grad.d_visible_bias[i] -= p;
        }
        grad.d_hidden_bias.scaled_add(-p, &probs);
    });
    Ok(grad)
}
