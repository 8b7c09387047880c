//! Multinomial logistic regression head over RBM hidden features.

use ndarray::{Array1, Array2, Axis};

use super::EvalError;
use crate::rbm::{self, BitVector, RbmParams};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticHead {
    /// classes x features.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Hidden-unit activation probabilities for every sample, row per sample.
pub fn hidden_features(params: &RbmParams, data: &[BitVector]) -> Result<Array2<f64>, EvalError> {
    let n = params.num_hidden();
    let mut features = Array2::zeros((data.len(), n));
    for (row, v) in data.iter().enumerate() {
        let probs = rbm::hidden_conditional(params, v)?;
        features.row_mut(row).assign(&probs);
    }
    Ok(features)
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
}

/// Mean cross-entropy plus the L2 penalty.
fn loss(head: &LogisticHead, features: &Array2<f64>, labels: &[usize], reg: f64) -> f64 {
    let mut logits = features.dot(&head.weights.t());
    logits += &head.bias;
    softmax_rows(&mut logits);
    let mut nll = 0.0;
    for (row, &label) in labels.iter().enumerate() {
        nll -= logits[[row, label]].max(1e-300).ln();
    }
    nll / labels.len() as f64 + 0.5 * reg * head.weights.iter().map(|w| w * w).sum::<f64>()
}

/// Fit by full-batch gradient descent, returning the head and the loss after
/// each step.
pub fn classifier_head_train_traced(
    features: &Array2<f64>,
    labels: &[usize],
    reg: f64,
    learning_rate: f64,
    epochs: usize,
) -> Result<(LogisticHead, Vec<f64>), EvalError> {
    let samples = features.nrows();
    if labels.len() != samples {
        return Err(EvalError::LabelCount {
            rows: samples,
            labels: labels.len(),
        });
    }
    if samples == 0 {
        return Err(EvalError::Rbm(rbm::RbmError::EmptyData));
    }
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let distinct = {
        let mut seen = vec![false; classes];
        for &l in labels {
            seen[l] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(EvalError::DegenerateClasses(distinct));
    }

    let n_features = features.ncols();
    let mut head = LogisticHead {
        weights: Array2::zeros((classes, n_features)),
        bias: Array1::zeros(classes),
    };
    let mut losses = Vec::with_capacity(epochs);
    let scale = 1.0 / samples as f64;
    for _ in 0..epochs {
        let mut probs = features.dot(&head.weights.t());
        probs += &head.bias;
        softmax_rows(&mut probs);
        // residual = P - onehot(labels)
        for (row, &label) in labels.iter().enumerate() {
            probs[[row, label]] -= 1.0;
        }
        let mut grad_w = probs.t().dot(features);
        grad_w *= scale;
        grad_w.scaled_add(reg, &head.weights);
        let grad_b = probs.sum_axis(Axis(0)) * scale;
        head.weights.scaled_add(-learning_rate, &grad_w);
        head.bias.scaled_add(-learning_rate, &grad_b);
        losses.push(loss(&head, features, labels, reg));
    }
    Ok((head, losses))
}

/// Fit with the default descent schedule.
pub fn classifier_head_train(
    features: &Array2<f64>,
    labels: &[usize],
    reg: f64,
) -> Result<LogisticHead, EvalError> {
    classifier_head_train_traced(features, labels, reg, 0.5, 400).map(|(head, _)| head)
}

/// Fraction of samples whose argmax class matches the label.
pub fn classifier_accuracy(head: &LogisticHead, features: &Array2<f64>, labels: &[usize]) -> f64 {
    let mut logits = features.dot(&head.weights.t());
    logits += &head.bias;
    let mut correct = 0usize;
    for (row, &label) in labels.iter().enumerate() {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (c, &x) in logits.row(row).iter().enumerate() {
            if x > best_val {
                best_val = x;
                best = c;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    correct as f64 / labels.len().max(1) as f64
}
