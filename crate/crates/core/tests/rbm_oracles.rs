//! Ground-truth checks for the exact RBM mathematics: brute-force
//! enumeration over the full joint state space, central finite differences,
//! and sampling statistics.

use ising_rbm::rbm::{
    self, energy, exact_gradient, exact_log_likelihood, exact_log_partition,
    exact_log_partition_guarded, hidden_conditional, log_unnorm_marginal, sample_bernoulli,
    BitVector, RbmParams,
};
use ising_rbm::rng;

/// Brute force over all 2^(M+N) joint states, using only `energy`.
fn brute_force_log_partition(params: &RbmParams) -> f64 {
    let m = params.num_visible();
    let n = params.num_hidden();
    let mut terms = Vec::with_capacity(1 << (m + n));
    for vi in 0..1usize << m {
        let v = BitVector::from_index(vi, m);
        for hi in 0..1usize << n {
            let h = BitVector::from_index(hi, n);
            terms.push(-energy(params, &v, &h).unwrap());
        }
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn random_model(m: usize, n: usize, scale: f64, seed: u64) -> RbmParams {
    let mut r = rng::stream(seed, 0);
    let mut params = RbmParams::random_init(m, n, scale, &mut r);
    // Give the biases some life too.
    let mut r2 = rng::stream(seed, 1);
    params.visible_bias = ndarray::Array1::from_shape_fn(m, |_| {
        rand::Rng::random_range(&mut r2, -1.0..1.0)
    });
    params.hidden_bias = ndarray::Array1::from_shape_fn(n, |_| {
        rand::Rng::random_range(&mut r2, -1.0..1.0)
    });
    params
}

#[test]
fn analytic_hidden_sum_matches_brute_force_enumeration() {
    for seed in 0..5 {
        let params = random_model(4, 3, 1.0, seed);
        let analytic = exact_log_partition(&params).unwrap();
        let brute = brute_force_log_partition(&params);
        assert!(
            (analytic - brute).abs() < 1e-10,
            "seed {seed}: {analytic} vs {brute}"
        );
    }
}

#[test]
fn log_likelihood_matches_normalized_visible_enumeration() {
    let params = random_model(4, 3, 0.8, 11);
    let log_z = brute_force_log_partition(&params);
    let mut r = rng::stream(12, 0);
    let data: Vec<BitVector> = (0..16).map(|_| BitVector::random(4, &mut r)).collect();

    // P(v) by brute-force marginalization over h.
    let mut expected = 0.0;
    for v in &data {
        let mut terms = Vec::new();
        for hi in 0..1usize << 3 {
            let h = BitVector::from_index(hi, 3);
            terms.push(-energy(&params, v, &h).unwrap());
        }
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_marg = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
        expected += log_marg - log_z;
    }
    let actual = exact_log_likelihood(&params, &data).unwrap();
    assert!((actual - expected).abs() < 1e-10, "{actual} vs {expected}");
}

#[test]
fn probability_normalization_over_the_joint_space() {
    let params = random_model(4, 3, 1.2, 21);
    let log_z = exact_log_partition(&params).unwrap();
    let mut total = 0.0;
    for vi in 0..1usize << 4 {
        let v = BitVector::from_index(vi, 4);
        for hi in 0..1usize << 3 {
            let h = BitVector::from_index(hi, 3);
            total += (-energy(&params, &v, &h).unwrap() - log_z).exp();
        }
    }
    assert!((total - 1.0).abs() < 1e-10, "total probability {total}");
}

#[test]
fn gradient_matches_central_finite_differences() {
    let eps = 1e-5;
    let params = random_model(6, 3, 0.6, 31);
    let mut r = rng::stream(32, 0);
    let data: Vec<BitVector> = (0..20).map(|_| BitVector::random(6, &mut r)).collect();
    let grad = exact_gradient(&params, &data).unwrap();
    let t = data.len() as f64;

    let mut max_rel = 0.0f64;
    let mut check = |analytic: f64, perturb: &mut dyn FnMut(&mut RbmParams, f64)| {
        let mut plus = params.clone();
        perturb(&mut plus, eps);
        let mut minus = params.clone();
        perturb(&mut minus, -eps);
        let numeric = (exact_log_likelihood(&plus, &data).unwrap()
            - exact_log_likelihood(&minus, &data).unwrap())
            / (2.0 * eps * t);
        let rel = (analytic - numeric).abs() / numeric.abs().max(1e-8);
        max_rel = max_rel.max(rel);
    };

    for i in 0..6 {
        for j in 0..3 {
            check(grad.d_weights[[i, j]], &mut |p, e| p.weights[[i, j]] += e);
        }
    }
    for i in 0..6 {
        check(grad.d_visible_bias[i], &mut |p, e| p.visible_bias[i] += e);
    }
    for j in 0..3 {
        check(grad.d_hidden_bias[j], &mut |p, e| p.hidden_bias[j] += e);
    }
    assert!(max_rel < 1e-6, "max relative error {max_rel}");
}

#[test]
fn gradient_vanishes_at_a_fitted_stationary_point() {
    // Fit a full-capacity 3x2 model to a full-support dataset by long exact
    // ascent; at the optimum the data distribution equals the model marginal
    // and the gradient must vanish.
    let counts = [3usize, 2, 1, 1, 1, 2, 1, 1];
    let mut data = Vec::new();
    for (index, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            data.push(BitVector::from_index(index, 3));
        }
    }
    let mut params = random_model(3, 2, 0.1, 41);
    for _ in 0..20_000 {
        let grad = exact_gradient(&params, &data).unwrap();
        params.apply_gradient(&grad, 1.0);
    }
    let grad = exact_gradient(&params, &data).unwrap();
    assert!(
        grad.max_abs() < 1e-3,
        "gradient {} at fitted point",
        grad.max_abs()
    );
}

#[test]
fn partition_stays_finite_for_extreme_weights() {
    for scale in [10.0, 30.0, 50.0] {
        let mut params = random_model(6, 4, 1.0, 51);
        params.weights.mapv_inplace(|w| w.signum() * scale);
        let log_z = exact_log_partition(&params).unwrap();
        assert!(log_z.is_finite(), "log Z not finite at |W| = {scale}");
    }
    // Guard override works for wider models.
    let params = RbmParams::zeros(20, 5);
    let log_z = exact_log_partition_guarded(&params, 25).unwrap();
    assert!((log_z - 25.0 * 2.0f64.ln()).abs() < 1e-9);
}

#[test]
fn sampled_hidden_frequencies_match_conditionals() {
    let params = random_model(4, 3, 0.9, 61);
    let v = BitVector::new(vec![1, 0, 1, 1]).unwrap();
    let probs = hidden_conditional(&params, &v).unwrap();
    let mut r = rng::stream(62, 0);
    let trials = 100_000usize;
    let mut counts = [0usize; 3];
    for _ in 0..trials {
        let h = sample_bernoulli(&probs, &mut r).unwrap();
        for j in h.ones_iter() {
            counts[j] += 1;
        }
    }
    for j in 0..3 {
        let freq = counts[j] as f64 / trials as f64;
        let se = (probs[j] * (1.0 - probs[j]) / trials as f64).sqrt();
        assert!(
            (freq - probs[j]).abs() <= 3.0 * se,
            "unit {j}: freq {freq} vs p {} (se {se})",
            probs[j]
        );
    }
}

#[test]
fn bernoulli_mean_concentrates() {
    let probs = ndarray::Array1::from_elem(8, 0.5);
    let mut r = rng::stream(71, 0);
    let trials = 100_000usize;
    let mut total = 0usize;
    for _ in 0..trials {
        total += sample_bernoulli(&probs, &mut r).unwrap().ones_iter().count();
    }
    let mean = total as f64 / (trials * 8) as f64;
    assert!((0.49..=0.51).contains(&mean), "mean {mean}");
}

#[test]
fn marginal_identity_links_energy_and_partition() {
    // log sum_h e^{-E(v, h)} computed directly must match the analytic form
    // used everywhere else.
    let params = random_model(5, 3, 1.1, 81);
    for vi in 0..1usize << 5 {
        let v = BitVector::from_index(vi, 5);
        let mut terms = Vec::new();
        for hi in 0..1usize << 3 {
            let h = BitVector::from_index(hi, 3);
            terms.push(-energy(&params, &v, &h).unwrap());
        }
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let brute = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
        let analytic = log_unnorm_marginal(&params, &v).unwrap();
        assert!((brute - analytic).abs() < 1e-10);
    }
}

#[test]
fn guard_is_reported_with_sizes() {
    let params = RbmParams::zeros(22, 3);
    let err = exact_log_partition(&params).unwrap_err();
    assert!(matches!(
        err,
        rbm::RbmError::EnumerationGuard { units: 25, guard: 24 }
    ));
}
