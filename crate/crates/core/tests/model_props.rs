mod common;

use common::random_complex;
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplex_influence::centrality::{node_features, simplex_features, standardize, FeatureMatrix, NodeMetric};
use simplex_influence::diffusion::{epidemic_threshold, generate_labels, Contagion, DiffusionParams};
use simplex_influence::evaluation::{kendall_tau, truth_pairs, RankPair};
use simplex_influence::hoh::{HohOperator, HohOperators};
use simplex_influence::model::*;
use simplex_influence::{CsrMatrix, InfluenceScores, SimplicialComplex};

fn random_features(n: usize, d: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    FeatureMatrix {
        names: (0..d).map(|i| format!("x{i}")).collect(),
        values: Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0)),
    }
}

/// A 10-node complex with non-empty edge and triangle layers.
fn toy_complex() -> SimplicialComplex {
    (0..)
        .filter_map(|seed| random_complex(10, 0.5, 2, seed))
        .find(|c| c.node_count() == 10 && c.count(2).unwrap_or(0) > 0)
        .unwrap()
}

fn loss_at(ops: &HohOperators, x: &FeatureMatrix, p: &ModelParams, pairs: &[RankPair]) -> f64 {
    ranking_loss(&forward(ops, x, p).unwrap().values, pairs)
}

#[test]
fn gradients_match_central_differences() {
    let c = toy_complex();
    let ops = HohOperators::build(&c, 0, &[1, 2]).unwrap();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_features(10, 4, &mut rng);
        let mut p = ModelParams::init(Layout::new(4, 16, 8, 3, vec![1, 2]), &mut rng);
        for q in 0..2 {
            p.omega_mut(q).mapv_inplace(|_| rng.gen_range(-1.0..1.0));
        }
        let labels = InfluenceScores::fully_observed((0..10).map(|_| rng.gen_range(0.0..1.0)).collect());
        let pairs = truth_pairs(&labels, &(0..10).collect::<Vec<_>>()).unwrap();
        let (loss, grad) = gradients(&ops, &x, &p, &pairs).unwrap();
        assert!((loss - loss_at(&ops, &x, &p, &pairs)).abs() < 1e-12);
        let eps = 1e-4;
        for _ in 0..20 {
            let i = rng.gen_range(0..p.values.len());
            let mut plus = p.clone();
            plus.values[i] += eps;
            let mut minus = p.clone();
            minus.values[i] -= eps;
            let numeric = (loss_at(&ops, &x, &plus, &pairs) - loss_at(&ops, &x, &minus, &pairs)) / (2.0 * eps);
            let analytic = grad.values[i];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4, "seed {seed}, parameter {i}: {analytic} vs {numeric}");
        }
    }
}

#[test]
fn zero_order_single_fringe_is_an_mlp_ranker() {
    let c = toy_complex();
    let ops = HohOperators::build(&c, 0, &[1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_features(10, 4, &mut rng);
    let p = ModelParams::init(Layout::new(4, 6, 3, 0, vec![1]), &mut rng);
    let got = forward(&ops, &x, &p).unwrap().values;
    let hidden = (x.values.dot(&p.w1(0)) + p.b1(0)).mapv(|z| if z > 0.0 { z } else { 0.01 * z });
    let out = hidden.dot(&p.w2(0)) + p.b2(0);
    let logits = out.dot(&p.readout_w()) * p.omega(0)[0] + p.readout_b();
    for (g, l) in got.iter().zip(&logits) {
        assert!((g - 1.0 / (1.0 + (-l).exp())).abs() < 1e-14);
    }
}

#[test]
fn relabelling_hubs_permutes_scores() {
    let c = toy_complex();
    let ops = HohOperators::build(&c, 0, &[1, 2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_features(10, 4, &mut rng);
    let p = ModelParams::init(Layout::new(4, 8, 4, 3, vec![1, 2]), &mut rng);
    let mut perm: Vec<usize> = (0..10).collect();
    perm.shuffle(&mut rng);
    let permuted_ops = HohOperators::from_operators(
        0,
        [1, 2].map(|f| {
            let op = ops.get(f).unwrap();
            let a = op.adjacency.to_dense().select(Axis(0), &perm).select(Axis(1), &perm);
            HohOperator { adjacency: CsrMatrix::from_dense(a.view()), ..op.clone() }
        }),
    );
    let px = FeatureMatrix { names: x.names.clone(), values: x.values.select(Axis(0), &perm) };
    let base = forward(&ops, &x, &p).unwrap().values;
    let moved = forward(&permuted_ops, &px, &p).unwrap().values;
    for (k, &i) in perm.iter().enumerate() {
        assert!((moved[k] - base[i]).abs() < 1e-12);
    }
}

#[test]
fn constant_labels_leave_parameters_untouched() {
    let c = toy_complex();
    let ops = HohOperators::build(&c, 0, &[1, 2]).unwrap();
    let x = random_features(10, 4, &mut ChaCha8Rng::seed_from_u64(1));
    let labels = InfluenceScores::fully_observed(vec![0.3; 10]);
    let none = TrainConfig { epochs: 0, ..Default::default() };
    let some = TrainConfig { epochs: 25, ..Default::default() };
    let (p0, _) = train_with_operators(&ops, &x, &labels, &none).unwrap();
    let (p1, log) = train_with_operators(&ops, &x, &labels, &some).unwrap();
    assert_eq!(p0, p1);
    assert!(log.epochs.iter().all(|e| e.loss == 0.0));
}

#[test]
fn training_is_deterministic_and_order_generic() {
    let c = random_complex(30, 0.3, 3, 4).unwrap();
    let nodes = node_features(&c, &NodeMetric::DEFAULT_FEATURES);
    let params = DiffusionParams { beta: 0.2, runs: 100, seed: 1, ..Default::default() };
    let config = TrainConfig { epochs: 30, max_order: Some(3), seed: 5, ..Default::default() };
    for h in [0, 2] {
        let x = standardize(&simplex_features(&nodes, &c, h).unwrap());
        let labels = generate_labels(&c, h, &params, Contagion::Sir).unwrap();
        let (ops, a, log_a) = train(&c, h, &x, &labels, &config).unwrap();
        let (_, b, log_b) = train(&c, h, &x, &labels, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(log_a, log_b);
        assert!(!ops.fringe_orders().contains(&h));
        let ranked = predict_rank(&ops, &x, std::slice::from_ref(&a)).unwrap();
        assert_eq!(ranked, predict_rank(&ops, &x, &[a.clone(), a.clone(), a]).unwrap());
        assert_eq!(ranked.len(), c.count(h).unwrap());
    }
}

#[test]
fn training_fits_sir_labels_on_a_toy_graph() {
    let c = random_complex(200, 0.03, 2, 77).unwrap();
    let th = epidemic_threshold(&c, 1.0).unwrap();
    let params = DiffusionParams { beta: 1.5 * th, runs: 1000, seed: 2, ..Default::default() };
    let labels = generate_labels(&c, 0, &params, Contagion::Sir).unwrap();
    let x = standardize(&node_features(&c, &NodeMetric::DEFAULT_FEATURES));
    let config = TrainConfig { epochs: 300, max_order: Some(2), seed: 1, ..Default::default() };
    let (ops, p, log) = train(&c, 0, &x, &labels, &config).unwrap();
    let pred = forward(&ops, &x, &p).unwrap().values;
    let ids = &log.train_ids;
    let tau = kendall_tau(&ids.iter().map(|&i| pred[i]).collect::<Vec<_>>(), &labels.select(ids).unwrap()).unwrap();
    eprintln!("train tau {tau:.3}");
    assert!(tau > 0.6, "train tau {tau}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loss_is_bounded_by_pair_count(scores in proptest::collection::vec(0.0f64..1.0, 2..20), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = scores.len();
        let pairs: Vec<RankPair> = (0..3 * n)
            .map(|_| {
                let i = rng.gen_range(0..n - 1);
                RankPair { i, j: rng.gen_range(i + 1..n), relation: rng.gen_range(-1..=1) }
            })
            .collect();
        let nonzero = pairs.iter().filter(|p| p.relation != 0).count() as f64;
        prop_assert!(ranking_loss(&scores, &pairs).abs() <= nonzero);
    }

    #[test]
    fn ranking_survives_monotone_transforms(scores in proptest::collection::vec(-5.0f64..5.0, 1..40)) {
        let squashed: Vec<f64> = scores.iter().map(|s| s.tanh() * 2.0 + 7.0).collect();
        prop_assert_eq!(rank_by_score(&scores), rank_by_score(&squashed));
    }
}
