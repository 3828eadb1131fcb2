use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplex_influence::evaluation::{kendall_tau, kendall_tau_brute, split, truth_pairs};
use simplex_influence::InfluenceScores;

fn tie_heavy(m: usize, levels: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0..levels) as f64).collect()
}

#[test]
fn fast_tau_equals_brute_force_on_random_lists_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let m = rng.gen_range(2..=200);
        let levels = rng.gen_range(1..=m as u32 + 1);
        let x = tie_heavy(m, levels, &mut rng);
        let y = tie_heavy(m, levels, &mut rng);
        assert_eq!(kendall_tau(&x, &y).unwrap(), kendall_tau_brute(&x, &y).unwrap());
    }
}

fn distinct(v: Vec<f64>) -> Vec<f64> {
    // break ties by position so the list is tie free
    v.into_iter().enumerate().map(|(i, x)| x + i as f64 * 1e-9).collect()
}

proptest! {
    #[test]
    fn tau_of_list_with_itself_is_one(v in proptest::collection::vec(-1e3f64..1e3, 2..60)) {
        let v = distinct(v);
        prop_assert_eq!(kendall_tau(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn tau_is_antisymmetric(x in proptest::collection::vec(-1e3f64..1e3, 2..60), seed: u64) {
        let x = distinct(x);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = distinct((0..x.len()).map(|_| rng.gen_range(-10.0..10.0)).collect());
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert_eq!(kendall_tau(&x, &neg).unwrap(), -kendall_tau(&x, &y).unwrap());
    }

    #[test]
    fn tau_ignores_increasing_transforms(x in proptest::collection::vec(-5f64..5.0, 2..80), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = tie_heavy(x.len(), 4, &mut rng);
        let tx: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
        prop_assert_eq!(kendall_tau(&tx, &y).unwrap(), kendall_tau(&x, &y).unwrap());
        prop_assert!(kendall_tau(&x, &y).unwrap().abs() <= 1.0);
    }

    #[test]
    fn split_is_a_disjoint_cover(n in 1usize..200, seed: u64) {
        let ids: Vec<usize> = (0..n).map(|i| i * 3).collect();
        let s = split(&ids, (0.6, 0.2, 0.2), seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, ids);
        prop_assert_eq!(s.train.len(), ((0.6 * n as f64).round() as usize).min(n));
    }

    #[test]
    fn pairs_relation_matches_comparison(values in proptest::collection::vec(0u8..5, 2..30)) {
        let scores = InfluenceScores::fully_observed(values.iter().map(|&v| v as f64).collect());
        let ids: Vec<usize> = (0..values.len()).rev().collect();
        let pairs = truth_pairs(&scores, &ids).unwrap();
        prop_assert_eq!(pairs.len(), values.len() * (values.len() - 1) / 2);
        for p in pairs {
            prop_assert!(p.i < p.j);
            prop_assert_eq!(p.relation, values[p.i].cmp(&values[p.j]) as i8);
        }
    }
}
