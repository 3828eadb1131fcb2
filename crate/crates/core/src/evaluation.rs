//! Kendall rank correlation, ground-truth ranking pairs and dataset splits.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scores::InfluenceScores;

/// Ground-truth order between simplices `i < j`: `+1` if `s_i > s_j`,
/// `-1` if `s_i < s_j`, `0` on ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPair {
    pub i: usize,
    pub j: usize,
    pub relation: i8,
}

fn relation(a: f64, b: f64) -> i8 {
    match a.partial_cmp(&b) {
        Some(Ordering::Greater) => 1,
        Some(Ordering::Less) => -1,
        _ => 0,
    }
}

fn check_lists(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("score lists of length {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Invalid("Kendall tau needs at least two items".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Invalid("scores contain NaN".into()));
    }
    Ok(())
}

/// Kendall tau with the tie rule "neither concordant nor discordant" and the
/// untied denominator `m(m-1)/2`.
///
/// Runs in `O(m log m)`: sort by `(x, y)`, count tied groups, and count
/// discordant pairs as strict inversions of `y` by merge sort.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lists(x, y)?;
    let m = x.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let tied_pairs = |group_len: i64| group_len * (group_len - 1) / 2;
    let mut x_ties = 0i64;
    let mut joint_ties = 0i64;
    let mut i = 0;
    while i < m {
        let mut j = i + 1;
        while j < m && x[order[j]] == x[order[i]] {
            j += 1;
        }
        x_ties += tied_pairs((j - i) as i64);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && y[order[l]] == y[order[k]] {
                l += 1;
            }
            joint_ties += tied_pairs((l - k) as i64);
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = order.iter().map(|&k| y[k]).collect();
    let discordant = count_inversions(&mut ys);

    let mut sorted_y = ys;
    let mut y_ties = 0i64;
    let mut i = 0;
    while i < m {
        let mut j = i + 1;
        while j < m && sorted_y[j] == sorted_y[i] {
            j += 1;
        }
        y_ties += tied_pairs((j - i) as i64);
        i = j;
    }
    sorted_y.clear();

    let total = tied_pairs(m as i64);
    let untied = total - x_ties - y_ties + joint_ties;
    let concordant_minus_discordant = untied - 2 * discordant;
    Ok(concordant_minus_discordant as f64 / total as f64)
}

/// Number of pairs `a < b` with `v[a] > v[b]`; sorts `v` ascending.
fn count_inversions(v: &mut [f64]) -> i64 {
    let mut buf = v.to_vec();
    merge_count(v, &mut buf)
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as i64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Quadratic pair counter, kept as a reference implementation.
pub fn kendall_tau_brute(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lists(x, y)?;
    let m = x.len();
    let mut score = 0i64;
    for a in 0..m {
        for b in a + 1..m {
            score += (relation(x[a], x[b]) * relation(y[a], y[b])) as i64;
        }
    }
    Ok(score as f64 / (m * (m - 1) / 2) as f64)
}

/// All pairs `i < j` over `ids` with their ground-truth relation.
pub fn truth_pairs(scores: &InfluenceScores, ids: &[usize]) -> Result<Vec<RankPair>> {
    let values = scores.select(ids)?;
    let mut sorted: Vec<(usize, f64)> = ids.iter().copied().zip(values).collect();
    sorted.sort_by_key(|&(id, _)| id);
    let mut pairs = Vec::with_capacity(sorted.len() * sorted.len().saturating_sub(1) / 2);
    for (a, &(i, si)) in sorted.iter().enumerate() {
        for &(j, sj) in &sorted[a + 1..] {
            pairs.push(RankPair { i, j, relation: relation(si, sj) });
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `ids` with `seed` and cuts them into train/val/test. Train and
/// val sizes are the rounded ratio shares; the remainder goes to test.
pub fn split(ids: &[usize], ratios: (f64, f64, f64), seed: u64) -> Result<Split> {
    if ids.is_empty() {
        return Err(Error::Invalid("cannot split an empty id list".into()));
    }
    let (a, b, c) = ratios;
    if a <= 0.0 || b < 0.0 || c < 0.0 || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("split ratios {ratios:?} must be non-negative and sum to 1")));
    }
    let n = ids.len();
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = ((a * n as f64).round() as usize).min(n);
    let val = ((b * n as f64).round() as usize).min(n - train);
    let test = shuffled.split_off(train + val);
    let val_ids = shuffled.split_off(train);
    Ok(Split { train: shuffled, val: val_ids, test })
}
