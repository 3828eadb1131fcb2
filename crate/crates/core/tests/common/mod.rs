#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplex_influence::SimplicialComplex;

/// Erdős–Rényi edges over `0..n`. Returns `None` when no edge was drawn.
pub fn random_edges(n: usize, p: f64, seed: u64) -> Option<Vec<(u64, u64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u64 {
        for v in u + 1..n as u64 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    (!edges.is_empty()).then_some(edges)
}

pub fn random_complex(n: usize, p: f64, max_order: usize, seed: u64) -> Option<SimplicialComplex> {
    let edges = random_edges(n, p, seed)?;
    Some(SimplicialComplex::from_edge_list(&edges).unwrap().clique_lift(max_order).unwrap())
}

pub fn complete_graph(n: u64) -> SimplicialComplex {
    let edges: Vec<(u64, u64)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    SimplicialComplex::from_edge_list(&edges).unwrap()
}

/// Symmetric tridiagonal form `(diagonal, off-diagonal)` of a dense symmetric matrix.
pub fn tridiagonal(m: &ndarray::Array2<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = m.nrows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let (d, e) = nalgebra::linalg::SymmetricTridiagonal::new(dm).unpack_tridiagonal();
    (d.as_slice().to_vec(), e.as_slice().to_vec())
}

/// Number of eigenvalues strictly below `x`, by the Sturm sequence of the
/// tridiagonal form.
pub fn count_below((d, e): &(Vec<f64>, Vec<f64>), x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[test]
fn sturm_counts_known_spectrum() {
    // eigenvalues 1/4, 1/4, 1
    let a = ndarray::array![[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]] / 4.0;
    let t = tridiagonal(&a);
    assert_eq!(count_below(&t, 0.2), 0);
    assert_eq!(count_below(&t, 0.3), 2);
    assert_eq!(count_below(&t, 0.99), 2);
    assert_eq!(count_below(&t, 1.01), 3);
}
