//! Classical node centralities, used both as model input features and as
//! ranking baselines, and their lift to simplices by vertex averaging.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeMetric {
    Degree,
    NeighborDegree,
    HIndex,
    Coreness,
    Closeness,
    Betweenness,
}

impl NodeMetric {
    /// The feature set fed to the ranking network by default.
    pub const DEFAULT_FEATURES: [NodeMetric; 4] =
        [NodeMetric::Degree, NodeMetric::NeighborDegree, NodeMetric::HIndex, NodeMetric::Coreness];

    pub fn name(self) -> &'static str {
        match self {
            NodeMetric::Degree => "degree",
            NodeMetric::NeighborDegree => "neighbor_degree",
            NodeMetric::HIndex => "h_index",
            NodeMetric::Coreness => "coreness",
            NodeMetric::Closeness => "closeness",
            NodeMetric::Betweenness => "betweenness",
        }
    }
}

impl fmt::Display for NodeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "degree" | "dc" => NodeMetric::Degree,
            "neighbor_degree" | "nd" => NodeMetric::NeighborDegree,
            "h_index" | "hi" => NodeMetric::HIndex,
            "coreness" | "cc" => NodeMetric::Coreness,
            "closeness" => NodeMetric::Closeness,
            "betweenness" => NodeMetric::Betweenness,
            _ => return Err(Error::UnknownMetric(s.to_string())),
        })
    }
}

/// Named feature columns over the simplices of one layer, in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    /// CSV with header `simplex_id,<names>`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("simplex_id,{}\n", self.names.join(","));
        for (i, row) in self.values.rows().into_iter().enumerate() {
            out.push_str(&i.to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, reason: "empty feature file".into() })?;
        let mut cols = header.split(',');
        if cols.next().map(str::trim) != Some("simplex_id") {
            return Err(Error::Parse { line: 1, reason: "header must start with simplex_id".into() });
        }
        let names: Vec<String> = cols.map(|c| c.trim().to_string()).collect();
        let mut data = Vec::new();
        let mut rows = 0;
        for (no, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let bad = |reason: String| Error::Parse { line: no + 1, reason };
            if fields.len() != names.len() + 1 {
                return Err(bad(format!("expected {} fields", names.len() + 1)));
            }
            if fields[0].trim().parse::<usize>().ok() != Some(rows) {
                return Err(bad(format!("expected simplex_id {rows}")));
            }
            for f in &fields[1..] {
                data.push(f.trim().parse::<f64>().map_err(|_| bad(format!("bad value `{f}`")))?);
            }
            rows += 1;
        }
        let values = Array2::from_shape_vec((rows, names.len()), data).expect("row lengths checked");
        Ok(FeatureMatrix { names, values })
    }
}

pub fn node_centrality(complex: &SimplicialComplex, metric: NodeMetric) -> Vec<f64> {
    let adj = complex.adjacency();
    match metric {
        NodeMetric::Degree => adj.iter().map(|n| n.len() as f64).collect(),
        NodeMetric::NeighborDegree => neighbor_degree(&adj),
        NodeMetric::HIndex => h_index(&adj).into_iter().map(|h| h as f64).collect(),
        NodeMetric::Coreness => coreness(&adj).into_iter().map(|k| k as f64).collect(),
        NodeMetric::Closeness => closeness(&adj),
        NodeMetric::Betweenness => betweenness(&adj),
    }
}

/// Looks a metric up by name and evaluates it.
pub fn node_centrality_by_name(complex: &SimplicialComplex, metric: &str) -> Result<Vec<f64>> {
    Ok(node_centrality(complex, metric.parse()?))
}

fn neighbor_degree(adj: &[Vec<usize>]) -> Vec<f64> {
    adj.iter()
        .map(|n| {
            if n.is_empty() {
                0.0
            } else {
                n.iter().map(|&u| adj[u].len() as f64).sum::<f64>() / n.len() as f64
            }
        })
        .collect()
}

/// Largest `h` such that at least `h` neighbours have degree `>= h`.
pub fn h_index(adj: &[Vec<usize>]) -> Vec<usize> {
    adj.iter()
        .map(|n| {
            let mut degrees: Vec<usize> = n.iter().map(|&u| adj[u].len()).collect();
            degrees.sort_unstable_by(|a, b| b.cmp(a));
            degrees.iter().enumerate().take_while(|&(i, &d)| d > i).count()
        })
        .collect()
}

/// k-core numbers by Batagelj–Zaveršnik bucket peeling.
pub fn coreness(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let mut bin = vec![0usize; max_degree + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[degree[v]];
        vert[pos[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_degree).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;
    for i in 0..n {
        let v = vert[i];
        for &u in &adj[v] {
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued nodes are reached");
        for &u in &adj[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Inverse of the summed distances to the nodes reachable from each node.
fn closeness(adj: &[Vec<usize>]) -> Vec<f64> {
    (0..adj.len())
        .into_par_iter()
        .map(|v| {
            let total: usize = bfs_distances(adj, v).into_iter().flatten().sum();
            if total == 0 {
                0.0
            } else {
                1.0 / total as f64
            }
        })
        .collect()
}

/// Unnormalised shortest-path betweenness (Brandes), each unordered pair
/// counted once.
fn betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    const CHUNK: usize = 64;
    let n = adj.len();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            for &s in chunk {
                brandes_accumulate(adj, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.iter().map(|b| b / 2.0).collect()
}

fn brandes_accumulate(adj: &[Vec<usize>], source: usize, acc: &mut [f64]) {
    let n = adj.len();
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    sigma[source] = 1.0;
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        stack.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![0.0; n];
    while let Some(w) = stack.pop() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
        if w != source {
            acc[w] += delta[w];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterativeMetric {
    PageRank,
    Eigenvector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeResult {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power-iteration centralities, normalised to unit 1-norm.
///
/// PageRank spreads the mass of dangling nodes uniformly. Eigenvector
/// centrality iterates `(A + I)x`, which has the same leading eigenvector
/// as `A` but does not oscillate on bipartite graphs. `damping` is ignored
/// for eigenvector centrality.
pub fn iterative_centrality(
    complex: &SimplicialComplex,
    metric: IterativeMetric,
    damping: f64,
    max_iters: usize,
    tol: f64,
) -> IterativeResult {
    let adj = complex.adjacency();
    let n = adj.len();
    if n == 0 {
        return IterativeResult { values: Vec::new(), iterations: 0, converged: true };
    }
    let uniform = 1.0 / n as f64;
    let mut x = vec![uniform; n];
    for it in 1..=max_iters {
        let mut next = vec![0.0; n];
        match metric {
            IterativeMetric::PageRank => {
                let dangling: f64 = (0..n).filter(|&v| adj[v].is_empty()).map(|v| x[v]).sum();
                let base = (1.0 - damping) * uniform + damping * dangling * uniform;
                for (v, nbrs) in adj.iter().enumerate() {
                    if !nbrs.is_empty() {
                        let share = damping * x[v] / nbrs.len() as f64;
                        for &u in nbrs {
                            next[u] += share;
                        }
                    }
                }
                for value in &mut next {
                    *value += base;
                }
            }
            IterativeMetric::Eigenvector => {
                for (v, nbrs) in adj.iter().enumerate() {
                    next[v] += x[v];
                    for &u in nbrs {
                        next[u] += x[v];
                    }
                }
            }
        }
        let norm: f64 = next.iter().sum();
        if norm > 0.0 {
            for value in &mut next {
                *value /= norm;
            }
        }
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if change < tol {
            return IterativeResult { values: x, iterations: it, converged: true };
        }
    }
    IterativeResult { values: x, iterations: max_iters, converged: false }
}

/// Node features for the given metrics, one column per metric.
pub fn node_features(complex: &SimplicialComplex, metrics: &[NodeMetric]) -> FeatureMatrix {
    let n = complex.node_count();
    let mut values = Array2::zeros((n, metrics.len()));
    for (j, &m) in metrics.iter().enumerate() {
        for (i, v) in node_centrality(complex, m).into_iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    FeatureMatrix { names: metrics.iter().map(|m| m.name().to_string()).collect(), values }
}

/// Row for each `h`-simplex is the mean of its vertices' rows.
pub fn simplex_features(nodes: &FeatureMatrix, complex: &SimplicialComplex, h: usize) -> Result<FeatureMatrix> {
    let layer = complex.layer(h)?;
    if nodes.rows() < complex.node_count() {
        return Err(Error::MissingNodeRow(nodes.rows()));
    }
    if h == 0 {
        return Ok(nodes.clone());
    }
    let d = nodes.values.ncols();
    let mut values = Array2::zeros((layer.len(), d));
    for (mut row, simplex) in values.rows_mut().into_iter().zip(layer.simplices()) {
        for &v in simplex.vertices() {
            row += &nodes.values.row(v);
        }
        row /= simplex.vertices().len() as f64;
    }
    Ok(FeatureMatrix { names: nodes.names.clone(), values })
}

/// Vertex-mean of a node score vector over the `h`-simplices.
pub fn simplex_scores(node_scores: &[f64], complex: &SimplicialComplex, h: usize) -> Result<Vec<f64>> {
    let layer = complex.layer(h)?;
    layer
        .simplices()
        .iter()
        .map(|s| {
            let mut total = 0.0;
            for &v in s.vertices() {
                total += node_scores.get(v).ok_or(Error::MissingNodeRow(v))?;
            }
            Ok(total / s.vertices().len() as f64)
        })
        .collect()
}

/// Number of `(h+1)`-simplices having each `h`-simplex as a face; all zeros
/// when the complex stops at order `h`.
pub fn higher_order_degree(complex: &SimplicialComplex, h: usize) -> Result<Vec<f64>> {
    let n = complex.layer(h)?.len();
    if complex.count(h + 1).is_none() {
        return Ok(vec![0.0; n]);
    }
    Ok(complex.generalized_degree(h + 1, h)?.into_iter().map(|k| k as f64).collect())
}

/// Per-column z-score with population variance; constant columns become zero.
pub fn standardize(x: &FeatureMatrix) -> FeatureMatrix {
    let mut values = x.values.clone();
    let rows = values.nrows();
    if rows == 0 {
        return x.clone();
    }
    for mut col in values.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / rows as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows as f64;
        let std = var.sqrt();
        if std <= 1e-12 * mean.abs().max(1.0) {
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - mean) / std);
        }
    }
    FeatureMatrix { names: x.names.clone(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use itertools::Itertools;
    use ndarray::array;

    fn graph(edges: &[(u64, u64)]) -> SimplicialComplex {
        SimplicialComplex::from_edge_list(edges).unwrap()
    }

    fn star() -> SimplicialComplex {
        graph(&[(0, 1), (0, 2), (0, 3)])
    }

    fn complete(n: u64) -> SimplicialComplex {
        graph(&(0..n).tuple_combinations().collect::<Vec<_>>())
    }

    fn triangle_pendant() -> SimplicialComplex {
        graph(&[(0, 1), (1, 2), (0, 2), (2, 3)])
    }

    #[test]
    fn degree_of_star() {
        assert_eq!(node_centrality(&star(), NodeMetric::Degree), vec![3.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn coreness_examples() {
        assert_eq!(node_centrality(&complete(4), NodeMetric::Coreness), vec![3.0; 4]);
        assert_eq!(node_centrality(&triangle_pendant(), NodeMetric::Coreness), vec![2.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn h_index_scans_neighbor_degrees() {
        // node 0 has neighbours of degree 3, 2 and 1
        let g = graph(&[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6)]);
        let adj = g.adjacency();
        let mut nd: Vec<usize> = adj[0].iter().map(|&u| adj[u].len()).collect();
        nd.sort_unstable();
        assert_eq!(nd, vec![1, 2, 3]);
        let brute = (1..=3).filter(|&h| nd.iter().filter(|&&d| d >= h).count() >= h).max().unwrap();
        assert_eq!(h_index(&adj)[0], brute);
        assert_eq!(brute, 2);
    }

    #[test]
    fn neighbor_degree_is_mean_and_zero_when_isolated() {
        let nd = node_centrality(&star(), NodeMetric::NeighborDegree);
        assert_eq!(nd, vec![1.0, 3.0, 3.0, 3.0]);
        let out = SimplicialComplex::parse_simplex_list("0 1\n2\n").unwrap();
        assert_eq!(node_centrality(&out.complex, NodeMetric::NeighborDegree)[2], 0.0);
    }

    #[test]
    fn closeness_and_betweenness_on_a_path() {
        let p = graph(&[(0, 1), (1, 2), (3, 4)]);
        let c = node_centrality(&p, NodeMetric::Closeness);
        assert_eq!(c, vec![1.0 / 3.0, 0.5, 1.0 / 3.0, 1.0, 1.0]);
        let b = node_centrality(&p, NodeMetric::Betweenness);
        assert_eq!(b, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(node_centrality(&star(), NodeMetric::Betweenness)[0], 3.0);
    }

    #[test]
    fn unknown_metric_is_an_error() {
        assert!(matches!(node_centrality_by_name(&star(), "katz"), Err(Error::UnknownMetric(_))));
        assert!(node_centrality_by_name(&star(), "coreness").is_ok());
    }

    #[test]
    fn pagerank_on_regular_and_star() {
        let cycle = graph(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let pr = iterative_centrality(&cycle, IterativeMetric::PageRank, 0.85, 1000, 1e-13);
        assert!(pr.converged);
        for v in &pr.values {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-12);
        }
        // closed form for the 3-leaf star: solve
        //   c = (1-a)/4 + 3a·l,  l = (1-a)/4 + a·c/3
        let a = 0.85;
        let base = (1.0 - a) / 4.0;
        let center = (base + 3.0 * a * base) / (1.0 - a * a);
        let pr = iterative_centrality(&star(), IterativeMetric::PageRank, a, 10_000, 1e-14);
        assert_abs_diff_eq!(pr.values[0], center, epsilon = 1e-10);
        assert_abs_diff_eq!(pr.values[0], 0.47973, epsilon = 1e-5);
        assert_abs_diff_eq!(pr.values.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn eigenvector_on_complete_graph_and_flag() {
        let ev = iterative_centrality(&complete(5), IterativeMetric::Eigenvector, 0.0, 100, 1e-12);
        for v in &ev.values {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-12);
        }
        let pr = iterative_centrality(&star(), IterativeMetric::PageRank, 0.85, 1, 1e-15);
        assert!(!pr.converged);
    }

    #[test]
    fn simplex_feature_means() {
        let tri = complete(3).clique_lift(2).unwrap();
        let nodes = node_features(&tri, &[NodeMetric::Degree]);
        assert_eq!(simplex_features(&nodes, &tri, 2).unwrap().values, array![[2.0]]);
        assert_eq!(simplex_features(&nodes, &tri, 0).unwrap(), nodes);

        let nodes = FeatureMatrix { names: vec!["coreness".into()], values: array![[2.0], [2.0], [1.0]] };
        let f = simplex_features(&nodes, &tri, 2).unwrap();
        assert_abs_diff_eq!(f.values[[0, 0]], 5.0 / 3.0, epsilon = 1e-15);

        let short = FeatureMatrix { names: vec!["x".into()], values: array![[1.0]] };
        assert!(matches!(simplex_features(&short, &tri, 2), Err(Error::MissingNodeRow(_))));
    }

    #[test]
    fn standardize_examples() {
        let x = FeatureMatrix {
            names: vec!["a".into(), "b".into()],
            values: array![[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]],
        };
        let z = standardize(&x);
        let s = (1.5f64).sqrt();
        for (g, e) in z.values.column(0).iter().zip([-s, 0.0, s]) {
            assert_abs_diff_eq!(*g, e, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(z.values[[0, 0]], -1.2247, epsilon = 1e-4);
        assert!(z.values.column(1).iter().all(|&v| v == 0.0));
        let again = standardize(&z);
        for (a, b) in again.values.iter().zip(&z.values) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-6);
        }
    }

    #[test]
    fn feature_csv_round_trip() {
        let x = FeatureMatrix { names: vec!["degree".into(), "coreness".into()], values: array![[1.5, 2.0], [0.0, -1.0]] };
        let text = x.to_csv();
        assert!(text.starts_with("simplex_id,degree,coreness\n0,1.5,2\n"));
        assert_eq!(FeatureMatrix::from_csv(&text).unwrap(), x);
    }

    #[test]
    fn higher_order_degree_counts_cofaces() {
        let c = triangle_pendant().clique_lift(2).unwrap();
        assert_eq!(higher_order_degree(&c, 0).unwrap(), vec![2.0, 2.0, 3.0, 1.0]);
        assert_eq!(higher_order_degree(&c, 2).unwrap(), vec![0.0]);
    }
}
