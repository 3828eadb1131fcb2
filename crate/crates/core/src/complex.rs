//! Simplicial complexes built from edge lists (with clique lifting) or from
//! explicit simplex lists, plus the incidence structure between layers.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scores::InfluenceScores;
use crate::sparse::CsrMatrix;

/// Default per-layer cap on the number of simplices produced by lifting.
pub const DEFAULT_LAYER_CAP: usize = 5_000_000;

/// A simplex given by its strictly ascending vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts and deduplicates `vertices`. An empty vertex set is rejected.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(Error::Invalid("a simplex needs at least one vertex".into()));
        }
        Ok(Simplex(vertices))
    }

    fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    /// True if `self` is a proper subset of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.len() < other.0.len() && self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }

    /// The faces one order below, in lexicographic order.
    pub fn boundary(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        (0..n).rev().filter(move |_| n > 1).map(move |skip| {
            Simplex::from_sorted(
                self.0.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect(),
            )
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().join(","))
    }
}

/// All simplices of one order, with dense ids in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer {
    simplices: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
}

impl Layer {
    fn from_set(set: impl IntoIterator<Item = Simplex>) -> Self {
        let mut simplices: Vec<Simplex> = set.into_iter().collect();
        simplices.sort_unstable();
        simplices.dedup();
        let index = simplices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Layer { simplices, index }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn get(&self, id: usize) -> Option<&Simplex> {
        self.simplices.get(id)
    }

    pub fn id_of(&self, simplex: &Simplex) -> Option<usize> {
        self.index.get(simplex).copied()
    }
}

/// A finite simplicial complex, closed under taking faces.
///
/// Node ids are dense (`0..n`); `labels[i]` is the external label of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    layers: Vec<Layer>,
    labels: Vec<String>,
}

/// Result of reading a simplex list: the complex and, per order, the weights
/// attached to the listed simplices.
#[derive(Debug, Clone)]
pub struct SimplexListComplex {
    pub complex: SimplicialComplex,
    pub scores: Vec<InfluenceScores>,
    pub duplicate_records: usize,
}

impl SimplicialComplex {
    /// Builds a graph complex (orders 0 and 1) from integer-labelled edges.
    ///
    /// Labels are densified in ascending numeric order. Reversed and repeated
    /// edges collapse into one 1-simplex.
    pub fn from_edge_list(edges: &[(u64, u64)]) -> Result<Self> {
        if let Some((line, &(a, _))) = edges.iter().enumerate().find(|(_, (a, b))| a == b) {
            return Err(Error::SelfLoop { line, node: a.to_string() });
        }
        let ids: Vec<u64> =
            edges.iter().flat_map(|&(a, b)| [a, b]).sorted_unstable().dedup().collect();
        let lookup: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let nodes = Layer::from_set((0..ids.len()).map(|v| Simplex::from_sorted(vec![v])));
        let links = Layer::from_set(edges.iter().map(|&(a, b)| {
            let (a, b) = (lookup[&a], lookup[&b]);
            Simplex::from_sorted(vec![a.min(b), a.max(b)])
        }));
        Ok(SimplicialComplex {
            layers: vec![nodes, links],
            labels: ids.iter().map(u64::to_string).collect(),
        })
    }

    /// Parses an edge-list file body: one whitespace-separated pair of
    /// non-negative integers per line, `#` comments and blank lines skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut lines = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: no + 1,
                    reason: format!("expected two node ids, found {} fields", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<u64>().map_err(|_| Error::Parse {
                    line: no + 1,
                    reason: format!("`{s}` is not a non-negative integer"),
                })
            };
            edges.push((parse(fields[0])?, parse(fields[1])?));
            lines.push(no + 1);
        }
        SimplicialComplex::from_edge_list(&edges).map_err(|e| match e {
            Error::SelfLoop { line, node } => Error::SelfLoop { line: lines[line], node },
            other => other,
        })
    }

    /// Builds the downward closure of listed simplices.
    ///
    /// Each record's weight is attached to the simplex it lists; repeated
    /// records are merged by summing weights and counted in
    /// `duplicate_records`. Faces that were never listed stay unobserved.
    pub fn from_simplex_list(records: &[(Vec<String>, f64)]) -> Result<SimplexListComplex> {
        for (line, (vertices, weight)) in records.iter().enumerate() {
            if vertices.is_empty() {
                return Err(Error::Parse { line, reason: "record has no vertices".into() });
            }
            if !(weight.is_finite() && *weight >= 0.0) {
                return Err(Error::Parse { line, reason: format!("invalid weight {weight}") });
            }
        }
        let labels: Vec<String> = records
            .iter()
            .flat_map(|(v, _)| v.iter().cloned())
            .sorted_unstable_by(label_order)
            .dedup()
            .collect();
        let lookup: HashMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

        let mut weights: BTreeMap<Simplex, f64> = BTreeMap::new();
        let mut duplicate_records = 0;
        for (vertices, weight) in records {
            let simplex = Simplex::new(vertices.iter().map(|l| lookup[l.as_str()]).collect())?;
            match weights.get_mut(&simplex) {
                Some(w) => {
                    *w += weight;
                    duplicate_records += 1;
                }
                None => {
                    weights.insert(simplex, *weight);
                }
            }
        }

        let max_order = weights.keys().map(Simplex::order).max().unwrap_or(0);
        let mut sets: Vec<HashSet<Simplex>> = vec![HashSet::new(); max_order + 1];
        for simplex in weights.keys() {
            close_downward(simplex, &mut sets);
        }
        for v in 0..labels.len() {
            sets[0].insert(Simplex::from_sorted(vec![v]));
        }
        let complex = SimplicialComplex {
            layers: sets.into_iter().map(Layer::from_set).collect(),
            labels,
        };
        let mut scores: Vec<InfluenceScores> =
            complex.layers.iter().map(|l| InfluenceScores::unobserved(l.len())).collect();
        for (simplex, weight) in weights {
            let order = simplex.order();
            let id = complex.layers[order].id_of(&simplex).expect("closure contains listed");
            scores[order].set(id, weight);
        }
        Ok(SimplexListComplex { complex, scores, duplicate_records })
    }

    /// Parses a simplex-list file body: whitespace-separated vertex labels per
    /// line with an optional trailing `w=<number>` token (default weight 1).
    pub fn parse_simplex_list(text: &str) -> Result<SimplexListComplex> {
        let mut records = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut vertices = Vec::new();
            let mut weight = 1.0;
            for token in line.split_whitespace() {
                if let Some(w) = token.strip_prefix("w=") {
                    weight = w.parse().map_err(|_| Error::Parse {
                        line: no + 1,
                        reason: format!("bad weight `{w}`"),
                    })?;
                } else {
                    vertices.push(token.to_string());
                }
            }
            if vertices.is_empty() {
                return Err(Error::Parse { line: no + 1, reason: "record has no vertices".into() });
            }
            records.push((vertices, weight));
        }
        SimplicialComplex::from_simplex_list(&records)
    }

    /// Clique complex of the 1-skeleton, keeping cliques of up to
    /// `max_order + 1` nodes. Layers `0..=max_order` are always present.
    pub fn clique_lift(&self, max_order: usize) -> Result<Self> {
        self.clique_lift_capped(max_order, DEFAULT_LAYER_CAP)
    }

    pub fn clique_lift_capped(&self, max_order: usize, cap: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::Invalid("lifting needs max order >= 1".into()));
        }
        let adjacency = self.adjacency();
        let mut sets: Vec<HashSet<Simplex>> = vec![HashSet::new(); max_order + 1];
        for order in 0..=1 {
            if let Some(layer) = self.layers.get(order) {
                if layer.len() > cap {
                    return Err(Error::LayerCap { order, count: layer.len(), cap });
                }
                sets[order].extend(layer.simplices.iter().cloned());
            }
        }
        if max_order >= 2 {
            for clique in maximal_cliques(&adjacency) {
                for size in 3..=clique.len().min(max_order + 1) {
                    let set = &mut sets[size - 1];
                    for subset in clique.iter().copied().combinations(size) {
                        set.insert(Simplex::from_sorted(subset));
                        if set.len() > cap {
                            return Err(Error::LayerCap { order: size - 1, count: set.len(), cap });
                        }
                    }
                }
            }
        }
        Ok(SimplicialComplex {
            layers: sets.into_iter().map(Layer::from_set).collect(),
            labels: self.labels.clone(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.layers[0].len()
    }

    pub fn max_order(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn layer(&self, order: usize) -> Result<&Layer> {
        self.layers
            .get(order)
            .ok_or(Error::MissingLayer { order, max_order: self.max_order() })
    }

    /// Number of simplices of `order`, or `None` if the layer is absent.
    pub fn count(&self, order: usize) -> Option<usize> {
        self.layers.get(order).map(Layer::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::len).collect()
    }

    pub fn id_of(&self, simplex: &Simplex) -> Option<usize> {
        self.layers.get(simplex.order())?.id_of(simplex)
    }

    /// Sorted neighbour lists of the 1-skeleton.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        if let Some(edges) = self.layers.get(1) {
            for e in &edges.simplices {
                let (a, b) = (e.0[0], e.0[1]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(Vec::len).collect()
    }

    /// Every face of every stored simplex is stored.
    pub fn is_downward_closed(&self) -> bool {
        self.layers.iter().skip(1).enumerate().all(|(below, layer)| {
            layer.simplices.iter().all(|s| s.boundary().all(|f| self.layers[below].id_of(&f).is_some()))
        })
    }

    /// The 0/1 matrix `B[i][j] = 1` iff simplex `i` of order `hub` and simplex
    /// `j` of order `fringe` are nested (strict containment either way).
    pub fn incidence_matrix(&self, hub: usize, fringe: usize) -> Result<CsrMatrix> {
        if hub == fringe {
            return Err(Error::SameOrder(hub));
        }
        let (lo, hi) = (hub.min(fringe), hub.max(fringe));
        let low = self.layer(lo)?;
        let high = self.layer(hi)?;
        let mut triplets = Vec::new();
        for (j, tau) in high.simplices.iter().enumerate() {
            for face in tau.0.iter().copied().combinations(lo + 1) {
                let i = low.id_of(&Simplex::from_sorted(face)).ok_or_else(|| {
                    Error::Invalid(format!("complex is not closed under faces at {tau}"))
                })?;
                triplets.push((i, j, 1.0));
            }
        }
        let b = CsrMatrix::from_triplets(low.len(), high.len(), triplets)?;
        Ok(if hub < fringe { b } else { b.transpose() })
    }

    /// `k_{d,m}`: for each `m`-simplex, the number of `d`-simplices nested with it.
    pub fn generalized_degree(&self, d: usize, m: usize) -> Result<Vec<usize>> {
        let b = self.incidence_matrix(m, d)?;
        Ok((0..b.rows()).map(|r| b.row(r).0.len()).collect())
    }

    /// Stable content hash over labels and layers.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for label in &self.labels {
            hasher.update(label.as_bytes());
            hasher.update(b"\n");
        }
        for (order, layer) in self.layers.iter().enumerate() {
            hasher.update(format!("#{order}\n").as_bytes());
            for s in &layer.simplices {
                hasher.update(s.0.iter().join(",").as_bytes());
                hasher.update(b"\n");
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Writes `manifest.json` plus one `layer_<h>.csv` per order into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (order, layer) in self.layers.iter().enumerate() {
            let mut body = String::new();
            for s in &layer.simplices {
                body.push_str(&s.0.iter().join(","));
                body.push('\n');
            }
            let path = dir.join(format!("layer_{order}.csv"));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        let manifest = ComplexManifest {
            node_count: self.node_count(),
            max_order: self.max_order(),
            counts: self.counts(),
            labels: self.labels.clone(),
            fingerprint: self.fingerprint(),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: ComplexManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        let mut layers = Vec::with_capacity(manifest.max_order + 1);
        for order in 0..=manifest.max_order {
            let path = dir.join(format!("layer_{order}.csv"));
            let body = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let mut set = Vec::new();
            for (no, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let vertices = line
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Parse {
                        line: no + 1,
                        reason: format!("{}: bad vertex list `{line}`", path.display()),
                    })?;
                let simplex = Simplex::new(vertices)?;
                if simplex.order() != order {
                    return Err(Error::Parse {
                        line: no + 1,
                        reason: format!("{}: {simplex} is not of order {order}", path.display()),
                    });
                }
                set.push(simplex);
            }
            layers.push(Layer::from_set(set));
        }
        let complex = SimplicialComplex { layers, labels: manifest.labels };
        if complex.counts() != manifest.counts || complex.labels.len() != complex.node_count() {
            return Err(Error::Invalid(format!("{}: layer counts disagree with manifest", dir.display())));
        }
        if !complex.is_downward_closed() {
            return Err(Error::Invalid(format!("{}: complex is not closed under faces", dir.display())));
        }
        Ok(complex)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ComplexManifest {
    node_count: usize,
    max_order: usize,
    counts: Vec<usize>,
    labels: Vec<String>,
    fingerprint: String,
}

/// Numeric labels first in numeric order, then the rest lexicographically.
fn label_order(a: &String, b: &String) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        _ => a.cmp(b),
    }
}

fn close_downward(simplex: &Simplex, sets: &mut [HashSet<Simplex>]) {
    if sets[simplex.order()].insert(simplex.clone()) {
        for face in simplex.boundary() {
            close_downward(&face, sets);
        }
    }
}

/// Maximal cliques by Bron–Kerbosch with Tomita pivoting, rooted along a
/// degeneracy ordering. Each clique is returned sorted ascending and the
/// list itself is sorted, so the output is independent of traversal order.
pub fn maximal_cliques(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let order = degeneracy_order(adjacency);
    let mut position = vec![0; adjacency.len()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut cliques = Vec::new();
    let mut r = Vec::new();
    for &v in &order {
        let (later, earlier): (Vec<usize>, Vec<usize>) =
            adjacency[v].iter().partition(|&&u| position[u] > position[v]);
        r.push(v);
        expand(adjacency, &mut r, later, earlier, &mut cliques);
        r.pop();
    }
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort_unstable();
    cliques
}

fn expand(
    adjacency: &[Vec<usize>],
    r: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| (intersect(&p, &adjacency[u]).len(), std::cmp::Reverse(u)))
        .expect("p is non-empty");
    let candidates: Vec<usize> =
        p.iter().copied().filter(|v| adjacency[pivot].binary_search(v).is_err()).collect();
    for v in candidates {
        r.push(v);
        expand(adjacency, r, intersect(&p, &adjacency[v]), intersect(&x, &adjacency[v]), out);
        r.pop();
        p.retain(|&u| u != v);
        let at = x.partition_point(|&u| u < v);
        x.insert(at, v);
    }
}

/// Intersection of two ascending lists.
fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Repeatedly removes a minimum-degree vertex (smallest id on ties).
fn degeneracy_order(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut queue: std::collections::BTreeSet<(usize, usize)> =
        (0..n).map(|v| (degree[v], v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        removed[v] = true;
        order.push(v);
        for &u in &adjacency[v] {
            if !removed[u] {
                queue.remove(&(degree[u], u));
                degree[u] -= 1;
                queue.insert((degree[u], u));
            }
        }
    }
    order
}
