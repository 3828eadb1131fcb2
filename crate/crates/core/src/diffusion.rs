//! Discrete-time SIR and higher-order SIR (HSIR) contagion.
//!
//! Each step is synchronous: every susceptible node exposed to `m1` infected
//! neighbours and `m2` 2-simplices whose two other vertices are infected
//! becomes infected with probability `1 - (1-β)^m1 (1-β₂)^m2`, and then every
//! node that was infected at the start of the step recovers with
//! probability `γ`. A run ends when no node is infected.
//!
//! Randomness: run `i` of a batch draws from its own ChaCha stream keyed by
//! `(root seed, batch key, i)`, so results do not depend on how runs are
//! scheduled across threads. Within a run, one uniform is drawn per exposed
//! susceptible node (ascending id) followed by one per recovering node
//! (ascending id); draws are skipped when the outcome is certain.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::scores::InfluenceScores;

/// Step cap for runs that cannot terminate on their own (`γ = 0`).
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    /// Per-step infection probability through one infected neighbour.
    pub beta: f64,
    /// Per-step recovery probability.
    pub gamma: f64,
    /// `β₂, β₃, …`: infection probabilities through fully infected simplices.
    /// Only `β₂` is supported by the engine.
    #[serde(default)]
    pub higher_betas: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

impl Default for DiffusionParams {
    fn default() -> Self {
        DiffusionParams {
            beta: 0.1,
            gamma: 1.0,
            higher_betas: Vec::new(),
            runs: 1000,
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl DiffusionParams {
    pub fn beta2(&self) -> f64 {
        self.higher_betas.first().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [("beta", self.beta), ("gamma", self.gamma)]
            .into_iter()
            .chain(self.higher_betas.iter().enumerate().map(|(i, &b)| (["beta2", "beta3+"][i.min(1)], b)));
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Diffusion(format!("{name} = {p} is not a probability")));
            }
        }
        if self.runs == 0 {
            return Err(Error::Diffusion("runs must be at least 1".into()));
        }
        if self.higher_betas.len() > 1 {
            return Err(Error::Diffusion(format!(
                "infection through simplices of order > 2 is not supported ({} higher-order rates given)",
                self.higher_betas.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contagion {
    Sir,
    Hsir,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub recovered_fraction: f64,
    pub steps: usize,
    pub susceptible: usize,
    pub infected: usize,
    pub recovered: usize,
    /// The step cap was reached with nodes still infected.
    pub truncated: bool,
}

/// Mean ⟨k⟩ and ⟨k²⟩ of the node degree sequence.
pub fn degree_moments(complex: &SimplicialComplex) -> (f64, f64) {
    let degrees = complex.degrees();
    let n = degrees.len().max(1) as f64;
    let k = degrees.iter().sum::<usize>() as f64 / n;
    let k2 = degrees.iter().map(|&d| (d * d) as f64).sum::<f64>() / n;
    (k, k2)
}

/// `β_th = ⟨k⟩ / (⟨k²⟩ − ⟨k⟩) · γ`.
pub fn epidemic_threshold(complex: &SimplicialComplex, gamma: f64) -> Result<f64> {
    if complex.count(1).unwrap_or(0) == 0 {
        return Err(Error::Diffusion("epidemic threshold needs at least one edge".into()));
    }
    let (k, k2) = degree_moments(complex);
    let gap = k2 - k;
    if gap.abs() <= 1e-12 * k2.max(1.0) {
        return Err(Error::ThresholdUndefined(k));
    }
    Ok(k / gap * gamma)
}

/// Adjacency and per-node triangle incidence, prepared once per complex.
#[derive(Debug, Clone)]
pub struct ContagionGraph {
    adjacency: Vec<Vec<usize>>,
    triangles: Vec<Vec<(usize, usize)>>,
}

impl ContagionGraph {
    pub fn new(complex: &SimplicialComplex) -> Self {
        let adjacency = complex.adjacency();
        let mut triangles = vec![Vec::new(); adjacency.len()];
        if let Ok(layer) = complex.layer(2) {
            for t in layer.simplices() {
                let [a, b, c] = [t.vertices()[0], t.vertices()[1], t.vertices()[2]];
                triangles[a].push((b, c));
                triangles[b].push((a, c));
                triangles[c].push((a, b));
            }
        }
        ContagionGraph { adjacency, triangles }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }
}

const SUSCEPTIBLE: u8 = 0;
const INFECTED: u8 = 1;
const RECOVERED: u8 = 2;

/// Scratch buffers reused across runs.
struct Workspace {
    state: Vec<u8>,
    links: Vec<u32>,
    groups: Vec<u32>,
    exposed: Vec<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace { state: vec![SUSCEPTIBLE; n], links: vec![0; n], groups: vec![0; n], exposed: Vec::new() }
    }
}

struct Spread<'a> {
    graph: &'a ContagionGraph,
    beta: f64,
    beta2: f64,
    gamma: f64,
    max_steps: usize,
    higher_order: bool,
}

impl Spread<'_> {
    fn run(&self, seeds: &[usize], immune: &[usize], ws: &mut Workspace, rng: &mut impl Rng) -> RunOutcome {
        let n = self.graph.node_count();
        ws.state.fill(SUSCEPTIBLE);
        for &v in immune {
            ws.state[v] = RECOVERED;
        }
        let mut infected: Vec<usize> = seeds.to_vec();
        infected.sort_unstable();
        infected.dedup();
        for &v in &infected {
            ws.state[v] = INFECTED;
        }
        let mut recovered = immune.len();
        let mut steps = 0;
        let mut next = Vec::new();
        while !infected.is_empty() && steps < self.max_steps {
            for &v in &infected {
                for &u in &self.graph.adjacency[v] {
                    if ws.state[u] == SUSCEPTIBLE {
                        if ws.links[u] == 0 {
                            ws.exposed.push(u);
                        }
                        ws.links[u] += 1;
                    }
                }
                if self.higher_order {
                    for &(a, b) in &self.graph.triangles[v] {
                        if ws.state[a] == SUSCEPTIBLE && ws.state[b] == INFECTED && v < b {
                            ws.groups[a] += 1;
                        } else if ws.state[b] == SUSCEPTIBLE && ws.state[a] == INFECTED && v < a {
                            ws.groups[b] += 1;
                        }
                    }
                }
            }
            ws.exposed.sort_unstable();
            next.clear();
            for &u in &ws.exposed {
                let escape = (1.0 - self.beta).powi(ws.links[u] as i32)
                    * (1.0 - self.beta2).powi(ws.groups[u] as i32);
                let p = 1.0 - escape;
                let hit = if p >= 1.0 {
                    true
                } else if p <= 0.0 {
                    false
                } else {
                    rng.gen::<f64>() < p
                };
                if hit {
                    next.push(u);
                }
                ws.links[u] = 0;
                ws.groups[u] = 0;
            }
            ws.exposed.clear();

            let mut still = Vec::with_capacity(infected.len());
            for &v in &infected {
                let recovers = if self.gamma >= 1.0 {
                    true
                } else if self.gamma <= 0.0 {
                    false
                } else {
                    rng.gen::<f64>() < self.gamma
                };
                if recovers {
                    ws.state[v] = RECOVERED;
                    recovered += 1;
                } else {
                    still.push(v);
                }
            }
            for &u in &next {
                ws.state[u] = INFECTED;
            }
            still.extend_from_slice(&next);
            still.sort_unstable();
            infected = still;
            steps += 1;
            debug_assert_eq!(
                ws.state.iter().filter(|&&s| s == SUSCEPTIBLE).count() + infected.len() + recovered,
                n
            );
        }
        let susceptible = n - infected.len() - recovered;
        RunOutcome {
            recovered_fraction: recovered as f64 / n as f64,
            steps,
            susceptible,
            infected: infected.len(),
            recovered,
            truncated: !infected.is_empty(),
        }
    }
}

fn check_nodes(graph: &ContagionGraph, nodes: &[usize], what: &str) -> Result<()> {
    match nodes.iter().find(|&&v| v >= graph.node_count()) {
        Some(v) => Err(Error::Seeds(format!("{what} node {v} is not in the complex"))),
        None => Ok(()),
    }
}

fn engine<'g>(graph: &'g ContagionGraph, params: &DiffusionParams, model: Contagion) -> Result<Spread<'g>> {
    params.validate()?;
    Ok(Spread {
        graph,
        beta: params.beta,
        beta2: if model == Contagion::Hsir { params.beta2() } else { 0.0 },
        gamma: params.gamma,
        max_steps: params.max_steps,
        higher_order: model == Contagion::Hsir,
    })
}

fn single_run(
    graph: &ContagionGraph,
    seeds: &[usize],
    params: &DiffusionParams,
    model: Contagion,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    if seeds.is_empty() {
        return Err(Error::Seeds("seed set is empty".into()));
    }
    check_nodes(graph, seeds, "seed")?;
    let spread = engine(graph, params, model)?;
    Ok(spread.run(seeds, &[], &mut Workspace::new(graph.node_count()), rng))
}

/// One pairwise SIR run from `seeds`.
pub fn sir_run(
    graph: &ContagionGraph,
    seeds: &[usize],
    params: &DiffusionParams,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    single_run(graph, seeds, params, Contagion::Sir, rng)
}

/// One HSIR run from `seeds`, adding infection through 2-simplices at rate `β₂`.
pub fn hsir_run(
    graph: &ContagionGraph,
    seeds: &[usize],
    params: &DiffusionParams,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    single_run(graph, seeds, params, Contagion::Hsir, rng)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a list of words into one 64-bit key.
pub fn stream_key(words: &[u64]) -> u64 {
    words.iter().fold(0x5151_5151_5151_5151, |acc, &w| splitmix(acc ^ splitmix(w)))
}

/// The random stream for run `run` of the batch identified by `key`.
pub fn run_rng(seed: u64, key: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_key(&[seed, key]));
    rng.set_stream(run);
    rng
}

/// Kahan-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Runs `params.runs` independent spreads from `seeds` and returns every outcome
/// in run order.
pub fn batch(
    graph: &ContagionGraph,
    seeds: &[usize],
    params: &DiffusionParams,
    model: Contagion,
    key: u64,
) -> Result<Vec<RunOutcome>> {
    if seeds.is_empty() {
        return Err(Error::Seeds("seed set is empty".into()));
    }
    check_nodes(graph, seeds, "seed")?;
    let spread = engine(graph, params, model)?;
    let n = graph.node_count();
    Ok((0..params.runs as u64)
        .into_par_iter()
        .map_init(
            || Workspace::new(n),
            |ws, run| spread.run(seeds, &[], ws, &mut run_rng(params.seed, key, run)),
        )
        .collect())
}

fn simplex_key(simplex: &Simplex) -> u64 {
    let words: Vec<u64> = simplex.vertices().iter().map(|&v| v as u64).collect();
    stream_key(&words)
}

/// Mean final recovered fraction over `params.runs` spreads seeded at the
/// vertices of `simplex`. The random streams depend only on the seed and the
/// simplex's vertex set.
pub fn simplex_infection_ability(
    graph: &ContagionGraph,
    simplex: &Simplex,
    params: &DiffusionParams,
    model: Contagion,
) -> Result<f64> {
    let outcomes = batch(graph, simplex.vertices(), params, model, simplex_key(simplex))?;
    let fractions: Vec<f64> = outcomes.iter().map(|o| o.recovered_fraction).collect();
    Ok(compensated_sum(&fractions) / fractions.len() as f64)
}

/// Infection ability of every `h`-simplex, used as ground-truth influence.
pub fn generate_labels(
    complex: &SimplicialComplex,
    h: usize,
    params: &DiffusionParams,
    model: Contagion,
) -> Result<InfluenceScores> {
    let layer = complex.layer(h)?;
    if layer.is_empty() {
        return Err(Error::Invalid(format!("layer {h} has no simplices to label")));
    }
    params.validate()?;
    let graph = ContagionGraph::new(complex);
    let values = layer
        .simplices()
        .par_iter()
        .map(|s| simplex_infection_ability(&graph, s, params, model))
        .collect::<Result<Vec<f64>>>()?;
    Ok(InfluenceScores::fully_observed(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImmunizationPoint {
    pub beta: f64,
    pub mean_recovered: f64,
    pub std_error: f64,
}

/// Immunizes the vertices of `immunized` (they start recovered), seeds a
/// uniformly drawn `seed_fraction` of the remaining nodes in each run, and
/// reports the mean final recovered fraction for every `β` in `betas`.
///
/// Runs for grid point `i` use streams keyed only by `(seed, i)`, so two
/// immunization strategies evaluated with the same parameters are compared
/// on common random numbers.
pub fn immunize_and_spread(
    complex: &SimplicialComplex,
    immunized: &[Simplex],
    seed_fraction: f64,
    betas: &[f64],
    params: &DiffusionParams,
) -> Result<Vec<ImmunizationPoint>> {
    if !(seed_fraction > 0.0 && seed_fraction < 1.0) {
        return Err(Error::Invalid(format!("seed fraction {seed_fraction} must lie in (0, 1)")));
    }
    let graph = ContagionGraph::new(complex);
    let n = graph.node_count();
    let mut immune: Vec<usize> = immunized.iter().flat_map(|s| s.vertices().iter().copied()).collect();
    immune.sort_unstable();
    immune.dedup();
    check_nodes(&graph, &immune, "immunized")?;
    let mut is_immune = vec![false; n];
    for &v in &immune {
        is_immune[v] = true;
    }
    let open: Vec<usize> = (0..n).filter(|&v| !is_immune[v]).collect();
    if open.is_empty() {
        return Err(Error::Invalid("immunized simplices cover every node".into()));
    }
    let seed_count = ((seed_fraction * open.len() as f64).round() as usize).clamp(1, open.len());

    betas
        .iter()
        .enumerate()
        .map(|(i, &beta)| {
            let point = DiffusionParams { beta, ..params.clone() };
            let spread = engine(&graph, &point, Contagion::Sir)?;
            let key = stream_key(&[0x1_3371_3371, i as u64]);
            let fractions: Vec<f64> = (0..params.runs as u64)
                .into_par_iter()
                .map_init(
                    || Workspace::new(n),
                    |ws, run| {
                        let mut rng = run_rng(params.seed, key, run);
                        let seeds: Vec<usize> =
                            sample(&mut rng, open.len(), seed_count).into_iter().map(|k| open[k]).collect();
                        spread.run(&seeds, &immune, ws, &mut rng).recovered_fraction
                    },
                )
                .collect();
            let runs = fractions.len() as f64;
            let mean = compensated_sum(&fractions) / runs;
            let var = fractions.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (runs - 1.0).max(1.0);
            Ok(ImmunizationPoint { beta, mean_recovered: mean, std_error: (var / runs).sqrt() })
        })
        .collect()
}

/// Sidecar metadata written next to a label file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMeta {
    pub hub_order: usize,
    pub beta: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub runs: usize,
    pub seed: u64,
    pub model: Contagion,
    pub dataset_hash: String,
    #[serde(default)]
    pub config_hash: Option<String>,
}

impl LabelMeta {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}
