//! Pipeline steps shared by the subcommands.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::info;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use simplex_influence::centrality::{
    higher_order_degree, node_centrality, node_features, simplex_features, simplex_scores, standardize, FeatureMatrix,
    NodeMetric,
};
use simplex_influence::diffusion::{
    epidemic_threshold, immunize_and_spread, Contagion, DiffusionParams, ImmunizationPoint,
};
use simplex_influence::evaluation::kendall_tau;
use simplex_influence::hoh::HohOperators;
use simplex_influence::model::{ensemble_scores, fringe_orders, train_ensemble, ModelParams, TrainConfig, TrainLog};
use simplex_influence::{InfluenceScores, Simplex, SimplicialComplex};

use crate::config::{file_hash, DiffusionConfig, ExperimentConfig, ImmunizationConfig, InputFormat};
use crate::error::{CliError, Result};
use crate::io;

/// A complex plus the hash of the file it came from.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub complex: SimplicialComplex,
    pub dataset_hash: String,
    /// Record weights per order, for simplex-list input.
    pub weights: Option<Vec<InfluenceScores>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheKey {
    dataset_hash: String,
    format: InputFormat,
    max_order: usize,
    layer_cap: usize,
}

/// Reads the input dataset and lifts it to `max_order`.
pub fn build_dataset(path: &Path, format: InputFormat, max_order: usize, layer_cap: usize) -> Result<Dataset> {
    let text = io::read(path)?;
    let dataset_hash = file_hash(path)?;
    match format {
        InputFormat::Edges => {
            let graph = SimplicialComplex::parse_edge_list(&text)?;
            let complex = graph.clique_lift_capped(max_order, layer_cap)?;
            Ok(Dataset { complex, dataset_hash, weights: None })
        }
        InputFormat::Simplices => {
            let parsed = SimplicialComplex::parse_simplex_list(&text)?;
            if parsed.duplicate_records > 0 {
                log::warn!("{}: {} duplicate records, weights summed", path.display(), parsed.duplicate_records);
            }
            Ok(Dataset { complex: parsed.complex, dataset_hash, weights: Some(parsed.scores) })
        }
    }
}

/// Like [`build_dataset`] for the configured input, reusing a complex saved by
/// `lift` under `cache` when it was built from the same file and settings.
pub fn dataset(cfg: &ExperimentConfig, max_order: usize, cache: Option<&Path>) -> Result<Dataset> {
    let input = cfg.input()?;
    let key = CacheKey {
        dataset_hash: file_hash(input)?,
        format: cfg.dataset.format,
        max_order,
        layer_cap: cfg.layer_cap,
    };
    if let (Some(dir), InputFormat::Edges) = (cache, cfg.dataset.format) {
        let source = dir.join("source.json");
        if source.exists() && io::read_json::<CacheKey>(&source)? == key {
            info!("reusing lifted complex in {}", dir.display());
            let complex = SimplicialComplex::load(dir)?;
            return Ok(Dataset { complex, dataset_hash: key.dataset_hash, weights: None });
        }
    }
    let data = build_dataset(input, cfg.dataset.format, max_order, cfg.layer_cap)?;
    info!("complex counts per order: {:?}", data.complex.counts());
    Ok(data)
}

/// Saves the complex plus the cache key [`dataset`] checks.
pub fn save_dataset(cfg: &ExperimentConfig, data: &Dataset, dir: &Path) -> Result<()> {
    data.complex.save(dir)?;
    let key = CacheKey {
        dataset_hash: data.dataset_hash.clone(),
        format: cfg.dataset.format,
        max_order: cfg.max_order,
        layer_cap: cfg.layer_cap,
    };
    io::write_json(&dir.join("source.json"), &key)
}

/// Vertex-averaged node centralities for every `h`-simplex.
pub fn hub_features(complex: &SimplicialComplex, h: usize, metrics: &[NodeMetric], z_score: bool) -> Result<FeatureMatrix> {
    let nodes = node_features(complex, metrics);
    let x = simplex_features(&nodes, complex, h)?;
    Ok(if z_score { standardize(&x) } else { x })
}

/// Contagion model for a `β₂ / β` ratio: any positive ratio needs HSIR.
pub fn contagion(d: &DiffusionConfig, beta2_ratio: f64) -> Contagion {
    if beta2_ratio > 0.0 {
        Contagion::Hsir
    } else {
        d.model
    }
}

/// Absolute rates for `β = ratio · β_th` and `β₂ = ratio₂ · β`.
pub fn diffusion_params(
    complex: &SimplicialComplex,
    d: &DiffusionConfig,
    beta_ratio: f64,
    beta2_ratio: f64,
    seed: u64,
) -> Result<DiffusionParams> {
    let beta = beta_ratio * epidemic_threshold(complex, d.gamma)?;
    let beta2 = beta2_ratio * beta;
    if beta > 1.0 || beta2 > 1.0 {
        return Err(CliError::Runtime(format!(
            "β/β_th = {beta_ratio} and β₂/β = {beta2_ratio} give β = {beta:.4}, β₂ = {beta2:.4}; rates above 1 are not probabilities"
        )));
    }
    Ok(DiffusionParams {
        beta,
        gamma: d.gamma,
        higher_betas: if beta2_ratio > 0.0 { vec![beta2] } else { Vec::new() },
        runs: d.runs,
        seed,
        max_steps: d.max_steps,
    })
}

/// Classical ranking baselines for simplices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Degree,
    NeighborDegree,
    HIndex,
    Coreness,
    /// Number of `(h+1)`-simplices containing the simplex.
    HigherOrderDegree,
}

impl Baseline {
    pub const ALL: [Baseline; 5] =
        [Baseline::Degree, Baseline::NeighborDegree, Baseline::HIndex, Baseline::Coreness, Baseline::HigherOrderDegree];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Degree => "dc",
            Baseline::NeighborDegree => "nd",
            Baseline::HIndex => "hi",
            Baseline::Coreness => "cc",
            Baseline::HigherOrderDegree => "hd",
        }
    }

    pub fn scores(self, complex: &SimplicialComplex, h: usize) -> Result<Vec<f64>> {
        let metric = match self {
            Baseline::Degree => NodeMetric::Degree,
            Baseline::NeighborDegree => NodeMetric::NeighborDegree,
            Baseline::HIndex => NodeMetric::HIndex,
            Baseline::Coreness => NodeMetric::Coreness,
            Baseline::HigherOrderDegree => return Ok(higher_order_degree(complex, h)?),
        };
        Ok(simplex_scores(&node_centrality(complex, metric), complex, h)?)
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s.to_ascii_lowercase())
            .ok_or_else(|| CliError::Config(format!("unknown baseline {s:?} (expected dc, nd, hi, cc or hd)")))
    }
}

/// Kendall tau between predictions and truth restricted to `ids`.
pub fn tau_on(ids: &[usize], predicted: &[f64], truth: &InfluenceScores) -> Result<f64> {
    if let Some(&bad) = ids.iter().find(|&&i| i >= predicted.len()) {
        return Err(CliError::Runtime(format!("no prediction for simplex {bad}")));
    }
    let pred: Vec<f64> = ids.iter().map(|&i| predicted[i]).collect();
    Ok(kendall_tau(&pred, &truth.select(ids)?)?)
}

/// An ensemble trained for one hub order.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub hub_order: usize,
    pub operators: HohOperators,
    pub members: Vec<ModelParams>,
    pub logs: Vec<TrainLog>,
}

impl TrainedModel {
    pub fn scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(ensemble_scores(&self.operators, x, &self.members)?)
    }

    /// Held-out ids of the first member's split.
    pub fn test_ids(&self) -> &[usize] {
        &self.logs[0].test_ids
    }
}

pub fn operators(complex: &SimplicialComplex, h: usize, config: &TrainConfig) -> Result<HohOperators> {
    let fringes = fringe_orders(complex, h, config);
    if fringes.is_empty() {
        return Err(CliError::Runtime(format!("hub order {h} has no non-empty fringe layer")));
    }
    Ok(HohOperators::build(complex, h, &fringes)?)
}

pub fn fit(
    complex: &SimplicialComplex,
    h: usize,
    x: &FeatureMatrix,
    labels: &InfluenceScores,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    let ops = operators(complex, h, config)?;
    info!("training hub order {h} with fringes {:?}", ops.fringe_orders());
    let (members, logs) = train_ensemble(&ops, x, labels, config)?.into_iter().unzip();
    Ok(TrainedModel { hub_order: h, operators: ops, members, logs })
}

/// Test-split tau of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTau {
    pub method: String,
    pub tau: f64,
}

/// Trains a model and scores it and every baseline on its test split.
pub fn compare_methods(
    complex: &SimplicialComplex,
    h: usize,
    x: &FeatureMatrix,
    labels: &InfluenceScores,
    config: &TrainConfig,
) -> Result<(TrainedModel, Vec<MethodTau>)> {
    let model = fit(complex, h, x, labels, config)?;
    let ids = model.test_ids().to_vec();
    let mut taus = vec![MethodTau { method: "ismnet".into(), tau: tau_on(&ids, &model.scores(x)?, labels)? }];
    for b in Baseline::ALL {
        taus.push(MethodTau { method: b.name().into(), tau: tau_on(&ids, &b.scores(complex, h)?, labels)? });
    }
    Ok((model, taus))
}

/// Ids of the top `fraction` of simplices by score (at least one).
pub fn top_fraction(scores: &[f64], fraction: f64) -> Vec<usize> {
    let count = fraction_count(scores.len(), fraction);
    simplex_influence::model::rank_by_score(scores).into_iter().take(count).collect()
}

/// A uniformly random `fraction` of `0..n` (at least one id).
pub fn random_fraction(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let mut ids = sample(&mut ChaCha8Rng::seed_from_u64(seed), n, fraction_count(n, fraction)).into_vec();
    ids.sort_unstable();
    ids
}

fn fraction_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1.min(n), n)
}

/// `(λ, β)` pairs of the immunization grid, dropping points with `β > 1`.
pub fn immunization_betas(ratios: &[f64], beta_th: f64) -> Vec<(f64, f64)> {
    ratios.iter().map(|&r| (r, r * beta_th)).filter(|&(_, b)| b <= 1.0).collect()
}

/// Final recovered fractions after immunizing the given 2-simplices.
pub fn immunization_curve(
    complex: &SimplicialComplex,
    simplex_ids: &[usize],
    im: &ImmunizationConfig,
    grid: &[(f64, f64)],
    gamma: f64,
    seed: u64,
) -> Result<Vec<(f64, ImmunizationPoint)>> {
    let layer = complex.layer(2)?;
    let immunized: Vec<Simplex> = simplex_ids
        .iter()
        .map(|&i| layer.get(i).cloned().ok_or_else(|| CliError::Runtime(format!("no 2-simplex with id {i}"))))
        .collect::<Result<_>>()?;
    let params = DiffusionParams { gamma, runs: im.runs, seed, ..Default::default() };
    let betas: Vec<f64> = grid.iter().map(|&(_, b)| b).collect();
    let points = immunize_and_spread(complex, &immunized, im.seed_fraction, &betas, &params)?;
    Ok(grid.iter().map(|&(r, _)| r).zip(points).collect())
}
