//! Experiment configuration: a TOML file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use simplex_influence::centrality::NodeMetric;
use simplex_influence::diffusion::{Contagion, DEFAULT_MAX_STEPS};
use simplex_influence::model::TrainConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Edges,
    Simplices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub input: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: InputFormat,
}

fn default_format() -> InputFormat {
    InputFormat::Edges
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionConfig {
    pub model: Contagion,
    /// `β / β_th` for single-point commands.
    pub beta_ratio: f64,
    /// `β₂ / β`; 0 disables the higher-order channel.
    pub beta2_ratio: f64,
    pub gamma: f64,
    pub runs: usize,
    pub max_steps: usize,
    /// `β / β_th` grid for SIR sweeps.
    pub beta_ratios: Vec<f64>,
    /// `β₂ / β` grid for HSIR sweeps, run at `β / β_th = 1`.
    pub beta2_ratios: Vec<f64>,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            model: Contagion::Sir,
            beta_ratio: 1.5,
            beta2_ratio: 0.0,
            gamma: 1.0,
            runs: 1000,
            max_steps: DEFAULT_MAX_STEPS,
            beta_ratios: (0..=10).map(|i| round2(1.0 + 0.2 * i as f64)).collect(),
            beta2_ratios: (1..=6).map(|i| 0.5 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub pair_samples: Option<usize>,
    pub split: [f64; 3],
    pub patience: usize,
    pub order: usize,
    pub hidden: usize,
    pub embed: usize,
    pub ensemble: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            pair_samples: t.pair_samples,
            split: [t.split.0, t.split.1, t.split.2],
            patience: t.patience,
            order: t.order,
            hidden: t.hidden,
            embed: t.embed,
            ensemble: t.ensemble,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImmunizationConfig {
    /// Share of 2-simplices immunized.
    pub fraction: f64,
    /// Share of the remaining nodes seeded per run.
    pub seed_fraction: f64,
    /// `β / β_th` grid; points with `β > 1` are dropped.
    pub beta_ratios: Vec<f64>,
    pub runs: usize,
}

impl Default for ImmunizationConfig {
    fn default() -> Self {
        ImmunizationConfig {
            fraction: 0.05,
            seed_fraction: 0.05,
            beta_ratios: (0..=100).map(|i| 0.25 * i as f64).collect(),
            runs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub hub_order: usize,
    pub max_order: usize,
    pub features: Vec<String>,
    pub standardize: bool,
    pub layer_cap: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Maximum orders visited by `sweep-order`.
    pub sweep_orders: Vec<usize>,
    pub diffusion: DiffusionConfig,
    pub train: TrainSection,
    pub immunization: ImmunizationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig { input: None, format: InputFormat::Edges },
            hub_order: 0,
            max_order: 3,
            features: NodeMetric::DEFAULT_FEATURES.iter().map(|m| m.name().to_string()).collect(),
            standardize: true,
            layer_cap: simplex_influence::complex::DEFAULT_LAYER_CAP,
            seed: 0,
            out: PathBuf::from("results"),
            threads: 0,
            sweep_orders: vec![1, 2, 3],
            diffusion: DiffusionConfig::default(),
            train: TrainSection::default(),
            immunization: ImmunizationConfig::default(),
        }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, global = true)]
    pub hub_order: Option<usize>,
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    #[arg(long, global = true)]
    pub beta_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub beta2_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Loads the file named by `--config` (or defaults) and applies the flags.
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(v) = &flags.input {
            cfg.dataset.input = Some(v.clone());
        }
        if let Some(v) = flags.format {
            cfg.dataset.format = v;
        }
        if let Some(v) = flags.hub_order {
            cfg.hub_order = v;
        }
        if let Some(v) = flags.max_order {
            cfg.max_order = v;
        }
        if let Some(v) = flags.beta_ratio {
            cfg.diffusion.beta_ratio = v;
        }
        if let Some(v) = flags.beta2_ratio {
            cfg.diffusion.beta2_ratio = v;
        }
        if let Some(v) = flags.gamma {
            cfg.diffusion.gamma = v;
        }
        if let Some(v) = flags.runs {
            cfg.diffusion.runs = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.threads {
            cfg.threads = v;
        }
        if let Some(v) = &flags.out {
            cfg.out = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.max_order == 0 {
            return bad("max_order must be at least 1".into());
        }
        if self.hub_order > self.max_order {
            return bad(format!("hub order {} exceeds max order {}", self.hub_order, self.max_order));
        }
        if let Some(input) = &self.dataset.input {
            if !input.exists() {
                return bad(format!("input {} does not exist", input.display()));
            }
        }
        self.metrics()?;
        let d = &self.diffusion;
        if !(d.beta_ratio >= 0.0) || !(d.beta2_ratio >= 0.0) {
            return bad("beta ratios must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&d.gamma) {
            return bad(format!("gamma = {} is not a probability", d.gamma));
        }
        if d.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        let im = &self.immunization;
        for (name, v) in [("fraction", im.fraction), ("seed_fraction", im.seed_fraction)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("immunization {name} = {v} must lie in (0, 1)"));
            }
        }
        self.train_config(0).validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn metrics(&self) -> Result<Vec<NodeMetric>> {
        self.features
            .iter()
            .map(|name| name.parse::<NodeMetric>().map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    pub fn input(&self) -> Result<&Path> {
        self.dataset.input.as_deref().ok_or_else(|| CliError::Config("no input dataset given (--input)".into()))
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            pair_samples: t.pair_samples,
            split: (t.split[0], t.split[1], t.split[2]),
            patience: t.patience,
            seed,
            order: t.order,
            hidden: t.hidden,
            embed: t.embed,
            max_order: Some(self.max_order),
            ensemble: t.ensemble,
        }
    }

    /// Hash of every setting that can change a result. The output directory,
    /// thread count and the single-point β selectors are left out: the
    /// selectors are recorded in each artifact instead, so a sweep shares one
    /// hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        canonical.threads = 0;
        canonical.diffusion.beta_ratio = 0.0;
        canonical.diffusion.beta2_ratio = 0.0;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    /// Seed for one subsystem, derived from the root seed and a purpose string.
    pub fn derive_seed(&self, purpose: &str) -> u64 {
        derive_seed(self.seed, purpose)
    }
}

pub fn derive_seed(root: u64, purpose: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(purpose.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a file's bytes.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_survive_a_toml_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.diffusion.beta_ratios.len(), 11);
        assert_eq!(cfg.diffusion.beta_ratios[10], 3.0);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = ExperimentConfig::from_toml("seed = 7\n[diffusion]\nruns = 10\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.diffusion.runs, 10);
        assert_eq!(cfg.diffusion.gamma, 1.0);
        assert!(matches!(ExperimentConfig::from_toml("sed = 7"), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_location_and_selectors() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out = PathBuf::from("elsewhere");
        b.diffusion.beta_ratio = 2.4;
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn derived_seeds_differ_by_purpose() {
        assert_ne!(derive_seed(1, "labels"), derive_seed(1, "train"));
        assert_eq!(derive_seed(1, "labels"), derive_seed(1, "labels"));
    }

    #[test]
    fn validation_rejects_bad_orders() {
        let cfg = ExperimentConfig { hub_order: 4, max_order: 3, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let cfg = ExperimentConfig { features: vec!["pagerank".into()], ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
