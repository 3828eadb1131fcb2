//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use simplex_influence::diffusion::{epidemic_threshold, generate_labels, LabelMeta};
use simplex_influence::model::{rank_by_score, ModelParams};
use simplex_influence::{InfluenceScores, SimplicialComplex};

use crate::config::{ExperimentConfig, Overrides};
use crate::error::{CliError, Result};
use crate::io::{self, ratio_tag, RunManifest, ScoreKind, ScoreSidecar, Table};
use crate::pipeline::{self, Baseline, Dataset, TrainedModel};
use crate::report::{self, EVALUATION_FILE, EVALUATION_HEADER, IMMUNIZATION_FILE, IMMUNIZATION_HEADER, ORDER_SWEEP_FILE, ORDER_SWEEP_HEADER};

#[derive(Debug, Parser)]
#[command(name = "ismnet", version, about = "Rank influential simplices in simplicial complexes")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// `β / β_th` over the configured SIR grid
    Sir,
    /// `β₂ / β` over the configured HSIR grid at `β / β_th = 1`
    Hsir,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lift the input graph to a simplicial complex and save it
    Lift,
    /// Write the hub-simplex feature matrix
    Features,
    /// Simulate contagion and write influence labels
    Label {
        #[arg(long, value_enum)]
        grid: Option<Grid>,
    },
    /// Train the ranking network on a label file
    Train {
        /// Label file (defaults to the one matching the configured rates)
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Accept labels produced under a different config hash
        #[arg(long)]
        force: bool,
    },
    /// Score and rank hub simplices with the trained model
    Rank,
    /// Kendall tau between a score file and a label file
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Take the evaluation ids from this score file's test split
        #[arg(long)]
        on: Option<PathBuf>,
        /// Use every observed id instead of a test split
        #[arg(long)]
        all: bool,
        /// Skip the config and dataset hash checks
        #[arg(long)]
        force: bool,
    },
    /// Compare immunization of top-ranked 2-simplices across methods
    Immunize {
        /// Methods to compare (ismnet, random, dc, nd, hi, cc, hd)
        #[arg(long, value_delimiter = ',', default_value = "ismnet,random,dc,nd,hi,cc,hd")]
        methods: Vec<String>,
    },
    /// Write classical centrality scores for hub simplices
    Baseline {
        /// One of dc, nd, hi, cc, hd; all when omitted
        #[arg(long)]
        method: Option<String>,
    },
    /// Train and evaluate with each configured maximum order
    SweepOrder,
    /// Collect result tables into plot-ready CSV files
    Report {
        /// Results directory (defaults to --out)
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        allow_missing: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Lift => "lift",
            Command::Features => "features",
            Command::Label { .. } => "label",
            Command::Train { .. } => "train",
            Command::Rank => "rank",
            Command::Evaluate { .. } => "evaluate",
            Command::Immunize { .. } => "immunize",
            Command::Baseline { .. } => "baseline",
            Command::SweepOrder => "sweep-order",
            Command::Report { .. } => "report",
        }
    }
}

/// Output locations inside the results directory.
pub struct Layout<'a> {
    pub root: &'a Path,
}

impl Layout<'_> {
    pub fn complex(&self) -> PathBuf {
        self.root.join("complex")
    }

    pub fn features(&self, h: usize) -> PathBuf {
        self.root.join("features").join(format!("h{h}.csv"))
    }

    pub fn labels(&self, h: usize, beta_ratio: f64, beta2_ratio: f64) -> PathBuf {
        self.root.join("labels").join(format!("h{h}_b{}_b2{}.csv", ratio_tag(beta_ratio), ratio_tag(beta2_ratio)))
    }

    pub fn model_dir(&self, h: usize) -> PathBuf {
        self.root.join("models").join(format!("h{h}"))
    }

    pub fn prediction(&self, h: usize) -> PathBuf {
        self.root.join("predictions").join(format!("ismnet_h{h}.csv"))
    }

    pub fn ranking(&self, h: usize) -> PathBuf {
        self.root.join("predictions").join(format!("ranking_h{h}.txt"))
    }

    pub fn baseline(&self, method: Baseline, h: usize) -> PathBuf {
        self.root.join("baselines").join(format!("{}_h{h}.csv", method.name()))
    }

    pub fn manifest(&self, command: &str) -> PathBuf {
        self.root.join("manifests").join(format!("{command}.json"))
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match ExperimentConfig::resolve(&cli.flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if cfg.threads > 0 {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match execute(&cli.command, &cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    name: &'static str,
    seeds: Vec<(String, u64)>,
    outputs: Vec<PathBuf>,
}

impl Run<'_> {
    fn seed(&mut self, purpose: &str) -> u64 {
        let s = self.cfg.derive_seed(purpose);
        if !self.seeds.iter().any(|(p, _)| p == purpose) {
            self.seeds.push((purpose.to_string(), s));
        }
        s
    }

    fn manifest(&self) -> Result<()> {
        let layout = Layout { root: &self.cfg.out };
        let manifest = RunManifest {
            command: self.name.to_string(),
            config_hash: self.cfg.hash(),
            root_seed: self.cfg.seed,
            seeds: self.seeds.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
            outputs: self.outputs.clone(),
            config: serde_json::to_value(self.cfg).expect("config serializes"),
        };
        io::write_json(&layout.manifest(self.name), &manifest)
    }
}

fn execute(command: &Command, cfg: &ExperimentConfig) -> Result<()> {
    let mut run = Run { cfg, name: command.name(), seeds: Vec::new(), outputs: Vec::new() };
    // written up front so a failed run still leaves a record
    run.manifest()?;
    let result = dispatch(command, &mut run);
    run.manifest()?;
    result
}

fn dispatch(command: &Command, run: &mut Run<'_>) -> Result<()> {
    match command {
        Command::Lift => lift(run),
        Command::Features => features(run),
        Command::Label { grid } => label(run, *grid),
        Command::Train { labels, force } => train(run, labels.as_deref(), *force),
        Command::Rank => rank(run),
        Command::Evaluate { pred, truth, on, all, force } => evaluate(run, pred, truth, on.as_deref(), *all, *force),
        Command::Immunize { methods } => immunize(run, methods),
        Command::Baseline { method } => baseline(run, method.as_deref()),
        Command::SweepOrder => sweep_order(run),
        Command::Report { results, allow_missing } => {
            let results = results.clone().unwrap_or_else(|| run.cfg.out.clone());
            let written = report::emit_report(&results, &run.cfg.out.join("report"), *allow_missing)?;
            run.outputs.extend(written);
            Ok(())
        }
    }
}

fn load(run: &Run<'_>) -> Result<Dataset> {
    let layout = Layout { root: &run.cfg.out };
    pipeline::dataset(run.cfg, run.cfg.max_order, Some(&layout.complex()))
}

fn lift(run: &mut Run<'_>) -> Result<()> {
    let data = pipeline::build_dataset(run.cfg.input()?, run.cfg.dataset.format, run.cfg.max_order, run.cfg.layer_cap)?;
    let dir = Layout { root: &run.cfg.out }.complex();
    pipeline::save_dataset(run.cfg, &data, &dir)?;
    if let Some(weights) = &data.weights {
        for (order, scores) in weights.iter().enumerate() {
            if scores.observed_ids().is_empty() {
                continue;
            }
            let path = dir.join(format!("weights_h{order}.csv"));
            let side = sidecar(run, &data, ScoreKind::Labels, "weight", order, 0.0, 0.0);
            io::write_scores(&path, scores, &side)?;
            run.outputs.push(path);
        }
    }
    info!("counts per order: {:?}", data.complex.counts());
    run.outputs.push(dir);
    Ok(())
}

fn features(run: &mut Run<'_>) -> Result<()> {
    let data = load(run)?;
    let h = run.cfg.hub_order;
    let x = pipeline::hub_features(&data.complex, h, &run.cfg.metrics()?, run.cfg.standardize)?;
    let path = Layout { root: &run.cfg.out }.features(h);
    io::write_text(&path, &x.to_csv())?;
    run.outputs.push(path);
    Ok(())
}

fn sidecar(
    run: &Run<'_>,
    data: &Dataset,
    kind: ScoreKind,
    method: &str,
    h: usize,
    beta_ratio: f64,
    beta2_ratio: f64,
) -> ScoreSidecar {
    ScoreSidecar {
        kind,
        method: method.to_string(),
        hub_order: h,
        max_order: run.cfg.max_order,
        beta_ratio,
        beta2_ratio,
        config_hash: run.cfg.hash(),
        dataset_hash: data.dataset_hash.clone(),
        diffusion: None,
        test_ids: None,
    }
}

/// Labels for one `(β/β_th, β₂/β)` point, written to the standard location.
fn write_labels(run: &mut Run<'_>, data: &Dataset, beta_ratio: f64, beta2_ratio: f64) -> Result<InfluenceScores> {
    let cfg = run.cfg;
    let h = cfg.hub_order;
    let seed = run.seed("labels");
    let params = pipeline::diffusion_params(&data.complex, &cfg.diffusion, beta_ratio, beta2_ratio, seed)?;
    let model = pipeline::contagion(&cfg.diffusion, beta2_ratio);
    info!("labelling {} {h}-simplices at β = {:.5}, β₂ = {:.5}", data.complex.count(h).unwrap_or(0), params.beta, params.beta2());
    let labels = generate_labels(&data.complex, h, &params, model)?;
    let mut side = sidecar(run, data, ScoreKind::Labels, "simulation", h, beta_ratio, beta2_ratio);
    side.diffusion = Some(LabelMeta {
        hub_order: h,
        beta: params.beta,
        beta2: params.beta2(),
        gamma: params.gamma,
        runs: params.runs,
        seed,
        model,
        dataset_hash: data.dataset_hash.clone(),
        config_hash: Some(cfg.hash()),
    });
    let path = Layout { root: &cfg.out }.labels(h, beta_ratio, beta2_ratio);
    io::write_scores(&path, &labels, &side)?;
    run.outputs.push(path);
    Ok(labels)
}

fn label(run: &mut Run<'_>, grid: Option<Grid>) -> Result<()> {
    let data = load(run)?;
    let d = run.cfg.diffusion.clone();
    let points: Vec<(f64, f64)> = match grid {
        None => vec![(d.beta_ratio, d.beta2_ratio)],
        Some(Grid::Sir) => d.beta_ratios.iter().map(|&r| (r, 0.0)).collect(),
        Some(Grid::Hsir) => d.beta2_ratios.iter().map(|&r| (1.0, r)).collect(),
    };
    for (r, r2) in points {
        write_labels(run, &data, r, r2)?;
    }
    Ok(())
}

fn check_hash(what: &str, expected: &str, found: &str, force: bool) -> Result<()> {
    if expected != found && !force {
        return Err(CliError::Runtime(format!(
            "{what} hash mismatch ({found} vs {expected}); rerun with --force to accept"
        )));
    }
    Ok(())
}

fn read_labels(path: &Path, data: &Dataset, n: usize) -> Result<(InfluenceScores, ScoreSidecar)> {
    let (mut labels, side) = io::read_scores(path)?;
    if labels.len() > n {
        return Err(CliError::Runtime(format!("{} has ids beyond the {n} hub simplices", path.display())));
    }
    if side.dataset_hash != data.dataset_hash {
        return Err(CliError::Runtime(format!("{} was produced from a different dataset", path.display())));
    }
    let mut padded = InfluenceScores::unobserved(n);
    for id in labels.observed_ids() {
        padded.set(id, labels.values[id]);
    }
    labels = padded;
    Ok((labels, side))
}

fn train(run: &mut Run<'_>, labels: Option<&Path>, force: bool) -> Result<()> {
    let cfg = run.cfg;
    let layout = Layout { root: &cfg.out };
    let data = load(run)?;
    let h = cfg.hub_order;
    let n = data.complex.layer(h)?.len();
    let path = labels
        .map(Path::to_path_buf)
        .unwrap_or_else(|| layout.labels(h, cfg.diffusion.beta_ratio, cfg.diffusion.beta2_ratio));
    if !path.exists() {
        return Err(CliError::Runtime(format!("label file {} not found; run `label` first", path.display())));
    }
    let (labels, side) = read_labels(&path, &data, n)?;
    check_hash("config", &cfg.hash(), &side.config_hash, force)?;
    let x = pipeline::hub_features(&data.complex, h, &cfg.metrics()?, cfg.standardize)?;
    let seed = run.seed("train");
    let model = pipeline::fit(&data.complex, h, &x, &labels, &cfg.train_config(seed))?;
    let dir = layout.model_dir(h);
    for (e, (member, log)) in model.members.iter().zip(&model.logs).enumerate() {
        let meta = serde_json::json!({
            "config_hash": cfg.hash(),
            "dataset_hash": data.dataset_hash,
            "hub_order": h,
            "labels": path,
            "beta_ratio": side.beta_ratio,
            "beta2_ratio": side.beta2_ratio,
            "epoch": log.best_epoch,
            "val_tau": log.best_val_tau,
            "train": cfg.train_config(seed),
        });
        member.save(&dir, &format!("member{e}"), meta)?;
        run.outputs.push(dir.join(format!("member{e}.json")));
        info!("member {e}: best epoch {}, validation tau {:.4}", log.best_epoch, log.best_val_tau);
    }
    let log_path = dir.join("train_log.json");
    io::write_json(&log_path, &model.logs)?;
    run.outputs.push(log_path);
    Ok(())
}

fn load_model(run: &Run<'_>, data: &Dataset) -> Result<(TrainedModel, serde_json::Value)> {
    let cfg = run.cfg;
    let h = cfg.hub_order;
    let dir = Layout { root: &cfg.out }.model_dir(h);
    let mut members = Vec::new();
    let mut meta = serde_json::Value::Null;
    for e in 0.. {
        if !dir.join(format!("member{e}.json")).exists() {
            break;
        }
        let (p, m) = ModelParams::load(&dir, &format!("member{e}"))?;
        members.push(p);
        meta = m;
    }
    if members.is_empty() {
        return Err(CliError::Runtime(format!("no trained model in {}; run `train` first", dir.display())));
    }
    check_hash("config", &cfg.hash(), meta["config_hash"].as_str().unwrap_or(""), false)?;
    let logs = serde_json::from_value(serde_json::to_value(io::read_json::<serde_json::Value>(&dir.join("train_log.json"))?).expect("json"))
        .map_err(|e| CliError::Runtime(format!("train log: {e}")))?;
    let fringes = members[0].layout.fringes.clone();
    let operators = simplex_influence::hoh::HohOperators::build(&data.complex, h, &fringes)?;
    Ok((TrainedModel { hub_order: h, operators, members, logs }, meta))
}

fn rank(run: &mut Run<'_>) -> Result<()> {
    let cfg = run.cfg;
    let layout = Layout { root: &cfg.out };
    let data = load(run)?;
    let h = cfg.hub_order;
    let (model, meta) = load_model(run, &data)?;
    let x = pipeline::hub_features(&data.complex, h, &cfg.metrics()?, cfg.standardize)?;
    let scores = model.scores(&x)?;
    let mut side = sidecar(
        run,
        &data,
        ScoreKind::Prediction,
        "ismnet",
        h,
        meta["beta_ratio"].as_f64().unwrap_or(0.0),
        meta["beta2_ratio"].as_f64().unwrap_or(0.0),
    );
    side.test_ids = Some(model.test_ids().to_vec());
    let path = layout.prediction(h);
    io::write_scores(&path, &InfluenceScores::fully_observed(scores.clone()), &side)?;
    let layer = data.complex.layer(h)?;
    let ranking: String = rank_by_score(&scores)
        .into_iter()
        .map(|id| format!("{id}\t{}\n", layer.get(id).expect("id in layer")))
        .collect();
    io::write_text(&layout.ranking(h), &ranking)?;
    run.outputs.extend([path, layout.ranking(h)]);
    Ok(())
}

fn evaluate(run: &mut Run<'_>, pred: &Path, truth: &Path, on: Option<&Path>, all: bool, force: bool) -> Result<()> {
    let (p, ps) = io::read_scores(pred)?;
    let (t, ts) = io::read_scores(truth)?;
    check_hash("config", &ts.config_hash, &ps.config_hash, force)?;
    check_hash("dataset", &ts.dataset_hash, &ps.dataset_hash, force)?;
    if ps.hub_order != ts.hub_order {
        return Err(CliError::Runtime(format!(
            "prediction covers {}-simplices, truth covers {}-simplices",
            ps.hub_order, ts.hub_order
        )));
    }
    let split = match on {
        Some(path) => io::read_json::<ScoreSidecar>(&io::sidecar_path(path))?.test_ids,
        None => ps.test_ids.clone(),
    };
    let ids: Vec<usize> = match split {
        Some(ids) if !all => ids,
        _ => t.observed_ids().into_iter().filter(|&i| p.get(i).is_some()).collect(),
    };
    let mut predicted = p.values.clone();
    predicted.resize(t.len().max(predicted.len()), f64::NAN);
    for &i in &ids {
        if p.get(i).is_none() {
            return Err(CliError::Runtime(format!("{} has no score for simplex {i}", pred.display())));
        }
    }
    let tau = pipeline::tau_on(&ids, &predicted, &t)?;
    println!("tau={tau}");
    let path = run.cfg.out.join(EVALUATION_FILE);
    let mut table = io::load_or_new(&path, &EVALUATION_HEADER)?;
    table.upsert(vec![ps.method.clone(), ratio_tag(ts.beta_ratio), ratio_tag(ts.beta2_ratio), tau.to_string()], 3);
    table.save(&path)?;
    run.outputs.push(path);
    Ok(())
}

fn baseline(run: &mut Run<'_>, method: Option<&str>) -> Result<()> {
    let data = load(run)?;
    let h = run.cfg.hub_order;
    let methods = match method {
        Some(m) => vec![m.parse::<Baseline>()?],
        None => Baseline::ALL.to_vec(),
    };
    for b in methods {
        let scores = InfluenceScores::fully_observed(b.scores(&data.complex, h)?);
        let side = sidecar(run, &data, ScoreKind::Baseline, b.name(), h, 0.0, 0.0);
        let path = Layout { root: &run.cfg.out }.baseline(b, h);
        io::write_scores(&path, &scores, &side)?;
        run.outputs.push(path);
    }
    Ok(())
}

fn immunize(run: &mut Run<'_>, methods: &[String]) -> Result<()> {
    let cfg = run.cfg;
    let layout = Layout { root: &cfg.out };
    let data = load(run)?;
    let complex: &SimplicialComplex = &data.complex;
    let n2 = complex.count(2).unwrap_or(0);
    if n2 == 0 {
        return Err(CliError::Runtime("immunization needs 2-simplices; lift with --max-order >= 2".into()));
    }
    let beta_th = epidemic_threshold(complex, cfg.diffusion.gamma)?;
    let grid = pipeline::immunization_betas(&cfg.immunization.beta_ratios, beta_th);
    let spread_seed = run.seed("immunization");
    let mut table = Table::new(&IMMUNIZATION_HEADER);
    for method in methods {
        let ids = match method.as_str() {
            "ismnet" => {
                let path = layout.prediction(2);
                let (scores, side) = io::read_scores(&path).map_err(|e| {
                    CliError::Runtime(format!("{e}; rank 2-simplices first (--hub-order 2)"))
                })?;
                check_hash("config", &cfg.hash(), &side.config_hash, false)?;
                if scores.len() != n2 {
                    return Err(CliError::Runtime(format!("{} does not cover the 2-simplices", path.display())));
                }
                pipeline::top_fraction(&scores.values, cfg.immunization.fraction)
            }
            "random" => pipeline::random_fraction(n2, cfg.immunization.fraction, run.seed("random-immunization")),
            other => {
                let b: Baseline = other.parse()?;
                pipeline::top_fraction(&b.scores(complex, 2)?, cfg.immunization.fraction)
            }
        };
        info!("{method}: immunizing {} of {n2} 2-simplices", ids.len());
        for (ratio, point) in
            pipeline::immunization_curve(complex, &ids, &cfg.immunization, &grid, cfg.diffusion.gamma, spread_seed)?
        {
            table.push(vec![
                method.clone(),
                ratio_tag(ratio),
                point.mean_recovered.to_string(),
                point.std_error.to_string(),
            ]);
        }
    }
    let path = cfg.out.join(IMMUNIZATION_FILE);
    table.save(&path)?;
    run.outputs.push(path);
    Ok(())
}

fn sweep_order(run: &mut Run<'_>) -> Result<()> {
    let cfg = run.cfg;
    let h = cfg.hub_order;
    let label_seed = run.seed("labels");
    let train_seed = run.seed("train");
    let mut table = Table::new(&ORDER_SWEEP_HEADER);
    for &f in &cfg.sweep_orders {
        if f < h.max(1) {
            log::warn!("skipping max order {f}: hub order is {h}");
            continue;
        }
        let data = pipeline::dataset(cfg, f, None)?;
        let d = &cfg.diffusion;
        let params = pipeline::diffusion_params(&data.complex, d, d.beta_ratio, d.beta2_ratio, label_seed)?;
        let labels = generate_labels(&data.complex, h, &params, pipeline::contagion(d, d.beta2_ratio))?;
        let x = pipeline::hub_features(&data.complex, h, &cfg.metrics()?, cfg.standardize)?;
        let train = simplex_influence::model::TrainConfig { max_order: Some(f), ..cfg.train_config(train_seed) };
        let model = pipeline::fit(&data.complex, h, &x, &labels, &train)?;
        let tau = pipeline::tau_on(model.test_ids(), &model.scores(&x)?, &labels)?;
        info!("max order {f}: test tau {tau:.4}");
        table.push(vec![f.to_string(), "ismnet".into(), tau.to_string()]);
    }
    let path = cfg.out.join(ORDER_SWEEP_FILE);
    table.save(&path)?;
    run.outputs.push(path);
    Ok(())
}
