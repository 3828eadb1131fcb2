//! The spectral ranking network.
//!
//! For every fringe order `f` the hub features pass through a two-layer
//! perceptron `φ_f`, then through a Chebyshev filter of the HoH adjacency
//! `A_{h,f}`:
//!
//! ```text
//! Y_f = Σ_{k=0..K} c_{f,k} T_k(A_{h,f}) φ_f(X),   c_{f,0} = ω_{f,0},  c_{f,k} = ω_{f,k} / k
//! ```
//!
//! The per-fringe embeddings are concatenated, mapped to one logit by a linear
//! readout and squashed by the logistic function. Training minimises the
//! pairwise loss `-Σ tanh(ŝ_i - ŝ_j) R_ij` with Adam, using hand-written
//! reverse-mode gradients.

use std::fs;
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centrality::FeatureMatrix;
use crate::complex::SimplicialComplex;
use crate::diffusion::stream_key;
use crate::error::{Error, Result};
use crate::evaluation::{kendall_tau, split, RankPair};
use crate::hoh::{chebyshev_apply, HohOperators};
use crate::scores::InfluenceScores;

const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Pairs sampled per epoch; `None` means `20 × |train|`.
    pub pair_samples: Option<usize>,
    pub split: (f64, f64, f64),
    /// Stop after this many epochs without a better validation tau (0 disables).
    pub patience: usize,
    pub seed: u64,
    /// Chebyshev order `K`.
    pub order: usize,
    pub hidden: usize,
    pub embed: usize,
    /// Highest fringe order; `None` uses every layer of the complex.
    pub max_order: Option<usize>,
    /// Number of independently seeded models averaged at prediction time.
    pub ensemble: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            epochs: 500,
            pair_samples: None,
            split: (0.6, 0.2, 0.2),
            patience: 0,
            seed: 0,
            order: 3,
            hidden: 16,
            embed: 8,
            max_order: None,
            ensemble: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.split;
        if a <= 0.0 || b < 0.0 || c < 0.0 || ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("split ratios {:?} must sum to 1", self.split)));
        }
        if self.order < 1 {
            return Err(Error::Invalid("Chebyshev order K must be at least 1".into()));
        }
        if self.hidden == 0 || self.embed == 0 || self.ensemble == 0 {
            return Err(Error::Invalid("hidden width, embedding width and ensemble size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Invalid("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Shapes of the network and the position of every tensor in the flat
/// parameter vector. Per fringe, in order: `w1 (d×H)`, `b1 (H)`,
/// `w2 (H×d′)`, `b2 (d′)`, `omega (K+1)`; then `readout_w (F·d′)` and
/// `readout_b (1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub inputs: usize,
    pub hidden: usize,
    pub embed: usize,
    pub order: usize,
    pub fringes: Vec<usize>,
    pub tensors: Vec<TensorSpec>,
}

const PER_FRINGE: usize = 5;

impl Layout {
    pub fn new(inputs: usize, hidden: usize, embed: usize, order: usize, fringes: Vec<usize>) -> Self {
        let mut tensors = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, shape: Vec<usize>| {
            let spec = TensorSpec { name, shape, offset };
            offset += spec.len();
            tensors.push(spec);
        };
        for f in &fringes {
            push(format!("fringe{f}.w1"), vec![inputs, hidden]);
            push(format!("fringe{f}.b1"), vec![hidden]);
            push(format!("fringe{f}.w2"), vec![hidden, embed]);
            push(format!("fringe{f}.b2"), vec![embed]);
            push(format!("fringe{f}.omega"), vec![order + 1]);
        }
        push("readout.w".into(), vec![fringes.len() * embed]);
        push("readout.b".into(), vec![1]);
        Layout { inputs, hidden, embed, order, fringes, tensors }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(TensorSpec::len).sum()
    }

    fn span(&self, tensor: usize) -> std::ops::Range<usize> {
        let t = &self.tensors[tensor];
        t.offset..t.offset + t.len()
    }

    fn readout(&self) -> usize {
        self.fringes.len() * PER_FRINGE
    }
}

/// All learnable parameters as one flat vector plus the layout that slices it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layout: Layout,
    pub values: Vec<f64>,
}

macro_rules! view2 {
    ($name:ident, $name_mut:ident, $slot:expr) => {
        pub fn $name(&self, q: usize) -> ArrayView2<'_, f64> {
            self.matrix(q * PER_FRINGE + $slot)
        }
        pub fn $name_mut(&mut self, q: usize) -> ArrayViewMut2<'_, f64> {
            self.matrix_mut(q * PER_FRINGE + $slot)
        }
    };
}

macro_rules! view1 {
    ($name:ident, $name_mut:ident, $slot:expr) => {
        pub fn $name(&self, q: usize) -> ArrayView1<'_, f64> {
            self.vector(q * PER_FRINGE + $slot)
        }
        pub fn $name_mut(&mut self, q: usize) -> ArrayViewMut1<'_, f64> {
            self.vector_mut(q * PER_FRINGE + $slot)
        }
    };
}

impl ModelParams {
    pub fn zeros(layout: Layout) -> Self {
        let values = vec![0.0; layout.parameter_count()];
        ModelParams { layout, values }
    }

    /// Fan-in scaled uniform weights, zero biases, and Chebyshev weights that
    /// start as the identity filter (`ω_0 = 1`, others 0).
    pub fn init(layout: Layout, rng: &mut impl Rng) -> Self {
        let mut p = ModelParams::zeros(layout);
        let (d, hidden, embed) = (p.layout.inputs, p.layout.hidden, p.layout.embed);
        for q in 0..p.layout.fringes.len() {
            uniform_fill(p.w1_mut(q), d, rng);
            uniform_fill(p.w2_mut(q), hidden, rng);
            p.omega_mut(q)[0] = 1.0;
        }
        let fan_in = p.layout.fringes.len() * embed;
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        p.readout_w_mut().mapv_inplace(|_| rng.gen_range(-bound..=bound));
        p
    }

    fn matrix(&self, tensor: usize) -> ArrayView2<'_, f64> {
        let shape = &self.layout.tensors[tensor].shape;
        ArrayView2::from_shape((shape[0], shape[1]), &self.values[self.layout.span(tensor)]).expect("layout shape")
    }

    fn matrix_mut(&mut self, tensor: usize) -> ArrayViewMut2<'_, f64> {
        let shape = self.layout.tensors[tensor].shape.clone();
        let span = self.layout.span(tensor);
        ArrayViewMut2::from_shape((shape[0], shape[1]), &mut self.values[span]).expect("layout shape")
    }

    fn vector(&self, tensor: usize) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[self.layout.span(tensor)])
    }

    fn vector_mut(&mut self, tensor: usize) -> ArrayViewMut1<'_, f64> {
        let span = self.layout.span(tensor);
        ArrayViewMut1::from(&mut self.values[span])
    }

    view2!(w1, w1_mut, 0);
    view1!(b1, b1_mut, 1);
    view2!(w2, w2_mut, 2);
    view1!(b2, b2_mut, 3);
    view1!(omega, omega_mut, 4);

    pub fn readout_w(&self) -> ArrayView1<'_, f64> {
        self.vector(self.layout.readout())
    }

    pub fn readout_w_mut(&mut self) -> ArrayViewMut1<'_, f64> {
        self.vector_mut(self.layout.readout())
    }

    pub fn readout_b(&self) -> f64 {
        self.values[self.layout.span(self.layout.readout() + 1).start]
    }

    pub fn set_readout_b(&mut self, b: f64) {
        let at = self.layout.span(self.layout.readout() + 1).start;
        self.values[at] = b;
    }

    /// Chebyshev coefficients `c_{f,k}` of fringe slot `q`.
    pub fn coefficients(&self, q: usize) -> Vec<f64> {
        self.omega(q).iter().enumerate().map(|(k, &w)| if k == 0 { w } else { w / k as f64 }).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Writes `<stem>.json` (manifest) and `<stem>.bin` (little-endian f64 blob).
    pub fn save(&self, dir: &Path, stem: &str, meta: serde_json::Value) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let blob: Vec<u8> = self.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        let blob_name = format!("{stem}.bin");
        let blob_path = dir.join(&blob_name);
        fs::write(&blob_path, blob).map_err(|e| Error::io(&blob_path, e))?;
        let manifest = Checkpoint { layout: self.layout.clone(), blob: blob_name, meta };
        let path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path, stem: &str) -> Result<(Self, serde_json::Value)> {
        let path = dir.join(format!("{stem}.json"));
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        let blob_path = dir.join(&manifest.blob);
        let bytes = fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
        let expected = manifest.layout.parameter_count() * 8;
        if bytes.len() != expected {
            return Err(Error::Invalid(format!(
                "{}: blob holds {} bytes, layout needs {expected}",
                blob_path.display(),
                bytes.len()
            )));
        }
        let values =
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        Ok((ModelParams { layout: manifest.layout, values }, manifest.meta))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    layout: Layout,
    blob: String,
    meta: serde_json::Value,
}

fn uniform_fill(mut w: ArrayViewMut2<'_, f64>, fan_in: usize, rng: &mut impl Rng) {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    w.mapv_inplace(|_| rng.gen_range(-bound..=bound));
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn leaky_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Intermediate values of one forward pass, kept for the backward pass.
struct FringeTrace {
    pre: Array2<f64>,
    hidden: Array2<f64>,
    terms: Vec<Array2<f64>>,
}

struct Trace {
    fringes: Vec<FringeTrace>,
    embedding: Array2<f64>,
    scores: Array1<f64>,
}

fn check_inputs(ops: &HohOperators, x: ArrayView2<'_, f64>, params: &ModelParams) -> Result<()> {
    if x.ncols() != params.layout.inputs {
        return Err(Error::Shape(format!(
            "features have {} columns, model expects {}",
            x.ncols(),
            params.layout.inputs
        )));
    }
    for &f in &params.layout.fringes {
        let op = ops.get(f).ok_or_else(|| Error::Invalid(format!("no operator for fringe order {f}")))?;
        if op.adjacency.rows() != x.nrows() {
            return Err(Error::Shape(format!(
                "operator for fringe {f} has {} hubs, features have {} rows",
                op.adjacency.rows(),
                x.nrows()
            )));
        }
    }
    Ok(())
}

fn forward_trace(ops: &HohOperators, x: ArrayView2<'_, f64>, params: &ModelParams) -> Result<Trace> {
    check_inputs(ops, x, params)?;
    let n = x.nrows();
    let embed = params.layout.embed;
    let mut embedding = Array2::zeros((n, params.layout.fringes.len() * embed));
    let mut fringes = Vec::with_capacity(params.layout.fringes.len());
    for (q, &f) in params.layout.fringes.iter().enumerate() {
        let pre = x.dot(&params.w1(q)) + params.b1(q);
        let hidden = pre.mapv(leaky);
        let mapped = hidden.dot(&params.w2(q)) + params.b2(q);
        let op = ops.get(f).expect("checked");
        let terms = chebyshev_apply(&op.adjacency, mapped.view(), params.layout.order)?;
        let mut block = embedding.slice_mut(s![.., q * embed..(q + 1) * embed]);
        for (c, t) in params.coefficients(q).into_iter().zip(&terms) {
            block.scaled_add(c, t);
        }
        fringes.push(FringeTrace { pre, hidden, terms });
    }
    let scores = (embedding.dot(&params.readout_w()) + params.readout_b()).mapv(logistic);
    Ok(Trace { fringes, embedding, scores })
}

/// Predicted influence of every hub simplex, in `(0, 1)`.
pub fn forward(ops: &HohOperators, x: &FeatureMatrix, params: &ModelParams) -> Result<InfluenceScores> {
    let trace = forward_trace(ops, x.values.view(), params)?;
    Ok(InfluenceScores::fully_observed(trace.scores.to_vec()))
}

/// `-Σ tanh(ŝ_i - ŝ_j) R_ij` over the given pairs.
pub fn ranking_loss(predicted: &[f64], pairs: &[RankPair]) -> f64 {
    -pairs
        .iter()
        .filter(|p| p.relation != 0)
        .map(|p| (predicted[p.i] - predicted[p.j]).tanh() * p.relation as f64)
        .sum::<f64>()
}

fn loss_and_score_grad(predicted: &[f64], pairs: &[RankPair]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; predicted.len()];
    let mut loss = 0.0;
    for p in pairs.iter().filter(|p| p.relation != 0) {
        let r = p.relation as f64;
        let t = (predicted[p.i] - predicted[p.j]).tanh();
        loss -= t * r;
        let g = -r * (1.0 - t * t);
        grad[p.i] += g;
        grad[p.j] -= g;
    }
    (loss, grad)
}

fn backward(
    ops: &HohOperators,
    x: ArrayView2<'_, f64>,
    params: &ModelParams,
    trace: &Trace,
    score_grad: &[f64],
) -> Result<ModelParams> {
    let mut grad = ModelParams::zeros(params.layout.clone());
    let embed = params.layout.embed;
    let logits_grad: Array1<f64> =
        trace.scores.iter().zip(score_grad).map(|(&s, &g)| g * s * (1.0 - s)).collect();

    grad.readout_w_mut().assign(&trace.embedding.t().dot(&logits_grad));
    grad.set_readout_b(logits_grad.sum());
    let w = params.readout_w();

    for (q, &f) in params.layout.fringes.iter().enumerate() {
        let ft = &trace.fringes[q];
        let wq = w.slice(s![q * embed..(q + 1) * embed]);
        // dY_q = g ⊗ w_q
        let block_grad = logits_grad
            .view()
            .insert_axis(Axis(1))
            .dot(&wq.insert_axis(Axis(0)));

        let coeffs = params.coefficients(q);
        {
            let mut omega = grad.omega_mut(q);
            for (k, t) in ft.terms.iter().enumerate() {
                let dc = (t * &block_grad).sum();
                omega[k] = if k == 0 { dc } else { dc / k as f64 };
            }
        }

        // T_k(A) is symmetric, so dφ = Σ_k c_k T_k(A) dY_q.
        let op = ops.get(f).expect("checked in forward");
        let back_terms = chebyshev_apply(&op.adjacency, block_grad.view(), params.layout.order)?;
        let mut mapped_grad = Array2::zeros(block_grad.raw_dim());
        for (c, t) in coeffs.iter().zip(&back_terms) {
            mapped_grad.scaled_add(*c, t);
        }

        grad.w2_mut(q).assign(&ft.hidden.t().dot(&mapped_grad));
        grad.b2_mut(q).assign(&mapped_grad.sum_axis(Axis(0)));
        let mut pre_grad = mapped_grad.dot(&params.w2(q).t());
        pre_grad.zip_mut_with(&ft.pre, |g, &z| *g *= leaky_grad(z));
        grad.w1_mut(q).assign(&x.t().dot(&pre_grad));
        grad.b1_mut(q).assign(&pre_grad.sum_axis(Axis(0)));
    }
    Ok(grad)
}

/// Loss and its exact gradient with respect to every parameter.
pub fn gradients(
    ops: &HohOperators,
    x: &FeatureMatrix,
    params: &ModelParams,
    pairs: &[RankPair],
) -> Result<(f64, ModelParams)> {
    let trace = forward_trace(ops, x.values.view(), params)?;
    if let Some(p) = pairs.iter().find(|p| p.i >= trace.scores.len() || p.j >= trace.scores.len()) {
        return Err(Error::Invalid(format!("pair ({}, {}) is out of range", p.i, p.j)));
    }
    let scores = trace.scores.to_vec();
    let (loss, score_grad) = loss_and_score_grad(&scores, pairs);
    let grad = backward(ops, x.values.view(), params, &trace, &score_grad)?;
    Ok((loss, grad))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(len: usize, lr: f64) -> Self {
        Adam { m: vec![0.0; len], v: vec![0.0; len], step: 0, lr }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + Self::EPS);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_tau: f64,
    pub val_tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub train_ids: Vec<usize>,
    pub val_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_tau: f64,
}

fn tau_on(ids: &[usize], predicted: &[f64], labels: &InfluenceScores) -> f64 {
    if ids.len() < 2 {
        return 0.0;
    }
    let pred: Vec<f64> = ids.iter().map(|&i| predicted[i]).collect();
    let truth = labels.select(ids).expect("ids are observed");
    kendall_tau(&pred, &truth).unwrap_or(0.0)
}

/// Random pairs of distinct train ids, each oriented `i < j`, with relations
/// taken from the labels. When the budget covers every pair, all pairs are used.
fn sample_pairs(train: &[usize], labels: &InfluenceScores, budget: usize, rng: &mut impl Rng) -> Vec<RankPair> {
    let n = train.len();
    let all = n * (n - 1) / 2;
    let make = |a: usize, b: usize| {
        let (i, j) = (a.min(b), a.max(b));
        let (si, sj) = (labels.values[i], labels.values[j]);
        let relation = if si > sj {
            1
        } else if si < sj {
            -1
        } else {
            0
        };
        RankPair { i, j, relation }
    };
    if all <= budget {
        let mut pairs = Vec::with_capacity(all);
        for a in 0..n {
            for b in a + 1..n {
                pairs.push(make(train[a], train[b]));
            }
        }
        return pairs;
    }
    (0..budget)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            make(train[a], train[b])
        })
        .collect()
}

/// Trains one model on precomputed operators.
pub fn train_with_operators(
    ops: &HohOperators,
    x: &FeatureMatrix,
    labels: &InfluenceScores,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainLog)> {
    config.validate()?;
    if labels.len() != x.rows() {
        return Err(Error::Shape(format!("{} labels for {} feature rows", labels.len(), x.rows())));
    }
    let observed = labels.observed_ids();
    if observed.len() < 2 {
        return Err(Error::Invalid("training needs at least two observed labels".into()));
    }
    let parts = split(&observed, config.split, stream_key(&[config.seed, 1]))?;
    if parts.train.len() < 2 {
        return Err(Error::Invalid(format!("only {} observed items fall in the train split", parts.train.len())));
    }
    let layout = Layout::new(x.values.ncols(), config.hidden, config.embed, config.order, ops.fringe_orders());
    let mut rng = ChaCha8Rng::seed_from_u64(stream_key(&[config.seed, 2]));
    let mut params = ModelParams::init(layout, &mut rng);
    let mut adam = Adam::new(params.values.len(), config.learning_rate);
    let budget = config.pair_samples.unwrap_or(20 * parts.train.len()).max(1);
    let selection_ids = if parts.val.len() >= 2 { &parts.val } else { &parts.train };

    let initial = forward_trace(ops, x.values.view(), &params)?.scores.to_vec();
    let mut best = params.clone();
    let mut best_tau = tau_on(selection_ids, &initial, labels);
    let mut best_epoch = 0;
    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let pairs = sample_pairs(&parts.train, labels, budget, &mut rng);
        let (loss, grad) = gradients(ops, x, &params, &pairs)?;
        adam.update(&mut params.values, &grad.values);
        if !params.is_finite() {
            return Err(Error::Invalid(format!("parameters diverged at epoch {epoch}")));
        }
        let predicted = forward_trace(ops, x.values.view(), &params)?.scores.to_vec();
        let train_tau = tau_on(&parts.train, &predicted, labels);
        let val_tau = tau_on(selection_ids, &predicted, labels);
        epochs.push(EpochRecord { epoch, loss, train_tau, val_tau });
        if val_tau > best_tau {
            best_tau = val_tau;
            best = params.clone();
            best_epoch = epoch;
        } else if config.patience > 0 && epoch - best_epoch >= config.patience {
            break;
        }
    }
    let log = TrainLog {
        train_ids: parts.train,
        val_ids: parts.val,
        test_ids: parts.test,
        epochs,
        best_epoch,
        best_val_tau: best_tau,
    };
    Ok((best, log))
}

/// Fringe orders used for hub order `h`: every non-empty layer up to the
/// configured maximum except `h` itself.
pub fn fringe_orders(complex: &SimplicialComplex, h: usize, config: &TrainConfig) -> Vec<usize> {
    HohOperators::available_fringes(complex, h, config.max_order.unwrap_or(complex.max_order()))
}

/// Builds the operators for hub order `h` and trains one model.
pub fn train(
    complex: &SimplicialComplex,
    h: usize,
    x: &FeatureMatrix,
    labels: &InfluenceScores,
    config: &TrainConfig,
) -> Result<(HohOperators, ModelParams, TrainLog)> {
    let fringes = fringe_orders(complex, h, config);
    if fringes.is_empty() {
        return Err(Error::Invalid(format!("hub order {h} has no non-empty fringe layer")));
    }
    let ops = HohOperators::build(complex, h, &fringes)?;
    let (params, log) = train_with_operators(&ops, x, labels, config)?;
    Ok((ops, params, log))
}

/// Trains `config.ensemble` models with derived seeds.
pub fn train_ensemble(
    ops: &HohOperators,
    x: &FeatureMatrix,
    labels: &InfluenceScores,
    config: &TrainConfig,
) -> Result<Vec<(ModelParams, TrainLog)>> {
    (0..config.ensemble)
        .map(|e| {
            let member = TrainConfig {
                seed: if e == 0 { config.seed } else { stream_key(&[config.seed, 100 + e as u64]) },
                ..config.clone()
            };
            train_with_operators(ops, x, labels, &member)
        })
        .collect()
}

/// Mean predicted score over an ensemble.
pub fn ensemble_scores(ops: &HohOperators, x: &FeatureMatrix, models: &[ModelParams]) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(Error::Invalid("ensemble is empty".into()));
    }
    let mut total = vec![0.0; x.rows()];
    for m in models {
        for (t, s) in total.iter_mut().zip(forward(ops, x, m)?.values) {
            *t += s;
        }
    }
    Ok(total.into_iter().map(|t| t / models.len() as f64).collect())
}

/// Ids sorted by descending score, ties broken by ascending id.
pub fn rank_by_score(scores: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ids
}

/// Ranked hub ids predicted by an ensemble (a single model is an ensemble of one).
pub fn predict_rank(ops: &HohOperators, x: &FeatureMatrix, models: &[ModelParams]) -> Result<Vec<usize>> {
    Ok(rank_by_score(&ensemble_scores(ops, x, models)?))
}
