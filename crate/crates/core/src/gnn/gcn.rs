//! Three-layer graph convolutional classifier with hand-written backprop.
//!
//! Layer `l` computes `H' = act(N H W_l)` with `N = D^-1/2 (A+I) D^-1/2`.
//! The first two layers use the configured activation, the third is linear.
//! Node embeddings are mean-pooled and fed to a softmax head `softmax(g W_c)`
//! where `W_c` has shape `d_out x k`.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{normalize_adjacency, GraphInstance};

pub const NUM_LAYERS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GcnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("training set needs at least two classes")]
    SingleClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub layers: Vec<Array2<f64>>,
    /// `d_out x k`.
    pub classifier: Array2<f64>,
    pub activation: Activation,
}

/// Intermediate values of one forward pass, kept for backprop.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub norm: Array2<f64>,
    /// `H_0 .. H_3`; `H_3` is the node embedding matrix Z.
    pub hidden: Vec<Array2<f64>>,
    propagated: Vec<Array2<f64>>,
    pre_activation: Vec<Array2<f64>>,
    pub graph_embedding: Array1<f64>,
    pub probabilities: Array1<f64>,
}

impl ForwardCache {
    pub fn embeddings(&self) -> &Array2<f64> {
        &self.hidden[NUM_LAYERS]
    }

    pub fn predicted(&self) -> usize {
        argmax(&self.probabilities)
    }

    pub fn loss(&self, target: usize) -> f64 {
        -self.probabilities[target].max(f64::MIN_POSITIVE).ln()
    }
}

#[derive(Clone, Debug)]
pub struct Gradients {
    pub layers: Vec<Array2<f64>>,
    pub classifier: Array2<f64>,
    /// Gradient w.r.t. the normalized adjacency.
    pub norm: Array2<f64>,
    /// Gradient w.r.t. the input feature matrix.
    pub input: Array2<f64>,
}

impl GcnModel {
    /// Glorot-uniform initialization. `hidden` lists `h1, h2, d_out`.
    pub fn init(d_in: usize, hidden: [usize; NUM_LAYERS], num_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![d_in];
        dims.extend(hidden);
        let layers = dims.windows(2).map(|w| glorot(w[0], w[1], &mut rng)).collect();
        let classifier = glorot(hidden[NUM_LAYERS - 1], num_classes, &mut rng);
        GcnModel { layers, classifier, activation: Activation::Relu }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.classifier.ncols()
    }

    fn check_shapes(&self, d_in: usize) -> Result<(), GcnError> {
        if self.layers.len() != NUM_LAYERS {
            return Err(GcnError::Shape(format!("expected {NUM_LAYERS} layers, found {}", self.layers.len())));
        }
        let mut d = d_in;
        for (l, w) in self.layers.iter().enumerate() {
            if w.nrows() != d {
                return Err(GcnError::Shape(format!("layer {l} expects {} inputs, got {d}", w.nrows())));
            }
            d = w.ncols();
        }
        if self.classifier.nrows() != d {
            return Err(GcnError::Shape(format!(
                "classifier expects {} inputs, got {d}",
                self.classifier.nrows()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, graph: &GraphInstance) -> Result<ForwardCache, GcnError> {
        self.forward_with(normalize_adjacency(&graph.adjacency()), graph.features.clone())
    }

    /// Forward pass on an explicit normalized adjacency and feature matrix.
    pub fn forward_with(&self, norm: Array2<f64>, x: Array2<f64>) -> Result<ForwardCache, GcnError> {
        self.check_shapes(x.ncols())?;
        if norm.nrows() != x.nrows() || norm.ncols() != x.nrows() {
            return Err(GcnError::Shape(format!(
                "adjacency is {:?} for {} nodes",
                norm.dim(),
                x.nrows()
            )));
        }
        let mut hidden = vec![x];
        let mut propagated = Vec::with_capacity(NUM_LAYERS);
        let mut pre_activation = Vec::with_capacity(NUM_LAYERS);
        for (l, w) in self.layers.iter().enumerate() {
            let p = norm.dot(&hidden[l]);
            let s = p.dot(w);
            let act = if l + 1 == NUM_LAYERS { Activation::Identity } else { self.activation };
            hidden.push(s.mapv(|v| act.apply(v)));
            propagated.push(p);
            pre_activation.push(s);
        }
        let graph_embedding = hidden[NUM_LAYERS].mean_axis(Axis(0)).expect("at least one node");
        let logits = graph_embedding.dot(&self.classifier);
        let probabilities = softmax(&logits);
        if probabilities.iter().any(|p| !p.is_finite()) {
            return Err(GcnError::NonFinite("class probabilities".into()));
        }
        Ok(ForwardCache { norm, hidden, propagated, pre_activation, graph_embedding, probabilities })
    }

    pub fn predict(&self, graph: &GraphInstance) -> Result<usize, GcnError> {
        Ok(self.forward(graph)?.predicted())
    }

    /// Gradients of `-ln p[target]` for one graph.
    pub fn backward(&self, cache: &ForwardCache, target: usize) -> Gradients {
        let n = cache.norm.nrows() as f64;
        let mut d_logits = cache.probabilities.clone();
        d_logits[target] -= 1.0;
        let d_classifier = outer(&cache.graph_embedding, &d_logits);
        let d_graph = self.classifier.dot(&d_logits);
        let rows = cache.norm.nrows();
        let mut d_h = Array2::from_shape_fn((rows, d_graph.len()), |(_, j)| d_graph[j] / n);
        let mut d_layers = vec![Array2::zeros((0, 0)); NUM_LAYERS];
        let mut d_norm = Array2::zeros(cache.norm.raw_dim());
        for l in (0..NUM_LAYERS).rev() {
            let act = if l + 1 == NUM_LAYERS { Activation::Identity } else { self.activation };
            let mut d_s = d_h;
            d_s.zip_mut_with(&cache.pre_activation[l], |g, &s| *g *= act.derivative(s));
            d_layers[l] = cache.propagated[l].t().dot(&d_s);
            let d_p = d_s.dot(&self.layers[l].t());
            d_norm += &d_p.dot(&cache.hidden[l].t());
            d_h = cache.norm.t().dot(&d_p);
        }
        Gradients { layers: d_layers, classifier: d_classifier, norm: d_norm, input: d_h }
    }
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
}

pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exp = logits.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// L2 penalty on all weights, added to the gradient at each step.
    pub weight_decay: f64,
    pub hidden: [usize; NUM_LAYERS],
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { seed: 0, epochs: 300, learning_rate: 0.1, momentum: 0.9, weight_decay: 5e-4, hidden: [32, 32, 32] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub losses: Vec<f64>,
    pub train_accuracy: f64,
}

/// Full-batch momentum gradient descent on mean cross-entropy.
pub fn train(
    graphs: &[GraphInstance],
    num_classes: usize,
    config: &TrainConfig,
) -> Result<(GcnModel, TrainReport), GcnError> {
    let distinct: std::collections::BTreeSet<usize> = graphs.iter().map(|g| g.label).collect();
    if distinct.len() < 2 {
        return Err(GcnError::SingleClass);
    }
    if let Some(g) = graphs.iter().find(|g| g.label >= num_classes) {
        return Err(GcnError::Shape(format!("graph {} has label {} >= {num_classes}", g.id, g.label)));
    }
    let d_in = graphs[0].num_features();
    let mut model = GcnModel::init(d_in, config.hidden, num_classes, config.seed);
    let norms: Vec<Array2<f64>> = graphs.iter().map(|g| normalize_adjacency(&g.adjacency())).collect();
    let mut velocity_layers: Vec<Array2<f64>> = model.layers.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
    let mut velocity_classifier = Array2::zeros(model.classifier.raw_dim());
    let mut losses = Vec::with_capacity(config.epochs);
    let scale = 1.0 / graphs.len() as f64;

    for epoch in 0..config.epochs {
        // Per-graph work runs in parallel; the reduction below is sequential
        // in dataset order so results do not depend on thread scheduling.
        let per_graph: Vec<Result<(f64, Gradients), GcnError>> = graphs
            .par_iter()
            .zip(norms.par_iter())
            .map(|(g, norm)| {
                let cache = model.forward_with(norm.clone(), g.features.clone())?;
                Ok((cache.loss(g.label), model.backward(&cache, g.label)))
            })
            .collect();
        let mut loss = 0.0;
        let mut grad_layers: Vec<Array2<f64>> = model.layers.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let mut grad_classifier = Array2::zeros(model.classifier.raw_dim());
        for item in per_graph {
            let (l, grads) = item?;
            loss += l * scale;
            for (acc, g) in grad_layers.iter_mut().zip(&grads.layers) {
                acc.scaled_add(scale, g);
            }
            grad_classifier.scaled_add(scale, &grads.classifier);
        }
        if !loss.is_finite() {
            return Err(GcnError::Diverged { epoch, loss });
        }
        losses.push(loss);
        for ((w, v), g) in model.layers.iter_mut().zip(&mut velocity_layers).zip(&grad_layers) {
            step(w, v, g, config);
        }
        step(&mut model.classifier, &mut velocity_classifier, &grad_classifier, config);
    }
    let train_accuracy = accuracy(&model, graphs)?;
    log::info!("trained {} epochs, final loss {:.4}, train accuracy {:.3}", config.epochs, losses.last().copied().unwrap_or(f64::NAN), train_accuracy);
    Ok((model, TrainReport { losses, train_accuracy }))
}

fn step(w: &mut Array2<f64>, v: &mut Array2<f64>, g: &Array2<f64>, config: &TrainConfig) {
    *v *= config.momentum;
    v.scaled_add(-config.learning_rate, g);
    v.scaled_add(-config.learning_rate * config.weight_decay, &*w);
    *w += &*v;
}

pub fn accuracy(model: &GcnModel, graphs: &[GraphInstance]) -> Result<f64, GcnError> {
    if graphs.is_empty() {
        return Ok(0.0);
    }
    let correct: Result<Vec<bool>, GcnError> =
        graphs.par_iter().map(|g| Ok(model.predict(g)? == g.label)).collect();
    Ok(correct?.into_iter().filter(|&c| c).count() as f64 / graphs.len() as f64)
}
