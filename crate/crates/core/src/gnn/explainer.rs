//! Mask-based explainer: learns a soft weight per undirected edge and per
//! feature dimension that preserves the model's prediction while staying
//! small and close to binary.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::gcn::{ForwardCache, GcnError, GcnModel};
use super::graph::{normalize_adjacency, GraphInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskOptimizer {
    Momentum,
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub lambda_size: f64,
    pub lambda_entropy: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub threshold: f64,
    pub top_k: usize,
    /// Initial logit of every edge weight.
    pub edge_init_logit: f64,
    /// Initial logit of every feature-dimension weight.
    pub feature_init_logit: f64,
    pub optimizer: MaskOptimizer,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            lambda_size: 0.005,
            lambda_entropy: 0.1,
            epochs: 100,
            learning_rate: 0.01,
            threshold: 0.5,
            top_k: 6,
            edge_init_logit: 1.0,
            feature_init_logit: 2.0,
            optimizer: MaskOptimizer::Momentum,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskPair {
    pub graph_id: String,
    /// The graph's edges, aligned with `edge_weights`.
    pub edges: Vec<(usize, usize)>,
    pub edge_weights: Vec<f64>,
    pub feature_weights: Vec<f64>,
    pub binarized_edges: Vec<(usize, usize)>,
    pub binarized_features: Vec<usize>,
    pub predicted: usize,
}

impl MaskPair {
    /// A mask keeping every edge and feature dimension.
    pub fn full(graph: &GraphInstance, predicted: usize) -> Self {
        MaskPair {
            graph_id: graph.id.clone(),
            edges: graph.edges().to_vec(),
            edge_weights: vec![1.0; graph.edges().len()],
            feature_weights: vec![1.0; graph.num_features()],
            binarized_edges: graph.edges().to_vec(),
            binarized_features: (0..graph.num_features()).collect(),
            predicted,
        }
    }

    pub fn empty(graph: &GraphInstance, predicted: usize) -> Self {
        MaskPair {
            graph_id: graph.id.clone(),
            edges: graph.edges().to_vec(),
            edge_weights: vec![0.0; graph.edges().len()],
            feature_weights: vec![0.0; graph.num_features()],
            binarized_edges: Vec::new(),
            binarized_features: Vec::new(),
            predicted,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn entropy(s: f64) -> f64 {
    let s = s.clamp(1e-12, 1.0 - 1e-12);
    -(s * s.ln() + (1.0 - s) * (1.0 - s).ln())
}

/// Forward pass on `(A ⊙ edge_weights, X ⊙ feature_weights)`.
pub fn masked_forward(
    model: &GcnModel,
    graph: &GraphInstance,
    edge_weights: &[f64],
    feature_weights: &[f64],
) -> Result<ForwardCache, GcnError> {
    let norm = normalize_adjacency(&graph.weighted_adjacency(Some(edge_weights)));
    let mut x = graph.features.clone();
    for mut row in x.rows_mut() {
        row.iter_mut().zip(feature_weights).for_each(|(v, w)| *v *= w);
    }
    model.forward_with(norm, x)
}

/// Mask objective and its gradient w.r.t. the edge and feature logits.
pub fn mask_objective(
    model: &GcnModel,
    graph: &GraphInstance,
    target: usize,
    edge_logits: &[f64],
    feature_logits: &[f64],
    config: &ExplainConfig,
) -> Result<(f64, Vec<f64>, Vec<f64>), GcnError> {
    let se: Vec<f64> = edge_logits.iter().map(|&m| sigmoid(m)).collect();
    let sx: Vec<f64> = feature_logits.iter().map(|&m| sigmoid(m)).collect();
    let cache = masked_forward(model, graph, &se, &sx)?;
    let grads = model.backward(&cache, target);
    let mut loss = cache.loss(target);

    let weighted = graph.weighted_adjacency(Some(&se));
    let degree: Vec<f64> = (0..graph.num_nodes).map(|i| 1.0 + weighted.row(i).sum()).collect();
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| d.powf(-0.5)).collect();
    let norm = &cache.norm;
    let d_norm = &grads.norm;
    let d_degree: Vec<f64> = (0..graph.num_nodes)
        .map(|i| {
            let row: f64 = (0..graph.num_nodes).map(|b| d_norm[[i, b]] * norm[[i, b]]).sum();
            let col: f64 = (0..graph.num_nodes).map(|a| d_norm[[a, i]] * norm[[a, i]]).sum();
            -(row + col) / (2.0 * degree[i])
        })
        .collect();

    let num_edges = se.len().max(1) as f64;
    let mut d_edges = Vec::with_capacity(se.len());
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let s = se[e];
        let d_weight = (d_norm[[u, v]] + d_norm[[v, u]]) * inv_sqrt[u] * inv_sqrt[v] + d_degree[u] + d_degree[v];
        let d_reg = config.lambda_size + config.lambda_entropy / num_edges * (-edge_logits[e]);
        d_edges.push((d_weight + d_reg) * s * (1.0 - s));
        loss += config.lambda_size * s + config.lambda_entropy / num_edges * entropy(s);
    }

    let num_features = sx.len().max(1) as f64;
    let mut d_features = Vec::with_capacity(sx.len());
    for (c, &s) in sx.iter().enumerate() {
        let d_weight: f64 = (0..graph.num_nodes).map(|i| grads.input[[i, c]] * graph.features[[i, c]]).sum();
        let d_reg = config.lambda_size + config.lambda_entropy / num_features * (-feature_logits[c]);
        d_features.push((d_weight + d_reg) * s * (1.0 - s));
        loss += config.lambda_size * s + config.lambda_entropy / num_features * entropy(s);
    }
    Ok((loss, d_edges, d_features))
}

struct Adam {
    m: Array1<f64>,
    v: Array1<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: Array1::zeros(n), v: Array1::zeros(n), t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grads[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grads[i] * grads[i];
            let m_hat = self.m[i] / (1.0 - B1.powi(self.t));
            let v_hat = self.v[i] / (1.0 - B2.powi(self.t));
            params[i] -= lr * m_hat / (v_hat.sqrt() + 1e-8);
        }
    }
}

struct Momentum {
    velocity: Vec<f64>,
}

impl Momentum {
    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        for i in 0..params.len() {
            self.velocity[i] = 0.9 * self.velocity[i] - lr * grads[i];
            params[i] += self.velocity[i];
        }
    }
}

enum Optimizer {
    Adam(Adam, Adam),
    Momentum(Momentum, Momentum),
}

/// Learns edge and feature masks for the model's own prediction on `graph`.
/// The model is only read.
pub fn explain_masks(model: &GcnModel, graph: &GraphInstance, config: &ExplainConfig) -> Result<MaskPair, GcnError> {
    let predicted = model.predict(graph)?;
    let mut edge_logits = vec![config.edge_init_logit; graph.edges().len()];
    let mut feature_logits = vec![config.feature_init_logit; graph.num_features()];
    let mut optimizer = match config.optimizer {
        MaskOptimizer::Adam => Optimizer::Adam(Adam::new(edge_logits.len()), Adam::new(feature_logits.len())),
        MaskOptimizer::Momentum => Optimizer::Momentum(
            Momentum { velocity: vec![0.0; edge_logits.len()] },
            Momentum { velocity: vec![0.0; feature_logits.len()] },
        ),
    };
    for _ in 0..config.epochs {
        let (_, d_edges, d_features) =
            mask_objective(model, graph, predicted, &edge_logits, &feature_logits, config)?;
        match &mut optimizer {
            Optimizer::Adam(e, f) => {
                e.step(&mut edge_logits, &d_edges, config.learning_rate);
                f.step(&mut feature_logits, &d_features, config.learning_rate);
            }
            Optimizer::Momentum(e, f) => {
                e.step(&mut edge_logits, &d_edges, config.learning_rate);
                f.step(&mut feature_logits, &d_features, config.learning_rate);
            }
        }
    }
    let edge_weights: Vec<f64> = edge_logits.iter().map(|&m| sigmoid(m)).collect();
    let feature_weights: Vec<f64> = feature_logits.iter().map(|&m| sigmoid(m)).collect();
    Ok(binarize(graph, edge_weights, feature_weights, predicted, config))
}

/// Keeps edges with weight at or above the threshold (the `top_k` heaviest,
/// lower edge index first on ties) and feature dimensions at or above it.
pub fn binarize(
    graph: &GraphInstance,
    edge_weights: Vec<f64>,
    feature_weights: Vec<f64>,
    predicted: usize,
    config: &ExplainConfig,
) -> MaskPair {
    let mut kept: Vec<usize> = (0..edge_weights.len()).filter(|&e| edge_weights[e] >= config.threshold).collect();
    kept.sort_by(|&a, &b| edge_weights[b].total_cmp(&edge_weights[a]).then(a.cmp(&b)));
    kept.truncate(config.top_k);
    kept.sort_unstable();
    let binarized_edges = kept.iter().map(|&e| graph.edges()[e]).collect();
    let binarized_features =
        (0..feature_weights.len()).filter(|&c| feature_weights[c] >= config.threshold).collect();
    MaskPair {
        graph_id: graph.id.clone(),
        edges: graph.edges().to_vec(),
        edge_weights,
        feature_weights,
        binarized_edges,
        binarized_features,
        predicted,
    }
}

/// Dense masked adjacency, for reporting.
pub fn masked_adjacency(graph: &GraphInstance, mask: &MaskPair) -> Array2<f64> {
    graph.weighted_adjacency(Some(&mask.edge_weights))
}
