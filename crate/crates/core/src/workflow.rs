//! The end-to-end run as separate stage functions. Each stage is a pure
//! function of its inputs, so the command-line tool can persist stage outputs
//! and the test suites can chain the same calls in memory.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gnn::{
    accuracy, augment_dataset, explain_masks, train, Dataset, ExplainConfig, GcnError, GcnModel, GraphError,
    GraphInstance, MaskPair, TrainConfig, TrainReport,
};
use crate::learner::{LearnerConfig, Refiner};
use crate::mapper::{
    extract_structures, graph_individual, map_graph, map_masked_subgraph, MapError, MappingConfig, MuMap,
};
use crate::ontology::{Individual, Ontology, OntologyError};
use crate::pipeline::{
    baseline_pure_ill, evaluate, learn_prepared, with_pool, BaselineResult, ClassKind, EvaluationReport,
    ExplainerClass, Explanation, InstanceExplainer, PipelineError,
};
use crate::reasoner::Reasoner;

#[derive(Debug, thiserror::Error)]
pub enum WorkflowError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown graph {0}")]
    UnknownGraph(String),
    #[error(transparent)]
    Gcn(#[from] GcnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Fraction of graphs used for training.
    pub split: f64,
    pub train: TrainConfig,
    pub explain: ExplainConfig,
    pub learner: LearnerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            split: 0.5,
            train: TrainConfig::default(),
            explain: ExplainConfig::default(),
            learner: LearnerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), WorkflowError> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(WorkflowError::Config(format!("split must be in (0, 1), got {}", self.split)));
        }
        if !(0.0..1.0).contains(&self.learner.cutoff) {
            return Err(WorkflowError::Config(format!("cutoff must be in [0, 1), got {}", self.learner.cutoff)));
        }
        if !(0.0..=1.0).contains(&self.explain.threshold) {
            return Err(WorkflowError::Config(format!("mask threshold must be in [0, 1], got {}", self.explain.threshold)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Stratified by label; each side keeps dataset order.
pub fn split_dataset(dataset: &Dataset, fraction: f64, seed: u64) -> Split {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = BTreeSet::new();
    let labels: BTreeSet<usize> = dataset.graphs.iter().map(|g| g.label).collect();
    for label in labels {
        let mut ids: Vec<&str> = dataset.graphs.iter().filter(|g| g.label == label).map(|g| g.id.as_str()).collect();
        ids.shuffle(&mut rng);
        let take = ((ids.len() as f64) * fraction).round() as usize;
        in_train.extend(ids.into_iter().take(take));
    }
    let (train, test): (Vec<&GraphInstance>, Vec<&GraphInstance>) =
        dataset.graphs.iter().partition(|g| in_train.contains(g.id.as_str()));
    Split {
        train: train.into_iter().map(|g| g.id.clone()).collect(),
        test: test.into_iter().map(|g| g.id.clone()).collect(),
    }
}

pub fn select(dataset: &Dataset, ids: &[String]) -> Result<Vec<GraphInstance>, WorkflowError> {
    ids.iter().map(|id| dataset.get(id).cloned().ok_or_else(|| WorkflowError::UnknownGraph(id.clone()))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: GcnModel,
    pub report: TrainReport,
    pub test_accuracy: f64,
}

pub fn train_stage(dataset: &Dataset, split: &Split, config: &TrainConfig) -> Result<TrainOutcome, WorkflowError> {
    let train_graphs = select(dataset, &split.train)?;
    let test_graphs = select(dataset, &split.test)?;
    let classes = dataset.num_classes().max(2);
    let (model, report) = train(&train_graphs, classes, config)?;
    let test_accuracy = accuracy(&model, &test_graphs)?;
    Ok(TrainOutcome { model, report, test_accuracy })
}

pub fn predict_all(model: &GcnModel, dataset: &Dataset) -> Result<BTreeMap<String, usize>, WorkflowError> {
    let predicted: Result<Vec<(String, usize)>, GcnError> =
        dataset.graphs.par_iter().map(|g| Ok((g.id.clone(), model.predict(g)?))).collect();
    Ok(predicted?.into_iter().collect())
}

/// Masks for every graph, in dataset order.
pub fn explain_stage(model: &GcnModel, dataset: &Dataset, config: &ExplainConfig) -> Result<Vec<MaskPair>, WorkflowError> {
    let masks: Result<Vec<MaskPair>, GcnError> =
        dataset.graphs.par_iter().map(|g| explain_masks(model, g, config)).collect();
    Ok(masks?)
}

/// The ontologies and side tables produced by mapping a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    /// Domain ontology plus every mapped graph.
    pub base: Ontology,
    /// `base` plus every mapped explainer subgraph.
    pub full: Ontology,
    pub mu: MuMap,
    /// Edge and feature individuals of each graph's explainer subgraph, with
    /// their `_sub` suffix.
    pub subgraphs: BTreeMap<String, BTreeSet<Individual>>,
    /// Structure individuals found in each full graph.
    pub structures: BTreeMap<String, Vec<Individual>>,
}

pub fn map_stage(
    delta: &Ontology,
    dataset: &Dataset,
    masks: &[MaskPair],
    mapping: &MappingConfig,
) -> Result<Corpus, WorkflowError> {
    mapping.validate(delta)?;
    let by_id: BTreeMap<&str, &MaskPair> = masks.iter().map(|m| (m.graph_id.as_str(), m)).collect();
    let mapped: Result<Vec<_>, WorkflowError> = dataset
        .graphs
        .par_iter()
        .map(|g| {
            let mask = by_id.get(g.id.as_str()).ok_or_else(|| WorkflowError::UnknownGraph(g.id.clone()))?;
            let full = map_graph(g, &dataset.feature_names, mapping, &g.id)?;
            let sub = map_masked_subgraph(g, &dataset.feature_names, mask, mapping, &g.id)?;
            Ok((full, sub))
        })
        .collect();
    let mut base = delta.clone();
    let mut mu = MuMap::new();
    let mut subgraphs = BTreeMap::new();
    let mut structures = BTreeMap::new();
    let mut sub_axioms = Vec::new();
    for (g, (full, sub)) in dataset.graphs.iter().zip(mapped?) {
        for axiom in full.axioms {
            base.add_axiom(axiom)?;
        }
        mu.extend(full.mu);
        structures.insert(g.id.clone(), full.structures);
        subgraphs.insert(g.id.clone(), sub.edges.iter().chain(&sub.features).cloned().collect());
        sub_axioms.extend(sub.axioms);
    }
    let mut full = base.clone();
    for axiom in sub_axioms {
        full.add_axiom(axiom)?;
    }
    Ok(Corpus { base, full, mu, subgraphs, structures })
}

/// Explainer classes of both kinds for every category, learned on `examples`.
pub fn learn_stage(
    ontology: &Ontology,
    predictions: &BTreeMap<String, usize>,
    examples: &[String],
    config: &LearnerConfig,
) -> Result<Vec<ExplainerClass>, WorkflowError> {
    let reasoner = Reasoner::new(ontology);
    let refiner = Refiner::new(ontology);
    let categories: BTreeSet<usize> = examples.iter().filter_map(|id| predictions.get(id).copied()).collect();
    let mut pool = Vec::new();
    for kind in [ClassKind::InputOutput, ClassKind::Importance] {
        for &category in &categories {
            pool.extend(learn_prepared(&reasoner, &refiner, predictions, examples, category, kind, config)?);
        }
    }
    Ok(pool)
}

/// Final explanations for `ids`, in the given order.
pub fn explain_instances_stage(
    ontology: &Ontology,
    pool: &[ExplainerClass],
    corpus: &Corpus,
    predictions: &BTreeMap<String, usize>,
    ids: &[String],
) -> Result<Vec<Explanation>, WorkflowError> {
    let with_defs = with_pool(ontology, pool).map_err(WorkflowError::from)?;
    let explainer = InstanceExplainer::new(&with_defs);
    let empty = BTreeSet::new();
    let out: Result<Vec<Explanation>, WorkflowError> = ids
        .par_iter()
        .map(|id| {
            let predicted = *predictions.get(id).ok_or_else(|| WorkflowError::UnknownGraph(id.clone()))?;
            let sub = corpus.subgraphs.get(id).unwrap_or(&empty);
            Ok(explainer.explain(pool, id, &graph_individual(id), predicted, &corpus.mu, sub)?)
        })
        .collect();
    out
}

pub fn labels_of(dataset: &Dataset, ids: &[String]) -> Result<BTreeMap<String, usize>, WorkflowError> {
    ids.iter()
        .map(|id| dataset.get(id).map(|g| (id.clone(), g.label)).ok_or_else(|| WorkflowError::UnknownGraph(id.clone())))
        .collect()
}

pub fn evaluate_stage(
    explanations: &[Explanation],
    truth: &BTreeMap<String, usize>,
    pool: &[ExplainerClass],
) -> Result<EvaluationReport, WorkflowError> {
    Ok(evaluate(explanations, truth, pool)?)
}

/// One bit per structure rule: does the full graph contain that structure.
pub fn structure_indicators(dataset: &Dataset, mapping: &MappingConfig) -> Result<Vec<Vec<f64>>, WorkflowError> {
    dataset
        .graphs
        .iter()
        .map(|g| {
            mapping
                .structures
                .iter()
                .map(|rule| {
                    let found = extract_structures(g, &dataset.feature_names, &rule.pattern)?;
                    Ok(if found.is_empty() { 0.0 } else { 1.0 })
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolDifference {
    pub category: usize,
    /// Importance-class expressions with no equal input-output class.
    pub importance_only: Vec<String>,
    pub input_output_only: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub gnn_test_accuracy: f64,
    pub ill: BaselineResult,
    /// Test accuracy of the same network trained on structure-augmented features.
    pub augmented_test_accuracy: f64,
    pub pool_differences: Vec<PoolDifference>,
}

impl BaselineComparison {
    pub fn render(&self) -> String {
        let mut out = format!(
            "GNN test accuracy:\t{:.4}\npure ILL test accuracy:\t{:.4}\t{}\nGNN with structure features:\t{:.4}\n",
            self.gnn_test_accuracy, self.ill.test_accuracy, self.ill.expr, self.augmented_test_accuracy
        );
        for d in &self.pool_differences {
            out.push_str(&format!("\ncategory {}: importance-only classes\n", d.category));
            for e in &d.importance_only {
                out.push_str(&format!("  {e}\n"));
            }
            out.push_str(&format!("category {}: input-output-only classes\n", d.category));
            for e in &d.input_output_only {
                out.push_str(&format!("  {e}\n"));
            }
        }
        out
    }
}

pub fn pool_differences(pool: &[ExplainerClass]) -> Vec<PoolDifference> {
    let categories: BTreeSet<usize> = pool.iter().map(|c| c.category).collect();
    categories
        .into_iter()
        .map(|category| {
            let exprs = |kind: ClassKind| -> BTreeSet<String> {
                pool.iter().filter(|c| c.kind == kind && c.category == category).map(|c| c.expr.to_string()).collect()
            };
            let io = exprs(ClassKind::InputOutput);
            let imp = exprs(ClassKind::Importance);
            PoolDifference {
                category,
                importance_only: imp.difference(&io).cloned().collect(),
                input_output_only: io.difference(&imp).cloned().collect(),
            }
        })
        .collect()
}

/// Pure ILL on ground truth versus the network, plus the network retrained on
/// structure-augmented features.
#[allow(clippy::too_many_arguments)]
pub fn compare_baselines(
    dataset: &Dataset,
    split: &Split,
    base: &Ontology,
    mapping: &MappingConfig,
    gnn_test_accuracy: f64,
    pool: &[ExplainerClass],
    positive_category: usize,
    config: &RunConfig,
) -> Result<BaselineComparison, WorkflowError> {
    let train_labels = labels_of(dataset, &split.train)?;
    let test_labels = labels_of(dataset, &split.test)?;
    let ill = baseline_pure_ill(base, &train_labels, &test_labels, positive_category, &config.learner)?;
    let names: Vec<String> = mapping.structures.iter().map(|r| r.class.clone()).collect();
    let augmented = augment_dataset(dataset, &names, &structure_indicators(dataset, mapping)?)?;
    let outcome = train_stage(&augmented, split, &config.train)?;
    Ok(BaselineComparison {
        gnn_test_accuracy,
        ill,
        augmented_test_accuracy: outcome.test_accuracy,
        pool_differences: pool_differences(pool),
    })
}

/// Everything an in-memory run produces.
pub struct RunOutput {
    pub split: Split,
    pub training: TrainOutcome,
    pub predictions: BTreeMap<String, usize>,
    pub masks: Vec<MaskPair>,
    pub corpus: Corpus,
    pub pool: Vec<ExplainerClass>,
    pub explanations: Vec<Explanation>,
    pub report: EvaluationReport,
}

/// Runs every stage on one dataset, explaining and evaluating the test split
/// against `truth`.
pub fn run_all(
    dataset: &Dataset,
    delta: &Ontology,
    mapping: &MappingConfig,
    truth: &BTreeMap<String, usize>,
    config: &RunConfig,
) -> Result<RunOutput, WorkflowError> {
    config.validate()?;
    let split = split_dataset(dataset, config.split, config.seed);
    let train_config = TrainConfig { seed: config.seed, ..config.train.clone() };
    let training = train_stage(dataset, &split, &train_config)?;
    let predictions = predict_all(&training.model, dataset)?;
    let masks = explain_stage(&training.model, dataset, &config.explain)?;
    let corpus = map_stage(delta, dataset, &masks, mapping)?;
    let pool = learn_stage(&corpus.full, &predictions, &split.train, &config.learner)?;
    let explanations = explain_instances_stage(&corpus.full, &pool, &corpus, &predictions, &split.test)?;
    let test_truth: BTreeMap<String, usize> =
        split.test.iter().filter_map(|id| truth.get(id).map(|&l| (id.clone(), l))).collect();
    let report = evaluate_stage(&explanations, &test_truth, &pool)?;
    Ok(RunOutput { split, training, predictions, masks, corpus, pool, explanations, report })
}
