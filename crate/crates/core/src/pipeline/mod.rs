//! Explainer classes, their entailment on individual graphs, justification,
//! fidelity against the explainer subgraph, and aggregate evaluation.

mod classes;
mod evaluate;
mod explain;

pub use classes::{learn_explainer_classes, render_pool, with_pool, ClassKind, ExplainerClass};
pub(crate) use classes::learn_prepared;
pub use evaluate::{
    baseline_pure_ill, evaluate, pearson, BaselineResult, CategoryStats, ClassStats, EvaluationReport, Partition,
    Summary,
};
pub use explain::{
    entail_classes, entailment_frequency, fidelity, fidelity_of_sets, fidelity_support, final_explanation,
    normalize_subgraph, EntailedClass, EntailedRecord, Explanation, ExplanationRecord, InstanceExplainer,
};

use crate::justifier::JustifyError;
use crate::learner::LearnError;
use crate::ontology::OntologyError;
use crate::reasoner::ReasonerError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no example graph is predicted as category {0}")]
    CategoryAbsent(usize),
    #[error("every example graph is predicted as category {0}; no negative examples")]
    NoNegatives(usize),
    #[error("unknown graph {0}")]
    UnknownGraph(String),
    #[error("unknown individual {0}")]
    UnknownIndividual(String),
    #[error("entailment frequency over an empty set of individuals")]
    EmptyIndividuals,
    #[error("explainer class {0} has no definition in the ontology")]
    MissingDefinition(String),
    #[error("the learner returned no classifier")]
    NoClassifier,
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Justify(#[from] JustifyError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}
