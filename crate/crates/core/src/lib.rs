//! Hybrid explanations for graph classifiers: a GCN and its mask explainer
//! are mapped into a description-logic ontology, where explainer classes are
//! learned, entailed, justified and scored for fidelity.

pub mod datasets;
pub mod gnn;
pub mod justifier;
pub mod learner;
pub mod mapper;
pub mod ontology;
pub mod pipeline;
pub mod reasoner;
pub mod workflow;
pub(crate) mod serde_expr;
