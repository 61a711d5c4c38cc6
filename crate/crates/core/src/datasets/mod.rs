//! Graph datasets: a JSON interchange format and a seeded generator with
//! planted motifs.

mod io;
mod synthetic;

pub use io::{load_dataset, parse_dataset, render_dataset, save_dataset};
pub use synthetic::{
    default_mapping, domain_ontology, generate, BaseModel, GroundTruth, SyntheticData, SyntheticSpec, ATOMS,
    PLANTED_CLASS,
};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("graph {graph}: {reason}")]
    Malformed { graph: String, reason: String },
    #[error("infeasible generator settings: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid dataset json: {0}")]
    Json(#[from] serde_json::Error),
}
