//! Graph classification: graph containers, the GCN classifier and the
//! mask explainer.

mod augment;
mod explainer;
mod gcn;
mod graph;

pub use augment::{augment_dataset, augment_features_with_structures};
pub use explainer::{
    binarize, explain_masks, mask_objective, masked_adjacency, masked_forward, sigmoid, ExplainConfig,
    MaskOptimizer, MaskPair,
};
pub use gcn::{
    accuracy, argmax, softmax, train, Activation, ForwardCache, GcnError, GcnModel, Gradients, TrainConfig,
    TrainReport, NUM_LAYERS,
};
pub use graph::{normalize_adjacency, Dataset, GraphError, GraphInstance};
