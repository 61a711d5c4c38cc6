use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::gnn::{Dataset, GraphInstance};
use crate::ontology::is_valid_name;

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    feature_names: Vec<String>,
    graphs: Vec<GraphRecord>,
}

/// One graph. `edges` lists both directions of every undirected edge.
#[derive(Serialize, Deserialize)]
struct GraphRecord {
    id: String,
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    node_features: Vec<Vec<String>>,
    label: usize,
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    fs::write(path, render_dataset(dataset))?;
    Ok(())
}

pub fn render_dataset(dataset: &Dataset) -> String {
    let graphs = dataset
        .graphs
        .iter()
        .map(|g| {
            let mut edges: Vec<(usize, usize)> = g.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
            edges.sort_unstable();
            GraphRecord {
                id: g.id.clone(),
                num_nodes: g.num_nodes,
                edges,
                node_features: (0..g.num_nodes)
                    .map(|v| g.active_features(v).into_iter().map(|c| dataset.feature_names[c].clone()).collect())
                    .collect(),
                label: g.label,
            }
        })
        .collect();
    let file = DatasetFile { feature_names: dataset.feature_names.clone(), graphs };
    serde_json::to_string_pretty(&file).expect("dataset serializes") + "\n"
}

pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let file: DatasetFile = serde_json::from_str(text)?;
    let width = file.feature_names.len();
    let mut seen_ids = std::collections::BTreeSet::new();
    let mut graphs = Vec::with_capacity(file.graphs.len());
    for rec in file.graphs {
        let bad = |reason: String| DatasetError::Malformed { graph: rec.id.clone(), reason };
        if !rec.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || rec.id.is_empty() {
            return Err(bad("id must use letters, digits and underscores".into()));
        }
        if !seen_ids.insert(rec.id.clone()) {
            return Err(bad("duplicate graph id".into()));
        }
        if rec.node_features.len() != rec.num_nodes {
            return Err(bad(format!("{} feature rows for {} nodes", rec.node_features.len(), rec.num_nodes)));
        }
        let directed: std::collections::BTreeSet<(usize, usize)> = rec.edges.iter().copied().collect();
        if let Some(&(u, v)) = directed.iter().find(|&&(u, v)| !directed.contains(&(v, u))) {
            return Err(bad(format!("asymmetric adjacency: ({u}, {v}) without ({v}, {u})")));
        }
        let mut x = Array2::zeros((rec.num_nodes, width));
        for (v, names) in rec.node_features.iter().enumerate() {
            for name in names {
                let c = file
                    .feature_names
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| bad(format!("node {v} has unknown feature {name:?}")))?;
                x[[v, c]] = 1.0;
            }
        }
        let g = GraphInstance::new(rec.id.clone(), rec.num_nodes, directed.iter().copied(), x, rec.label)
            .map_err(|e| bad(e.to_string()))?;
        graphs.push(g);
    }
    if let Some(bad_name) = file.feature_names.iter().find(|f| !is_valid_name(f)) {
        return Err(DatasetError::Malformed { graph: "<header>".into(), reason: format!("invalid feature name {bad_name:?}") });
    }
    Ok(Dataset::new(file.feature_names, graphs).expect("widths agree by construction"))
}
