use ndarray::{concatenate, Array2, Axis};

use super::graph::{Dataset, GraphError, GraphInstance};

/// Appends one column per structure to every node's feature row. Each graph's
/// indicator vector is broadcast to all of its nodes.
pub fn augment_features_with_structures(
    graphs: &[GraphInstance],
    indicators: &[Vec<f64>],
) -> Result<Vec<GraphInstance>, GraphError> {
    if graphs.len() != indicators.len() {
        return Err(GraphError::Invalid {
            id: "<dataset>".into(),
            reason: format!("{} indicator vectors for {} graphs", indicators.len(), graphs.len()),
        });
    }
    let width = indicators.first().map_or(0, Vec::len);
    graphs
        .iter()
        .zip(indicators)
        .map(|(g, ind)| {
            if ind.len() != width {
                return Err(GraphError::FeatureWidth { id: g.id.clone(), expected: width, found: ind.len() });
            }
            let extra = Array2::from_shape_fn((g.num_nodes, width), |(_, j)| ind[j]);
            let features = concatenate(Axis(1), &[g.features.view(), extra.view()]).expect("row counts agree");
            GraphInstance::new(g.id.clone(), g.num_nodes, g.edges().iter().copied(), features, g.label)
        })
        .collect()
}

/// Dataset-level wrapper that also extends the feature vocabulary.
pub fn augment_dataset(
    dataset: &Dataset,
    structure_names: &[String],
    indicators: &[Vec<f64>],
) -> Result<Dataset, GraphError> {
    let graphs = augment_features_with_structures(&dataset.graphs, indicators)?;
    let mut names = dataset.feature_names.clone();
    names.extend(structure_names.iter().map(|s| format!("has_{s}")));
    Dataset::new(names, graphs)
}
