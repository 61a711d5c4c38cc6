use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph {id}: {reason}")]
    Invalid { id: String, reason: String },
    #[error("graph {id}: feature matrix has {found} columns, expected {expected}")]
    FeatureWidth { id: String, expected: usize, found: usize },
}

/// An undirected graph with a node feature matrix and a class label.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Self loops are
/// never stored; propagation adds them.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphInstance {
    pub id: String,
    pub num_nodes: usize,
    edges: Vec<(usize, usize)>,
    pub features: Array2<f64>,
    pub label: usize,
}

impl GraphInstance {
    pub fn new(
        id: impl Into<String>,
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Array2<f64>,
        label: usize,
    ) -> Result<Self, GraphError> {
        let id = id.into();
        let invalid = |reason: String| GraphError::Invalid { id: id.clone(), reason };
        if num_nodes == 0 {
            return Err(invalid("graph has no nodes".into()));
        }
        if features.nrows() != num_nodes {
            return Err(invalid(format!(
                "feature matrix has {} rows for {num_nodes} nodes",
                features.nrows()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite feature value".into()));
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(invalid(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(invalid(format!("self loop on node {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(GraphInstance { id, num_nodes, edges: canon, features, label })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn adjacency(&self) -> Array2<f64> {
        self.weighted_adjacency(None)
    }

    /// Symmetric adjacency with per-edge weights (1.0 when `weights` is None).
    pub fn weighted_adjacency(&self, weights: Option<&[f64]>) -> Array2<f64> {
        let mut a = Array2::zeros((self.num_nodes, self.num_nodes));
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let w = weights.map_or(1.0, |w| w[e]);
            a[[u, v]] = w;
            a[[v, u]] = w;
        }
        a
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Active feature columns of a node (value > 0.5).
    pub fn active_features(&self, node: usize) -> Vec<usize> {
        self.features.row(node).iter().enumerate().filter(|(_, &x)| x > 0.5).map(|(c, _)| c).collect()
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Relabels nodes: old node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> GraphInstance {
        let mut features = Array2::zeros(self.features.raw_dim());
        for (i, &p) in perm.iter().enumerate() {
            features.row_mut(p).assign(&self.features.row(i));
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        GraphInstance::new(self.id.clone(), self.num_nodes, edges, features, self.label)
            .expect("a permutation preserves validity")
    }
}

/// `D^-1/2 (A + I) D^-1/2` for a (possibly weighted) adjacency matrix.
pub fn normalize_adjacency(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut hat = a.clone();
    for i in 0..n {
        hat[[i, i]] += 1.0;
    }
    let inv_sqrt: Vec<f64> = hat.rows().into_iter().map(|r| r.sum().powf(-0.5)).collect();
    for i in 0..n {
        for j in 0..n {
            hat[[i, j]] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    hat
}

/// A labelled collection of graphs sharing one feature vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub graphs: Vec<GraphInstance>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, graphs: Vec<GraphInstance>) -> Result<Self, GraphError> {
        for g in &graphs {
            if g.num_features() != feature_names.len() {
                return Err(GraphError::FeatureWidth {
                    id: g.id.clone(),
                    expected: feature_names.len(),
                    found: g.num_features(),
                });
            }
        }
        Ok(Dataset { feature_names, graphs })
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub fn get(&self, id: &str) -> Option<&GraphInstance> {
        self.graphs.iter().find(|g| g.id == id)
    }

    pub fn num_classes(&self) -> usize {
        self.graphs.iter().map(|g| g.label + 1).max().unwrap_or(0)
    }
}
