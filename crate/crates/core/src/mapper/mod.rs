//! Graph-to-ontology mapping.
//!
//! Every graph `i` becomes an individual `graph_<i>` with its bonds
//! (`edge_<i>_<j>_<k>`, `j < k`), active node features (`feature_<i>_<v>`)
//! and matched structures (`structure_<i>_<Class>_<n>`). Individuals of a
//! masked subgraph carry an extra `_sub` suffix. The μ map records which
//! edge individuals make up each structure individual.

mod mu;
mod patterns;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mu::{mu_inverse, parse_mu, render_mu, MuMap};
pub use patterns::{chordless_cycles, extract_structures, StructureMatch, StructurePattern, MAX_RING_SIZE};

use crate::gnn::{GraphInstance, MaskPair};
use crate::ontology::{Axiom, Individual, Ontology};

pub const SUB_SUFFIX: &str = "_sub";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("no class rule for feature {0:?}")]
    Unmappable(String),
    #[error("name {0:?} is not declared in the domain ontology")]
    Undeclared(String),
    #[error("invalid structure pattern: {0}")]
    InvalidPattern(String),
    #[error("duplicate structure class {0:?}")]
    DuplicateStructure(String),
    #[error("mask belongs to graph {mask}, not {graph}")]
    MaskMismatch { mask: String, graph: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureRule {
    pub class: String,
    pub pattern: StructurePattern,
}

/// Emits `Value(property, graph, true|false)` depending on whether the
/// pattern occurs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagRule {
    pub property: String,
    pub pattern: StructurePattern,
}

/// Type, role and structure tables for the mapping.
///
/// Structure rules are tried in order. A match whose edge set was already
/// claimed by an earlier rule is skipped, so specific classes should come
/// before general ones (the class hierarchy recovers the general type).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub graph_class: String,
    pub edge_class: String,
    pub feature_classes: BTreeMap<String, String>,
    pub edge_role: String,
    pub feature_role: String,
    pub structure_role: String,
    #[serde(default)]
    pub structures: Vec<StructureRule>,
    #[serde(default)]
    pub flags: Vec<FlagRule>,
}

impl MappingConfig {
    pub fn new(feature_classes: BTreeMap<String, String>) -> Self {
        MappingConfig {
            graph_class: "Compound".into(),
            edge_class: "Bond".into(),
            feature_classes,
            edge_role: "hasBond".into(),
            feature_role: "hasAtom".into(),
            structure_role: "hasStructure".into(),
            structures: Vec::new(),
            flags: Vec::new(),
        }
    }

    /// Checks patterns and that every target name is declared in `delta`.
    pub fn validate(&self, delta: &Ontology) -> Result<(), MapError> {
        let classes = std::iter::once(&self.graph_class)
            .chain([&self.edge_class])
            .chain(self.feature_classes.values())
            .chain(self.structures.iter().map(|s| &s.class));
        for c in classes {
            if !delta.classes().contains(c) {
                return Err(MapError::Undeclared(c.clone()));
            }
        }
        for r in [&self.edge_role, &self.feature_role, &self.structure_role] {
            if !delta.roles().contains(r) {
                return Err(MapError::Undeclared(r.clone()));
            }
        }
        for f in &self.flags {
            if !delta.bool_props().contains(&f.property) {
                return Err(MapError::Undeclared(f.property.clone()));
            }
            f.pattern.validate()?;
        }
        let mut seen = BTreeSet::new();
        for s in &self.structures {
            s.pattern.validate()?;
            if !seen.insert(&s.class) {
                return Err(MapError::DuplicateStructure(s.class.clone()));
            }
        }
        Ok(())
    }
}

/// Result of mapping one graph or subgraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MappedGraph {
    pub graph: Individual,
    pub axioms: BTreeSet<Axiom>,
    pub mu: MuMap,
    pub edges: Vec<Individual>,
    pub features: Vec<Individual>,
    pub structures: Vec<Individual>,
}

impl MappedGraph {
    /// Edge and feature individuals, the comparison set for fidelity.
    pub fn parts(&self) -> BTreeSet<Individual> {
        self.edges.iter().chain(&self.features).cloned().collect()
    }
}

pub fn graph_individual(id: &str) -> Individual {
    Individual(format!("graph_{id}"))
}

pub fn sub_individual(id: &str) -> Individual {
    Individual(format!("graph_{id}{SUB_SUFFIX}"))
}

pub fn edge_individual(id: &str, u: usize, v: usize) -> Individual {
    Individual(format!("edge_{id}_{}_{}", u.min(v), u.max(v)))
}

/// Removes the subgraph suffix, mapping `_sub` individuals onto the base graph.
pub fn strip_sub(ind: &Individual) -> Individual {
    Individual(ind.as_str().strip_suffix(SUB_SUFFIX).unwrap_or(ind.as_str()).to_string())
}

/// Maps a full graph.
pub fn map_graph(
    graph: &GraphInstance,
    feature_names: &[String],
    config: &MappingConfig,
    id_prefix: &str,
) -> Result<MappedGraph, MapError> {
    map_view(graph, feature_names, config, id_prefix, "")
}

/// Maps the binarized explainer subgraph: the kept edges, their endpoint
/// nodes, and those nodes' active features restricted to the kept feature
/// dimensions. Structures are matched inside that subgraph only.
pub fn map_masked_subgraph(
    graph: &GraphInstance,
    feature_names: &[String],
    mask: &MaskPair,
    config: &MappingConfig,
    id_prefix: &str,
) -> Result<MappedGraph, MapError> {
    if mask.graph_id != graph.id {
        return Err(MapError::MaskMismatch { mask: mask.graph_id.clone(), graph: graph.id.clone() });
    }
    let nodes: BTreeSet<usize> = mask.binarized_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let kept_columns: BTreeSet<usize> = mask.binarized_features.iter().copied().collect();
    let mut features = graph.features.clone();
    for ((i, c), x) in features.indexed_iter_mut() {
        if !nodes.contains(&i) || !kept_columns.contains(&c) {
            *x = 0.0;
        }
    }
    let sub = GraphInstance::new(
        graph.id.clone(),
        graph.num_nodes,
        mask.binarized_edges.iter().copied(),
        features,
        graph.label,
    )
    .map_err(|e| MapError::InvalidPattern(e.to_string()))?;
    map_view(&sub, feature_names, config, id_prefix, SUB_SUFFIX)
}

fn map_view(
    graph: &GraphInstance,
    feature_names: &[String],
    config: &MappingConfig,
    id: &str,
    suffix: &str,
) -> Result<MappedGraph, MapError> {
    let name = |base: String| Individual(format!("{base}{suffix}"));
    let eta = name(format!("graph_{id}"));
    let mut out = MappedGraph { graph: eta.clone(), ..MappedGraph::default() };
    out.axioms.insert(Axiom::ClassAssertion { class: config.graph_class.clone(), individual: eta.clone() });

    let mut edge_names = BTreeMap::new();
    for &(u, v) in graph.edges() {
        let upsilon = name(edge_individual(id, u, v).0);
        out.axioms.insert(Axiom::ClassAssertion { class: config.edge_class.clone(), individual: upsilon.clone() });
        out.axioms.insert(Axiom::RoleAssertion {
            role: config.edge_role.clone(),
            subject: eta.clone(),
            object: upsilon.clone(),
        });
        edge_names.insert((u, v), upsilon.clone());
        out.edges.push(upsilon);
    }

    for v in 0..graph.num_nodes {
        let active = graph.active_features(v);
        for &c in &active {
            let fname = &feature_names[c];
            let class = config.feature_classes.get(fname).ok_or_else(|| MapError::Unmappable(fname.clone()))?;
            let base = if active.len() == 1 { format!("feature_{id}_{v}") } else { format!("feature_{id}_{v}_{fname}") };
            let chi = name(base);
            out.axioms.insert(Axiom::ClassAssertion { class: class.clone(), individual: chi.clone() });
            out.axioms.insert(Axiom::RoleAssertion {
                role: config.feature_role.clone(),
                subject: eta.clone(),
                object: chi.clone(),
            });
            out.features.push(chi);
        }
    }

    let mut claimed: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    for rule in &config.structures {
        let mut number = 0;
        for m in extract_structures(graph, feature_names, &rule.pattern)? {
            if !claimed.insert(m.edges.clone()) {
                continue;
            }
            number += 1;
            let psi = name(format!("structure_{id}_{}_{number}", rule.class));
            out.axioms.insert(Axiom::ClassAssertion { class: rule.class.clone(), individual: psi.clone() });
            out.axioms.insert(Axiom::RoleAssertion {
                role: config.structure_role.clone(),
                subject: eta.clone(),
                object: psi.clone(),
            });
            out.mu.insert(psi.clone(), m.edges.iter().map(|e| edge_names[e].clone()).collect());
            out.structures.push(psi);
        }
    }

    for flag in &config.flags {
        let present = !extract_structures(graph, feature_names, &flag.pattern)?.is_empty();
        out.axioms.insert(Axiom::BoolAssertion {
            property: flag.property.clone(),
            individual: eta.clone(),
            value: present,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn names() -> Vec<String> {
        ["C", "H", "N", "O"].iter().map(|s| s.to_string()).collect()
    }

    fn config() -> MappingConfig {
        let classes = [("C", "Carbon"), ("H", "Hydrogen"), ("N", "Nitrogen"), ("O", "Oxygen")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let mut cfg = MappingConfig::new(classes);
        cfg.structures.push(StructureRule {
            class: "Methyl".into(),
            pattern: StructurePattern::MotifGraph {
                nodes: vec![Some("C".into()), Some("H".into()), Some("H".into()), Some("H".into())],
                edges: vec![(0, 1), (0, 2), (0, 3)],
            },
        });
        cfg
    }

    fn graph(labels: &[Option<usize>], edges: &[(usize, usize)]) -> GraphInstance {
        let mut x = Array2::zeros((labels.len(), 4));
        for (i, l) in labels.iter().enumerate() {
            if let Some(l) = l {
                x[[i, *l]] = 1.0;
            }
        }
        GraphInstance::new("1", labels.len(), edges.iter().copied(), x, 0).unwrap()
    }

    #[test]
    fn five_axioms_for_an_edge_and_a_feature() {
        let g = graph(&[Some(0), None], &[(0, 1)]);
        let m = map_graph(&g, &names(), &config(), "1").unwrap();
        assert_eq!(m.axioms.len(), 5);
        assert!(m.axioms.contains(&Axiom::role("hasBond", "graph_1", "edge_1_0_1")));
        assert!(m.axioms.contains(&Axiom::class("Carbon", "feature_1_0")));
    }

    #[test]
    fn methyl_goes_into_mu() {
        let g = graph(&[Some(0), Some(1), Some(1), Some(1)], &[(0, 1), (0, 2), (0, 3)]);
        let m = map_graph(&g, &names(), &config(), "1").unwrap();
        let psi = Individual::new("structure_1_Methyl_1");
        let expected: BTreeSet<Individual> =
            ["edge_1_0_1", "edge_1_0_2", "edge_1_0_3"].iter().map(|s| Individual::new(*s)).collect();
        assert_eq!(m.mu.edges_of(&psi), Some(&expected));
        assert_eq!(m.axioms.len(), 1 + 2 * 3 + 2 * 4 + 2);
    }

    #[test]
    fn featureless_graph_has_no_atoms() {
        let g = graph(&[None, None], &[(0, 1)]);
        let m = map_graph(&g, &names(), &config(), "1").unwrap();
        assert!(m.axioms.iter().all(|a| !matches!(a, Axiom::RoleAssertion { role, .. } if role == "hasAtom")));
    }

    #[test]
    fn unmappable_feature() {
        let mut cfg = config();
        cfg.feature_classes.remove("C");
        let g = graph(&[Some(0)], &[]);
        assert_eq!(map_graph(&g, &names(), &cfg, "1"), Err(MapError::Unmappable("C".into())));
    }

    #[test]
    fn masked_subgraph_variants() {
        let g = graph(&[Some(0), Some(1), Some(1), Some(1), Some(2)], &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let full = map_graph(&g, &names(), &config(), "1").unwrap();
        let sub = map_masked_subgraph(&g, &names(), &MaskPair::full(&g, 0), &config(), "1").unwrap();
        let stripped: BTreeSet<String> = sub.axioms.iter().map(|a| a.to_string().replace("_sub", "")).collect();
        let plain: BTreeSet<String> = full.axioms.iter().map(|a| a.to_string()).collect();
        assert_eq!(stripped, plain);
        assert_eq!(sub.graph, Individual::new("graph_1_sub"));

        let empty = map_masked_subgraph(&g, &names(), &MaskPair::empty(&g, 0), &config(), "1").unwrap();
        assert_eq!(empty.axioms, BTreeSet::from([Axiom::class("Compound", "graph_1_sub")]));

        let mut methyl_only = MaskPair::full(&g, 0);
        methyl_only.binarized_edges = vec![(0, 1), (0, 2), (0, 3)];
        let m = map_masked_subgraph(&g, &names(), &methyl_only, &config(), "1").unwrap();
        assert_eq!(m.structures, vec![Individual::new("structure_1_Methyl_1_sub")]);
        assert_eq!(m.features.len(), 4);
    }

    #[test]
    fn validate_against_delta() {
        let mut delta = Ontology::new();
        for c in ["Compound", "Bond", "Carbon", "Hydrogen", "Nitrogen", "Oxygen", "Methyl"] {
            delta.declare_class(c).unwrap();
        }
        for r in ["hasBond", "hasAtom", "hasStructure"] {
            delta.declare_role(r).unwrap();
        }
        assert_eq!(config().validate(&delta), Ok(()));
        let mut cfg = config();
        cfg.edge_class = "Edge".into();
        assert_eq!(cfg.validate(&delta), Err(MapError::Undeclared("Edge".into())));
    }

    #[test]
    fn specific_rule_claims_edges_first() {
        let mut cfg = config();
        cfg.structures.push(StructureRule {
            class: "AnyStar".into(),
            pattern: StructurePattern::MotifGraph { nodes: vec![None; 4], edges: vec![(0, 1), (0, 2), (0, 3)] },
        });
        let g = graph(&[Some(0), Some(1), Some(1), Some(1)], &[(0, 1), (0, 2), (0, 3)]);
        let m = map_graph(&g, &names(), &cfg, "1").unwrap();
        assert_eq!(m.structures, vec![Individual::new("structure_1_Methyl_1")]);
    }
}
