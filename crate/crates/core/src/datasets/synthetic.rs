//! Planted-motif molecule generator.
//!
//! Graphs are random trees over a small atom alphabet. Class-1 graphs carry a
//! nitro group (one N bonded to two O) with probability `motif_probability`;
//! the remaining class-1 graphs carry several phosphorus atoms instead.
//! Class-0 graphs usually carry a decoy with the same atoms as the motif, each
//! bonded to a tree carbon, so atom counts alone do not reveal the label and
//! only class-1 graphs contain an N-O bond. Both classes receive the same distractor rings. No graph contains an N with two
//! O neighbours unless it was planted.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::gnn::{Dataset, GraphInstance};
use crate::mapper::{MappingConfig, StructurePattern, StructureRule};
use crate::ontology::{parse_ontology, Ontology};

pub const ATOMS: [&str; 5] = ["C", "N", "O", "H", "P"];
pub const PLANTED_CLASS: &str = "NitroGroup";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseModel {
    Tree,
    /// Trees with distractor rings attached.
    RingAugmented,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_graphs: usize,
    /// Size range of the random tree before motifs and rings are attached.
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub base: BaseModel,
    /// Chance that a tree atom with at most two bonds is O or N instead of C.
    pub heteroatom_rate: f64,
    pub motif_probability: f64,
    /// Phosphorus atoms given to class-1 graphs without the motif.
    pub alternative_phosphorus: usize,
    /// Probability that a class-0 graph has a single phosphorus atom.
    pub decoy_phosphorus_probability: f64,
    /// Probability that a class-0 graph has the motif's atoms, unbonded as a motif.
    pub decoy_motif_probability: f64,
    pub carbon_ring_probability: f64,
    pub hetero_ring_probability: f64,
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_graphs: 200,
            min_nodes: 8,
            max_nodes: 14,
            base: BaseModel::RingAugmented,
            heteroatom_rate: 0.0,
            motif_probability: 0.85,
            alternative_phosphorus: 4,
            decoy_phosphorus_probability: 0.3,
            decoy_motif_probability: 0.9,
            carbon_ring_probability: 0.5,
            hetero_ring_probability: 0.3,
            label_noise: 0.0,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(DatasetError::Infeasible(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        prob("motif_probability", self.motif_probability)?;
        prob("decoy_phosphorus_probability", self.decoy_phosphorus_probability)?;
        prob("decoy_motif_probability", self.decoy_motif_probability)?;
        prob("carbon_ring_probability", self.carbon_ring_probability)?;
        prob("hetero_ring_probability", self.hetero_ring_probability)?;
        prob("label_noise", self.label_noise)?;
        prob("heteroatom_rate", self.heteroatom_rate)?;
        if self.min_nodes < 1 || self.min_nodes > self.max_nodes {
            return Err(DatasetError::Infeasible(format!(
                "node range {}..={} is empty",
                self.min_nodes, self.max_nodes
            )));
        }
        if self.num_graphs < 2 {
            return Err(DatasetError::Infeasible("need at least two graphs".into()));
        }
        Ok(())
    }
}

/// Ground truth for one generated graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub graph_id: String,
    /// Label before noise was applied.
    pub clean_label: usize,
    pub motif: Option<String>,
    pub motif_nodes: Vec<usize>,
    pub motif_edges: Vec<(usize, usize)>,
}

pub struct SyntheticData {
    pub dataset: Dataset,
    pub truth: Vec<GroundTruth>,
    pub delta: Ontology,
    pub mapping: MappingConfig,
}

/// Domain ontology for the generated molecules.
pub fn domain_ontology() -> Ontology {
    parse_ontology(
        "# molecules and their parts\n\
         DeclareClass(Compound)\n\
         DeclareClass(Bond)\n\
         DeclareRole(hasBond)\n\
         DeclareRole(hasAtom)\n\
         DeclareRole(hasStructure)\n\
         SubClassOf(Carbon, Atom)\n\
         SubClassOf(Nitrogen, Atom)\n\
         SubClassOf(Oxygen, Atom)\n\
         SubClassOf(Hydrogen, Atom)\n\
         SubClassOf(Phosphorus, Atom)\n\
         SubClassOf(FunctionalGroup, Structure)\n\
         SubClassOf(NitroGroup, FunctionalGroup)\n\
         SubClassOf(Methyl, FunctionalGroup)\n\
         SubClassOf(RingStructure, Structure)\n\
         SubClassOf(Ring_size_6, RingStructure)\n\
         SubClassOf(Carbon_6_ring, Ring_size_6)\n\
         SubClassOf(Ring_size_5, RingStructure)\n\
         SubClassOf(Hetero_5_ring, Ring_size_5)\n",
    )
    .expect("built-in ontology parses")
}

/// Mapping tables for the generated molecules, specific structures first.
pub fn default_mapping() -> MappingConfig {
    let classes: BTreeMap<String, String> =
        [("C", "Carbon"), ("N", "Nitrogen"), ("O", "Oxygen"), ("H", "Hydrogen"), ("P", "Phosphorus")]
            .iter()
            .map(|(f, c)| (f.to_string(), c.to_string()))
            .collect();
    let mut config = MappingConfig::new(classes);
    let f = |s: &str| Some(s.to_string());
    let rule = |class: &str, pattern| StructureRule { class: class.to_string(), pattern };
    config.structures = vec![
        rule(
            PLANTED_CLASS,
            StructurePattern::MotifGraph { nodes: vec![f("N"), f("O"), f("O")], edges: vec![(0, 1), (0, 2)] },
        ),
        rule(
            "Methyl",
            StructurePattern::MotifGraph {
                nodes: vec![f("C"), f("H"), f("H"), f("H")],
                edges: vec![(0, 1), (0, 2), (0, 3)],
            },
        ),
        rule("Carbon_6_ring", StructurePattern::Ring { size: 6, positions: vec![f("C"); 6], aromatic: false }),
        rule("Ring_size_6", StructurePattern::Ring { size: 6, positions: vec![], aromatic: false }),
        rule(
            "Hetero_5_ring",
            StructurePattern::Ring { size: 5, positions: vec![f("N"), None, None, None, None], aromatic: false },
        ),
        rule("Ring_size_5", StructurePattern::Ring { size: 5, positions: vec![], aromatic: false }),
    ];
    config
}

struct Builder {
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

const C: usize = 0;
const N: usize = 1;
const O: usize = 2;
const H: usize = 3;
const P: usize = 4;

impl Builder {
    fn add(&mut self, label: usize) -> usize {
        self.labels.push(label);
        self.labels.len() - 1
    }

    fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None }).collect()
    }

    /// A random non-hydrogen node with spare valence; falls back to node 0.
    fn anchor(&self, rng: &mut ChaCha8Rng, limit: usize) -> usize {
        self.anchor_where(rng, limit, |l| l != H)
    }

    fn anchor_where(&self, rng: &mut ChaCha8Rng, limit: usize, ok: impl Fn(usize) -> bool) -> usize {
        let options: Vec<usize> = (0..limit).filter(|&v| ok(self.labels[v]) && self.degree(v) < 4).collect();
        options.choose(rng).copied().unwrap_or(0)
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData, DatasetError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = (0..spec.num_graphs).map(|i| i % 2).collect();
    labels.shuffle(&mut rng);

    let mut graphs = Vec::with_capacity(spec.num_graphs);
    let mut truth = Vec::with_capacity(spec.num_graphs);
    for (i, &clean) in labels.iter().enumerate() {
        let n = rng.random_range(spec.min_nodes..=spec.max_nodes);
        let mut b = Builder { labels: Vec::new(), edges: Vec::new() };
        base_tree(&mut b, n, spec.heteroatom_rate, &mut rng);
        let tree_size = b.labels.len();

        let mut motif_nodes = Vec::new();
        let mut motif = None;
        if clean == 1 && rng.random_bool(spec.motif_probability) {
            let at = b.anchor_where(&mut rng, tree_size, |l| l == C);
            let nn = b.add(N);
            let o1 = b.add(O);
            let o2 = b.add(O);
            b.edges.extend([(at, nn), (nn, o1), (nn, o2)]);
            motif_nodes = vec![nn, o1, o2];
            motif = Some(PLANTED_CLASS.to_string());
        } else if clean == 1 {
            for _ in 0..spec.alternative_phosphorus {
                let at = b.anchor(&mut rng, tree_size);
                let p = b.add(P);
                b.edges.push((at, p));
            }
        } else {
            if rng.random_bool(spec.decoy_motif_probability) {
                for label in [N, O, O] {
                    let at = b.anchor_where(&mut rng, tree_size, |l| l == C);
                    let v = b.add(label);
                    b.edges.push((at, v));
                }
            }
            if rng.random_bool(spec.decoy_phosphorus_probability) {
                let at = b.anchor(&mut rng, tree_size);
                let p = b.add(P);
                b.edges.push((at, p));
            }
        }

        if spec.base == BaseModel::RingAugmented {
            if rng.random_bool(spec.carbon_ring_probability) {
                let ring: Vec<usize> = (0..6).map(|_| b.add(C)).collect();
                attach_ring(&mut b, &ring, tree_size, &mut rng);
            }
            if rng.random_bool(spec.hetero_ring_probability) {
                let ring: Vec<usize> = [N, C, C, C, C].iter().map(|&l| b.add(l)).collect();
                attach_ring(&mut b, &ring, tree_size, &mut rng);
            }
        }
        remove_accidental_nitro(&mut b, &motif_nodes);

        let total = b.labels.len();
        let mut perm: Vec<usize> = (0..total).collect();
        perm.shuffle(&mut rng);
        let label = if rng.random_bool(spec.label_noise) { 1 - clean } else { clean };
        let mut x = Array2::zeros((total, ATOMS.len()));
        for (v, &l) in b.labels.iter().enumerate() {
            x[[perm[v], l]] = 1.0;
        }
        let edges: Vec<(usize, usize)> = b.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let id = i.to_string();
        let graph = GraphInstance::new(id.clone(), total, edges, x, label)
            .map_err(|e| DatasetError::Malformed { graph: id.clone(), reason: e.to_string() })?;
        let mut motif_nodes: Vec<usize> = motif_nodes.iter().map(|&v| perm[v]).collect();
        motif_nodes.sort_unstable();
        let motif_edges = if motif.is_some() {
            let mut es: Vec<(usize, usize)> = graph
                .edges()
                .iter()
                .copied()
                .filter(|&(u, v)| motif_nodes.contains(&u) && motif_nodes.contains(&v))
                .collect();
            es.sort_unstable();
            es
        } else {
            Vec::new()
        };
        truth.push(GroundTruth { graph_id: id, clean_label: clean, motif, motif_nodes, motif_edges });
        graphs.push(graph);
    }
    let names = ATOMS.iter().map(|s| s.to_string()).collect();
    let dataset = Dataset::new(names, graphs).expect("fixed alphabet width");
    Ok(SyntheticData { dataset, truth, delta: domain_ontology(), mapping: default_mapping() })
}

fn base_tree(b: &mut Builder, n: usize, heteroatom_rate: f64, rng: &mut ChaCha8Rng) {
    b.add(C);
    for v in 1..n {
        let parent = b.anchor(rng, v);
        b.add(C);
        b.edges.push((parent, v));
    }
    for v in 0..n {
        let leaf = b.degree(v) <= 1;
        b.labels[v] = if leaf && rng.random_bool(0.5) {
            H
        } else if b.degree(v) <= 2 && rng.random_bool(heteroatom_rate) {
            if rng.random_bool(0.75) {
                O
            } else {
                N
            }
        } else {
            C
        };
    }
    // The root may have been labelled hydrogen while being a parent.
    for v in 0..n {
        if b.labels[v] == H && b.degree(v) > 1 {
            b.labels[v] = C;
        }
    }
}

fn attach_ring(b: &mut Builder, ring: &[usize], limit: usize, rng: &mut ChaCha8Rng) {
    let k = ring.len();
    for i in 0..k {
        b.edges.push((ring[i], ring[(i + 1) % k]));
    }
    let at = b.anchor(rng, limit);
    // Attach through a ring carbon so hetero atoms keep exactly two ring bonds.
    let via = ring.iter().copied().find(|&v| b.labels[v] == C).unwrap_or(ring[0]);
    b.edges.push((at, via));
}

/// Relabels oxygens so that no unplanted nitrogen has two oxygen neighbours.
fn remove_accidental_nitro(b: &mut Builder, planted: &[usize]) {
    for v in 0..b.labels.len() {
        if b.labels[v] != N || planted.first() == Some(&v) {
            continue;
        }
        let oxygens: Vec<usize> = b.neighbors(v).into_iter().filter(|&u| b.labels[u] == O).collect();
        for &u in oxygens.iter().skip(1) {
            b.labels[u] = C;
        }
    }
}
