//! Independent reference implementations and random generators shared by the
//! integration tests and the acceptance suite.
//!
//! Nothing here calls into the library's reasoning, justification or cycle
//! code; the oracles work from raw axioms and adjacency lists.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hybrid_xai::gnn::{normalize_adjacency, GcnModel, GraphInstance};
use hybrid_xai::ontology::{Axiom, ClassExpression, Ontology};
use ndarray::Array2;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
pub const ROLES: [&str; 2] = ["r", "s"];
pub const PROPS: [&str; 1] = ["p"];

// ---------------------------------------------------------------------------
// brute-force least-fixpoint evaluator

/// Saturates the asserted facts bottom-up and evaluates queries against the
/// saturated fact set. Definitions are applied to every individual mentioned
/// in the axioms plus the extra `universe`, since a definition such as
/// `Thing or ...` also covers individuals no axiom talks about.
pub struct Oracle {
    supers: BTreeMap<String, BTreeSet<String>>,
    roles: BTreeSet<(String, String, String)>,
    bools: BTreeSet<(String, String, bool)>,
    facts: BTreeSet<(String, String)>,
}

impl Oracle {
    pub fn new<'a>(axioms: impl IntoIterator<Item = &'a Axiom>, universe: &[String]) -> Self {
        let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut types = Vec::new();
        let mut defs = Vec::new();
        let mut roles = BTreeSet::new();
        let mut bools = BTreeSet::new();
        let mut individuals: BTreeSet<String> = universe.iter().cloned().collect();
        let mut edge = |a: &str, b: &str| {
            edges.entry(a.to_string()).or_default().insert(b.to_string());
        };
        for axiom in axioms {
            match axiom {
                Axiom::ClassAssertion { class, individual } => {
                    types.push((class.clone(), individual.0.clone()));
                    individuals.insert(individual.0.clone());
                }
                Axiom::RoleAssertion { role, subject, object } => {
                    roles.insert((role.clone(), subject.0.clone(), object.0.clone()));
                    individuals.insert(subject.0.clone());
                    individuals.insert(object.0.clone());
                }
                Axiom::BoolAssertion { property, individual, value } => {
                    bools.insert((property.clone(), individual.0.clone(), *value));
                    individuals.insert(individual.0.clone());
                }
                Axiom::SubClassOf { sub, sup } => edge(sub, sup),
                Axiom::EquivalentTo { name, expr } => {
                    match expr {
                        ClassExpression::Atomic(other) => {
                            edge(name, other);
                            edge(other, name);
                        }
                        ClassExpression::And(parts) => {
                            for part in parts {
                                if let ClassExpression::Atomic(other) = part {
                                    edge(name, other);
                                }
                            }
                        }
                        _ => {}
                    }
                    defs.push((name.clone(), expr.clone()));
                }
            }
        }
        let mut supers = BTreeMap::new();
        let nodes: BTreeSet<String> = edges.iter().flat_map(|(a, bs)| std::iter::once(a.clone()).chain(bs.iter().cloned())).collect();
        for start in nodes {
            let mut seen = BTreeSet::new();
            let mut stack = vec![start.clone()];
            while let Some(c) = stack.pop() {
                if seen.insert(c.clone()) {
                    if let Some(next) = edges.get(&c) {
                        stack.extend(next.iter().cloned());
                    }
                }
            }
            supers.insert(start, seen);
        }
        let mut oracle = Oracle { supers, roles, bools, facts: BTreeSet::new() };
        for (class, ind) in types {
            oracle.add_fact(&class, &ind);
        }
        loop {
            let mut fresh = Vec::new();
            for (name, def) in &defs {
                for ind in &individuals {
                    if !oracle.facts.contains(&(name.clone(), ind.clone())) && oracle.holds(def, ind) {
                        fresh.push((name.clone(), ind.clone()));
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            for (name, ind) in fresh {
                oracle.add_fact(&name, &ind);
            }
        }
        oracle
    }

    fn add_fact(&mut self, class: &str, ind: &str) {
        let sups = self.superclasses(class);
        for sup in sups {
            self.facts.insert((sup, ind.to_string()));
        }
    }

    pub fn superclasses(&self, class: &str) -> BTreeSet<String> {
        self.supers.get(class).cloned().unwrap_or_else(|| BTreeSet::from([class.to_string()]))
    }

    pub fn holds(&self, expr: &ClassExpression, ind: &str) -> bool {
        match expr {
            ClassExpression::Top => true,
            ClassExpression::Atomic(a) => self.facts.contains(&(a.clone(), ind.to_string())),
            ClassExpression::And(parts) => parts.iter().all(|p| self.holds(p, ind)),
            ClassExpression::Or(parts) => parts.iter().any(|p| self.holds(p, ind)),
            ClassExpression::Exists(role, filler) => self
                .roles
                .iter()
                .any(|(r, s, o)| r == role && s == ind && self.holds(filler, o)),
            ClassExpression::Value(p, v) => self.bools.contains(&(p.clone(), ind.to_string(), *v)),
        }
    }
}

pub fn oracle_entails(axioms: &[&Axiom], expr: &ClassExpression, ind: &str) -> bool {
    Oracle::new(axioms.iter().copied(), &[ind.to_string()]).holds(expr, ind)
}

/// Smallest number of axioms from `axioms` entailing `expr(ind)`, by trying
/// every subset in order of size.
pub fn minimum_justification_size(axioms: &[Axiom], expr: &ClassExpression, ind: &str) -> Option<usize> {
    assert!(axioms.len() <= 16, "exhaustive search is for small ontologies");
    let n = axioms.len();
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| m.count_ones());
    masks.into_iter().find_map(|mask| {
        let chosen: Vec<&Axiom> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &axioms[i]).collect();
        oracle_entails(&chosen, expr, ind).then_some(chosen.len())
    })
}

/// True when no proper subset of `axioms` entails `expr(ind)`.
pub fn every_proper_subset_fails(axioms: &[&Axiom], expr: &ClassExpression, ind: &str) -> bool {
    let n = axioms.len();
    assert!(n <= 16);
    let full = (1u32 << n) - 1;
    (0..full).all(|mask| {
        let chosen: Vec<&Axiom> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| axioms[i]).collect();
        !oracle_entails(&chosen, expr, ind)
    })
}

// ---------------------------------------------------------------------------
// random ontologies and expressions

pub fn individual_name(i: usize) -> String {
    format!("i{i}")
}

pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> ClassExpression {
    if depth == 0 || rng.random_bool(0.35) {
        return match rng.random_range(0..10) {
            0 => ClassExpression::Top,
            1 | 2 => ClassExpression::Value(PROPS[0].to_string(), rng.random_bool(0.5)),
            _ => ClassExpression::Atomic(CLASSES.choose(rng).unwrap().to_string()),
        };
    }
    match rng.random_range(0..20) {
        0..6 => ClassExpression::And((0..rng.random_range(2..=3)).map(|_| random_expr(rng, depth - 1)).collect()),
        6..11 => ClassExpression::Or((0..rng.random_range(2..=3)).map(|_| random_expr(rng, depth - 1)).collect()),
        _ => ClassExpression::Exists(ROLES.choose(rng).unwrap().to_string(), Box::new(random_expr(rng, depth - 1))),
    }
}

/// A random axiom list over the fixed vocabulary, with at most one
/// definition per class name.
pub fn random_axioms(rng: &mut ChaCha8Rng, max_axioms: usize, num_individuals: usize) -> Vec<Axiom> {
    let count = rng.random_range(1..=max_axioms);
    let mut out: Vec<Axiom> = Vec::new();
    let mut defined = BTreeSet::new();
    let ind = |rng: &mut ChaCha8Rng| individual_name(rng.random_range(0..num_individuals));
    let class = |rng: &mut ChaCha8Rng| CLASSES.choose(rng).unwrap().to_string();
    while out.len() < count {
        let axiom = match rng.random_range(0..20) {
            0..6 => Axiom::class(&class(rng), &ind(rng)),
            6..12 => Axiom::role(ROLES.choose(rng).unwrap(), &ind(rng), &ind(rng)),
            12..14 => Axiom::bool_value(PROPS[0], &ind(rng), rng.random_bool(0.5)),
            14..17 => Axiom::subclass(&class(rng), &class(rng)),
            _ => {
                let name = class(rng);
                if !defined.insert(name.clone()) {
                    continue;
                }
                Axiom::equivalent(&name, random_expr(rng, 2))
            }
        };
        if !out.contains(&axiom) {
            out.push(axiom);
        }
    }
    out
}

/// Ontology holding `axioms` with the whole vocabulary and every individual
/// declared, so any generated query passes the signature check.
pub fn declared_ontology(axioms: &[Axiom], num_individuals: usize) -> Ontology {
    let mut o = Ontology::new();
    for c in CLASSES {
        o.declare_class(c).unwrap();
    }
    for r in ROLES {
        o.declare_role(r).unwrap();
    }
    for p in PROPS {
        o.declare_bool(p).unwrap();
    }
    for i in 0..num_individuals {
        o.declare_individual(&individual_name(i)).unwrap();
    }
    for a in axioms {
        o.add_axiom(a.clone()).unwrap();
    }
    o
}

// ---------------------------------------------------------------------------
// induced cycles by exhaustive subset search

/// Node sets of all chordless cycles with `min..=max` nodes: subsets whose
/// induced subgraph is connected and 2-regular.
pub fn brute_force_chordless_cycles(n: usize, edges: &[(usize, usize)], min: usize, max: usize) -> BTreeSet<Vec<usize>> {
    assert!(n <= 16);
    let adjacent = |a: usize, b: usize| edges.iter().any(|&(u, v)| (u == a && v == b) || (u == b && v == a));
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let nodes: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if nodes.len() < min.max(3) || nodes.len() > max {
            continue;
        }
        let regular = nodes.iter().all(|&a| nodes.iter().filter(|&&b| b != a && adjacent(a, b)).count() == 2);
        if !regular {
            continue;
        }
        let mut seen = BTreeSet::from([nodes[0]]);
        let mut stack = vec![nodes[0]];
        while let Some(a) = stack.pop() {
            for &b in &nodes {
                if adjacent(a, b) && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        if seen.len() == nodes.len() {
            out.insert(nodes);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// GCN numerics

pub fn random_small_graph(rng: &mut ChaCha8Rng, max_nodes: usize, d: usize) -> GraphInstance {
    let n = rng.random_range(1..=max_nodes);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
    GraphInstance::new("g", n, edges, x, rng.random_range(0..2)).unwrap()
}

/// `||a - b|| / (||a|| + ||b||)`, zero when both vanish.
pub fn relative_error(analytic: &Array2<f64>, numeric: &Array2<f64>) -> f64 {
    let diff = (analytic - numeric).mapv(|v| v * v).sum().sqrt();
    let scale = analytic.mapv(|v| v * v).sum().sqrt() + numeric.mapv(|v| v * v).sum().sqrt();
    if scale < 1e-12 {
        0.0
    } else {
        diff / scale
    }
}

fn central_difference(mut f: impl FnMut(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Plain re-implementation of the forward pass: class probabilities and the
/// smallest |pre-activation| feeding a ReLU, i.e. the distance to the nearest
/// point where the loss is not differentiable.
pub fn reference_forward(model: &GcnModel, norm: &Array2<f64>, x: &Array2<f64>) -> (Vec<f64>, f64) {
    let mut h = x.clone();
    let mut margin = f64::INFINITY;
    let last = model.layers.len() - 1;
    for (l, w) in model.layers.iter().enumerate() {
        let s = norm.dot(&h).dot(w);
        if l < last {
            margin = s.iter().fold(margin, |m, v| m.min(v.abs()));
            h = s.mapv(|v| v.max(0.0));
        } else {
            h = s;
        }
    }
    let n = h.nrows() as f64;
    let pooled: Vec<f64> = (0..h.ncols()).map(|c| h.column(c).sum() / n).collect();
    let logits: Vec<f64> =
        (0..model.classifier.ncols()).map(|k| pooled.iter().enumerate().map(|(j, p)| p * model.classifier[[j, k]]).sum()).collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - top).exp()).collect();
    let total: f64 = exp.iter().sum();
    (exp.iter().map(|e| e / total).collect(), margin)
}

/// Worst relative error between analytic and central-difference gradients
/// over every parameter tensor, the input features and the normalized
/// adjacency.
pub fn gradient_check(model: &GcnModel, graph: &GraphInstance, h: f64) -> f64 {
    let target = graph.label;
    let norm = normalize_adjacency(&graph.adjacency());
    let loss = |m: &GcnModel, a: &Array2<f64>, x: &Array2<f64>| m.forward_with(a.clone(), x.clone()).unwrap().loss(target);
    let cache = model.forward_with(norm.clone(), graph.features.clone()).unwrap();
    let grads = model.backward(&cache, target);
    let mut worst: f64 = 0.0;

    for (l, analytic) in grads.layers.iter().enumerate() {
        let numeric = Array2::from_shape_fn(analytic.raw_dim(), |(i, j)| {
            central_difference(
                |step| {
                    let mut m = model.clone();
                    m.layers[l][[i, j]] += step;
                    loss(&m, &norm, &graph.features)
                },
                h,
            )
        });
        worst = worst.max(relative_error(analytic, &numeric));
    }
    let numeric = Array2::from_shape_fn(grads.classifier.raw_dim(), |(i, j)| {
        central_difference(
            |step| {
                let mut m = model.clone();
                m.classifier[[i, j]] += step;
                loss(&m, &norm, &graph.features)
            },
            h,
        )
    });
    worst = worst.max(relative_error(&grads.classifier, &numeric));
    let numeric = Array2::from_shape_fn(graph.features.raw_dim(), |(i, j)| {
        central_difference(
            |step| {
                let mut x = graph.features.clone();
                x[[i, j]] += step;
                loss(model, &norm, &x)
            },
            h,
        )
    });
    worst = worst.max(relative_error(&grads.input, &numeric));
    let numeric = Array2::from_shape_fn(norm.raw_dim(), |(i, j)| {
        central_difference(
            |step| {
                let mut a = norm.clone();
                a[[i, j]] += step;
                loss(model, &a, &graph.features)
            },
            h,
        )
    });
    worst.max(relative_error(&grads.norm, &numeric))
}

/// Largest change of the class probabilities, and of the per-node embeddings
/// after undoing the permutation, over `count` random node permutations.
pub fn permutation_error(model: &GcnModel, graph: &GraphInstance, rng: &mut ChaCha8Rng, count: usize) -> (f64, f64) {
    let base = model.forward(graph).unwrap();
    let mut prob_err: f64 = 0.0;
    let mut emb_err: f64 = 0.0;
    for _ in 0..count {
        let mut perm: Vec<usize> = (0..graph.num_nodes).collect();
        perm.shuffle(rng);
        let permuted = model.forward(&graph.permuted(&perm)).unwrap();
        for (a, b) in base.probabilities.iter().zip(permuted.probabilities.iter()) {
            prob_err = prob_err.max((a - b).abs());
        }
        let z = base.embeddings();
        let zp = permuted.embeddings();
        for (i, &p) in perm.iter().enumerate() {
            for c in 0..z.ncols() {
                emb_err = emb_err.max((z[[i, c]] - zp[[p, c]]).abs());
            }
        }
    }
    (prob_err, emb_err)
}

// ---------------------------------------------------------------------------
// fidelity by set arithmetic

/// `(|S ∩ sub|, |S|)` where `S` is `support` with every structure replaced by
/// its edges.
pub fn fidelity_fraction(
    support: &[String],
    structures: &BTreeMap<String, Vec<String>>,
    subgraph: &[String],
) -> (usize, usize) {
    let mut expanded: Vec<String> = Vec::new();
    for s in support {
        match structures.get(s) {
            Some(edges) => expanded.extend(edges.iter().cloned()),
            None => expanded.push(s.clone()),
        }
    }
    expanded.sort();
    expanded.dedup();
    let hits = expanded.iter().filter(|e| subgraph.contains(e)).count();
    (hits, expanded.len())
}

// ---------------------------------------------------------------------------
// proptest strategies

pub fn arb_expr(depth: u32) -> impl proptest::strategy::Strategy<Value = ClassExpression> {
    use proptest::prelude::*;
    let leaf = prop_oneof![
        1 => Just(ClassExpression::Top),
        3 => proptest::sample::select(CLASSES.to_vec()).prop_map(|c| ClassExpression::Atomic(c.to_string())),
        1 => any::<bool>().prop_map(|b| ClassExpression::Value(PROPS[0].to_string(), b)),
    ];
    leaf.prop_recursive(depth, 48, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(ClassExpression::And),
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(ClassExpression::Or),
            (proptest::sample::select(ROLES.to_vec()), inner)
                .prop_map(|(r, f)| ClassExpression::Exists(r.to_string(), Box::new(f))),
        ]
    })
}

/// A random ontology as `(axioms, number of individuals)`, drawn from `seed`.
pub fn random_case(seed: u64, max_axioms: usize, max_individuals: usize) -> (Vec<Axiom>, usize) {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_individuals);
    (random_axioms(&mut rng, max_axioms, n), n)
}

pub fn universe(n: usize) -> Vec<String> {
    (0..n).map(individual_name).collect()
}
