//! Justifications for class assertions: minimal axiom subsets that still
//! entail `C(a)`.
//!
//! Every minimal justification is the axiom support of some loop-free proof
//! of `C(a)`, and every subset-minimal proof support is a justification. The
//! justifier therefore enumerates proof supports top-down, keeps the
//! subset-minimal ones and ranks them by cardinality, then by the sorted list
//! of their printed axioms.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::ontology::{Axiom, ClassExpression, Individual, Ontology};
use crate::reasoner::{check_signature, Reasoner, ReasonerError};

pub const DEFAULT_NODE_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JustifyError {
    #[error("{individual} is not an instance of {expr}")]
    NotEntailed { expr: String, individual: String },
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Justification {
    pub axioms: BTreeSet<Axiom>,
    pub expr: ClassExpression,
    pub individual: Individual,
    /// Set when the node budget ran out: minimal, but not guaranteed minimum.
    pub best_effort: bool,
}

impl Justification {
    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// One readable line per axiom, ABox facts first.
    pub fn render(&self) -> String {
        self.axioms.iter().map(|a| a.readable()).collect::<Vec<_>>().join("\n")
    }

    fn sort_key(&self) -> (usize, Vec<String>) {
        sort_key(&self.axioms)
    }
}

fn sort_key(axioms: &BTreeSet<Axiom>) -> (usize, Vec<String>) {
    let mut printed: Vec<String> = axioms.iter().map(|a| a.to_string()).collect();
    printed.sort();
    (axioms.len(), printed)
}

/// Individuals mentioned in the justification's assertions, minus `exclude`.
pub fn support_individuals(justification: &Justification, exclude: &Individual) -> BTreeSet<Individual> {
    justification
        .axioms
        .iter()
        .flat_map(|a| a.individuals())
        .filter(|i| *i != exclude)
        .cloned()
        .collect()
}

/// Minimum-cardinality justification under the default node budget.
pub fn justify(
    ontology: &Ontology,
    expr: &ClassExpression,
    ind: &Individual,
) -> Result<Justification, JustifyError> {
    Justifier::new(ontology).justify(expr, ind)
}

/// Up to `limit` justifications, by cardinality then lexicographically.
pub fn enumerate_justifications(
    ontology: &Ontology,
    expr: &ClassExpression,
    ind: &Individual,
    limit: usize,
) -> Result<Vec<Justification>, JustifyError> {
    Justifier::new(ontology).enumerate(expr, ind, limit)
}

type Support = BTreeSet<usize>;

/// Indexed view of an ontology for repeated justification queries.
pub struct Justifier<'o> {
    ontology: &'o Ontology,
    axioms: Vec<&'o Axiom>,
    types: HashMap<&'o str, Vec<(usize, &'o str)>>,
    successors: HashMap<(&'o str, &'o str), Vec<(usize, &'o str)>>,
    bools: HashMap<(&'o str, &'o str, bool), usize>,
    told: HashMap<&'o str, Vec<(usize, &'o str)>>,
    definitions: Vec<(usize, &'o str, &'o ClassExpression)>,
    budget: usize,
}

struct Search {
    generated: usize,
    budget: usize,
    exhausted: bool,
}

impl Search {
    fn charge(&mut self, n: usize) -> bool {
        self.generated += n;
        if self.generated > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }
}

impl<'o> Justifier<'o> {
    pub fn new(ontology: &'o Ontology) -> Self {
        let axioms: Vec<&Axiom> = ontology.axioms().iter().collect();
        let mut types: HashMap<&str, Vec<(usize, &str)>> = HashMap::new();
        let mut successors: HashMap<(&str, &str), Vec<(usize, &str)>> = HashMap::new();
        let mut bools = HashMap::new();
        let mut told: HashMap<&str, Vec<(usize, &str)>> = HashMap::new();
        let mut definitions = Vec::new();
        for (id, axiom) in axioms.iter().enumerate() {
            match axiom {
                Axiom::ClassAssertion { class, individual } => {
                    types.entry(individual.as_str()).or_default().push((id, class.as_str()))
                }
                Axiom::RoleAssertion { role, subject, object } => successors
                    .entry((role.as_str(), subject.as_str()))
                    .or_default()
                    .push((id, object.as_str())),
                Axiom::BoolAssertion { property, individual, value } => {
                    bools.insert((property.as_str(), individual.as_str(), *value), id);
                }
                Axiom::SubClassOf { sub, sup } => {
                    told.entry(sub.as_str()).or_default().push((id, sup.as_str()))
                }
                Axiom::EquivalentTo { name, expr } => {
                    definitions.push((id, name.as_str(), expr));
                    match expr {
                        ClassExpression::Atomic(other) => {
                            told.entry(name.as_str()).or_default().push((id, other.as_str()));
                            told.entry(other.as_str()).or_default().push((id, name.as_str()));
                        }
                        ClassExpression::And(parts) => {
                            for part in parts {
                                if let ClassExpression::Atomic(other) = part {
                                    told.entry(name.as_str()).or_default().push((id, other.as_str()));
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        Justifier {
            ontology,
            axioms,
            types,
            successors,
            bools,
            told,
            definitions,
            budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget.max(1);
        self
    }

    pub fn justify(&self, expr: &ClassExpression, ind: &Individual) -> Result<Justification, JustifyError> {
        Ok(self.minimum(expr, ind)?.into_iter().next().expect("non-empty by construction"))
    }

    /// All justifications tied at minimum cardinality, in tie-break order.
    pub fn minimum(&self, expr: &ClassExpression, ind: &Individual) -> Result<Vec<Justification>, JustifyError> {
        let all = self.enumerate(expr, ind, usize::MAX)?;
        let min = all[0].len();
        Ok(all.into_iter().take_while(|j| j.len() == min).collect())
    }

    pub fn enumerate(
        &self,
        expr: &ClassExpression,
        ind: &Individual,
        limit: usize,
    ) -> Result<Vec<Justification>, JustifyError> {
        check_signature(self.ontology, expr)?;
        if !self.ontology.individuals().contains(ind) {
            return Err(ReasonerError::UnknownIndividual(ind.0.clone()).into());
        }
        let mut search = Search { generated: 0, budget: self.budget, exhausted: false };
        let mut in_progress = Vec::new();
        let supports = self.proofs(expr, ind.as_str(), &mut in_progress, &mut search);
        if supports.is_empty() {
            return Err(JustifyError::NotEntailed { expr: expr.to_string(), individual: ind.0.clone() });
        }
        let best_effort = search.exhausted;
        let mut found: Vec<Justification> = supports
            .into_iter()
            .map(|s| {
                let mut axioms: BTreeSet<Axiom> = s.iter().map(|&i| self.axioms[i].clone()).collect();
                if best_effort {
                    axioms = self.shrink(axioms, expr, ind);
                }
                Justification { axioms, expr: expr.clone(), individual: ind.clone(), best_effort }
            })
            .collect();
        found.sort_by_cached_key(|j| j.sort_key());
        found.dedup_by(|a, b| a.axioms == b.axioms);
        found.truncate(limit.max(1));
        Ok(found)
    }

    /// Deletion-based minimization of an entailing axiom set.
    fn shrink(&self, axioms: BTreeSet<Axiom>, expr: &ClassExpression, ind: &Individual) -> BTreeSet<Axiom> {
        let mut current = axioms;
        let order: Vec<Axiom> = current.iter().cloned().collect();
        for axiom in order {
            current.remove(&axiom);
            if !entails(&current, expr, ind) {
                current.insert(axiom);
            }
        }
        current
    }

    fn proofs<'a>(
        &'a self,
        expr: &'a ClassExpression,
        ind: &'a str,
        in_progress: &mut Vec<(&'a str, &'a str)>,
        search: &mut Search,
    ) -> Vec<Support> {
        let out = match expr {
            ClassExpression::Top => vec![Support::new()],
            ClassExpression::Atomic(class) => {
                // A proof that needs its own goal again is never minimal.
                if in_progress.contains(&(class.as_str(), ind)) {
                    return Vec::new();
                }
                let mut out = Vec::new();
                if let Some(types) = self.types.get(ind) {
                    for &(type_ax, asserted) in types {
                        for path in self.paths(asserted, class) {
                            let mut s = path;
                            s.insert(type_ax);
                            out.push(s);
                        }
                    }
                }
                in_progress.push((class.as_str(), ind));
                for &(def_ax, name, def) in &self.definitions {
                    let paths = self.paths(name, class);
                    if paths.is_empty() {
                        continue;
                    }
                    let inner = self.proofs(def, ind, in_progress, search);
                    for path in &paths {
                        for proof in &inner {
                            let mut s: Support = path.union(proof).copied().collect();
                            s.insert(def_ax);
                            out.push(s);
                        }
                    }
                }
                in_progress.pop();
                out
            }
            ClassExpression::And(parts) => {
                let mut acc = vec![Support::new()];
                for part in parts {
                    let next = self.proofs(part, ind, in_progress, search);
                    if next.is_empty() {
                        return Vec::new();
                    }
                    let mut combined = Vec::with_capacity(acc.len() * next.len());
                    for a in &acc {
                        for b in &next {
                            combined.push(a.union(b).copied().collect());
                        }
                    }
                    search.charge(combined.len());
                    acc = minimal_sets(combined);
                    if search.exhausted {
                        acc.truncate(1);
                    }
                }
                acc
            }
            ClassExpression::Or(parts) => {
                parts.iter().flat_map(|p| self.proofs(p, ind, in_progress, search)).collect()
            }
            ClassExpression::Exists(role, filler) => {
                let mut out = Vec::new();
                if let Some(succ) = self.successors.get(&(role.as_str(), ind)) {
                    for &(role_ax, object) in succ {
                        for proof in self.proofs(filler, object, in_progress, search) {
                            let mut s = proof;
                            s.insert(role_ax);
                            out.push(s);
                        }
                    }
                }
                out
            }
            ClassExpression::Value(prop, value) => match self.bools.get(&(prop.as_str(), ind, *value)) {
                Some(&id) => vec![Support::from([id])],
                None => Vec::new(),
            },
        };
        search.charge(out.len());
        let mut out = minimal_sets(out);
        // Past the budget every node keeps a single proof, so the search
        // finishes in time linear in the proof tree.
        if search.exhausted {
            out.truncate(1);
        }
        out
    }

    /// Axiom sets of the simple told-subsumption paths from `from` to `to`.
    fn paths(&self, from: &str, to: &str) -> Vec<Support> {
        let mut out = Vec::new();
        let mut visited = vec![from];
        let mut current = Support::new();
        self.walk(from, to, &mut visited, &mut current, &mut out);
        minimal_sets(out)
    }

    fn walk<'a>(
        &'a self,
        at: &'a str,
        to: &str,
        visited: &mut Vec<&'a str>,
        current: &mut Support,
        out: &mut Vec<Support>,
    ) {
        if at == to {
            out.push(current.clone());
            return;
        }
        let Some(edges) = self.told.get(at) else { return };
        for &(ax, next) in edges {
            if visited.contains(&next) {
                continue;
            }
            visited.push(next);
            let fresh = current.insert(ax);
            self.walk(next, to, visited, current, out);
            if fresh {
                current.remove(&ax);
            }
            visited.pop();
        }
    }
}

/// Entailment check on an arbitrary axiom set.
pub fn entails(axioms: &BTreeSet<Axiom>, expr: &ClassExpression, ind: &Individual) -> bool {
    let Ok(sub) = Ontology::from_axioms(axioms.iter().cloned()) else { return false };
    Reasoner::new(&sub).holds(expr, ind.as_str())
}

fn minimal_sets(mut sets: Vec<Support>) -> Vec<Support> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<Support> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{parse_manchester, parse_ontology};

    fn ring_graph() -> Ontology {
        parse_ontology(
            "Role(hasStructure, graph_1, structure_1_1_1)\n\
             Type(structure_1_1_1, Hetero_aromatic_5_ring)\n\
             SubClassOf(Hetero_aromatic_5_ring, Ring_size_5)\n\
             SubClassOf(Ring_size_5, RingStructure)\n\
             EquivalentTo(phi_8_m, \"hasStructure some Ring_size_5\")\n\
             Role(hasAtom, graph_1, feature_1_5)\n\
             Type(feature_1_5, Nitrogen)\n\
             Type(graph_1, Compound)\n",
        )
        .unwrap()
    }

    #[test]
    fn ring_justification_justification() {
        let o = ring_graph();
        let j = justify(&o, &ClassExpression::atomic("phi_8_m"), &"graph_1".into()).unwrap();
        let expected: BTreeSet<Axiom> = [
            Axiom::role("hasStructure", "graph_1", "structure_1_1_1"),
            Axiom::class("Hetero_aromatic_5_ring", "structure_1_1_1"),
            Axiom::subclass("Hetero_aromatic_5_ring", "Ring_size_5"),
            Axiom::equivalent("phi_8_m", parse_manchester("hasStructure some Ring_size_5").unwrap()),
        ]
        .into();
        assert_eq!(j.axioms, expected);
        assert!(!j.best_effort);
        assert_eq!(
            j.render(),
            "graph_1 hasStructure structure_1_1_1\n\
             structure_1_1_1 Type Hetero_aromatic_5_ring\n\
             Hetero_aromatic_5_ring SubClassOf Ring_size_5\n\
             phi_8_m EquivalentTo hasStructure some Ring_size_5"
        );
        let support = support_individuals(&j, &"graph_1".into());
        assert_eq!(support, BTreeSet::from([Individual::new("structure_1_1_1")]));
    }

    #[test]
    fn asserted_fact_is_its_own_justification() {
        let o = ring_graph();
        let j = justify(&o, &ClassExpression::atomic("Compound"), &"graph_1".into()).unwrap();
        assert_eq!(j.axioms, BTreeSet::from([Axiom::class("Compound", "graph_1")]));
    }

    #[test]
    fn not_entailed_is_an_error() {
        let o = ring_graph();
        let err = justify(&o, &ClassExpression::atomic("Nitrogen"), &"graph_1".into()).unwrap_err();
        assert!(matches!(err, JustifyError::NotEntailed { .. }));
        assert!(matches!(
            justify(&o, &ClassExpression::atomic("Missing"), &"graph_1".into()),
            Err(JustifyError::Reasoner(ReasonerError::UnknownName(_)))
        ));
    }

    #[test]
    fn two_support_paths() {
        let o = parse_ontology(
            "Role(r, a, b)\nType(b, A)\nRole(r, a, c)\nType(c, B)\nSubClassOf(B, A)\n",
        )
        .unwrap();
        let q = parse_manchester("r some A").unwrap();
        let all = enumerate_justifications(&o, &q, &"a".into(), 10).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].len(), 2);
        assert_eq!(all[1].len(), 3);
        let first = enumerate_justifications(&o, &q, &"a".into(), 1).unwrap();
        assert_eq!(first, vec![justify(&o, &q, &"a".into()).unwrap()]);
    }

    #[test]
    fn unique_support() {
        let o = ring_graph();
        let q = parse_manchester("hasAtom some Nitrogen").unwrap();
        assert_eq!(enumerate_justifications(&o, &q, &"graph_1".into(), 5).unwrap().len(), 1);
    }

    #[test]
    fn ties_break_lexicographically() {
        let o = parse_ontology("Role(r, a, z)\nRole(r, a, b)\n").unwrap();
        let q = parse_manchester("r some Thing").unwrap();
        let j = justify(&o, &q, &"a".into()).unwrap();
        assert_eq!(j.axioms, BTreeSet::from([Axiom::role("r", "a", "b")]));
    }

    #[test]
    fn support_excludes_only_the_explained_individual() {
        let o = parse_ontology("Role(hasAtom, g, f)\nType(f, C)\n").unwrap();
        let j = justify(&o, &parse_manchester("hasAtom some C").unwrap(), &"g".into()).unwrap();
        assert_eq!(support_individuals(&j, &"g".into()), BTreeSet::from([Individual::new("f")]));
        let tbox_only = Justification {
            axioms: BTreeSet::from([Axiom::subclass("A", "B")]),
            expr: ClassExpression::Top,
            individual: "g".into(),
            best_effort: false,
        };
        assert!(support_individuals(&tbox_only, &"g".into()).is_empty());
    }

    #[test]
    fn budget_exhaustion_is_flagged_and_still_minimal() {
        let mut text = String::new();
        for i in 0..12 {
            text.push_str(&format!("Role(r, a, b{i})\nType(b{i}, A)\nRole(s, a, c{i})\nType(c{i}, B)\n"));
        }
        let o = parse_ontology(&text).unwrap();
        let q = parse_manchester("r some A and s some B").unwrap();
        let j = Justifier::new(&o).with_budget(20).justify(&q, &"a".into()).unwrap();
        assert!(j.best_effort);
        assert!(entails(&j.axioms, &q, &"a".into()));
        for ax in &j.axioms {
            let mut less = j.axioms.clone();
            less.remove(ax);
            assert!(!entails(&less, &q, &"a".into()));
        }
    }

    #[test]
    fn cyclic_definitions_terminate() {
        let o = parse_ontology(
            "EquivalentTo(L, \"r some L or A\")\nRole(r, a, b)\nRole(r, b, a)\nType(b, A)\n",
        )
        .unwrap();
        let j = justify(&o, &ClassExpression::atomic("L"), &"a".into()).unwrap();
        assert_eq!(j.len(), 3);
    }
}
