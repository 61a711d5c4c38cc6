//! Closed-world instance checking and retrieval.
//!
//! Named classes are closed under the reflexive-transitive `SubClassOf`
//! relation (equivalences to a named class count in both directions, a
//! definition `N ≡ M and ...` makes `M` a told superclass of `N`). Defined
//! classes are interpreted by their least fixpoint: a cyclic definition
//! contributes nothing along the cycle.
//!
//! Two evaluation routes exist: [`Reasoner::instance_check`] descends
//! top-down from one individual, [`Reasoner::retrieval`] computes extensions
//! bottom-up as bitsets. They must agree.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::ontology::{Axiom, ClassExpression, Individual, Ontology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("unknown name {0:?} in class expression")]
    UnknownName(String),
    #[error("unknown individual {0:?}")]
    UnknownIndividual(String),
}

/// Reflexive-transitive closure of the told class hierarchy.
#[derive(Clone, Debug, Default)]
pub struct ClassClosure {
    superclasses: BTreeMap<String, BTreeSet<String>>,
}

impl ClassClosure {
    pub fn build(ontology: &Ontology) -> Self {
        let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for class in ontology.classes() {
            edges.entry(class.as_str()).or_default();
        }
        for (sub, sup) in told_subsumptions(ontology) {
            edges.entry(sub).or_default().insert(sup);
            edges.entry(sup).or_default();
        }
        let mut superclasses = BTreeMap::new();
        for &start in edges.keys() {
            let mut seen: BTreeSet<String> = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                if seen.insert(c.to_string()) {
                    queue.extend(edges[c].iter().copied());
                }
            }
            superclasses.insert(start.to_string(), seen);
        }
        ClassClosure { superclasses }
    }

    /// `A ∈ superclasses(B)`; every class is its own superclass.
    pub fn is_subclass_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.superclasses.get(sub).is_some_and(|s| s.contains(sup))
    }

    pub fn superclasses(&self, class: &str) -> BTreeSet<String> {
        self.superclasses
            .get(class)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([class.to_string()]))
    }

    pub fn subclasses(&self, class: &str) -> BTreeSet<String> {
        let mut subs: BTreeSet<String> = self
            .superclasses
            .iter()
            .filter(|(_, sups)| sups.contains(class))
            .map(|(c, _)| c.clone())
            .collect();
        subs.insert(class.to_string());
        subs
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.superclasses.keys().map(String::as_str)
    }
}

/// Direct told subsumptions `(sub, sup)` contributed by the TBox.
pub fn told_subsumptions(ontology: &Ontology) -> Vec<(&str, &str)> {
    let mut out = Vec::new();
    for axiom in ontology.axioms() {
        match axiom {
            Axiom::SubClassOf { sub, sup } => out.push((sub.as_str(), sup.as_str())),
            Axiom::EquivalentTo { name, expr } => match expr {
                ClassExpression::Atomic(other) => {
                    out.push((name.as_str(), other.as_str()));
                    out.push((other.as_str(), name.as_str()));
                }
                ClassExpression::And(parts) => {
                    for part in parts {
                        if let ClassExpression::Atomic(other) = part {
                            out.push((name.as_str(), other.as_str()));
                        }
                    }
                }
                _ => {}
            },
            _ => {}
        }
    }
    out
}

/// Fails if `expr` mentions a class, role or property outside the signature.
pub fn check_signature(ontology: &Ontology, expr: &ClassExpression) -> Result<(), ReasonerError> {
    let sig = expr.signature();
    if let Some(c) = sig.classes.iter().find(|c| !ontology.classes().contains(*c)) {
        return Err(ReasonerError::UnknownName(c.clone()));
    }
    if let Some(r) = sig.roles.iter().find(|r| !ontology.roles().contains(*r)) {
        return Err(ReasonerError::UnknownName(r.clone()));
    }
    if let Some(p) = sig.bool_props.iter().find(|p| !ontology.bool_props().contains(*p)) {
        return Err(ReasonerError::UnknownName(p.clone()));
    }
    Ok(())
}

/// Read-only query engine over one ontology.
pub struct Reasoner<'o> {
    ontology: &'o Ontology,
    closure: ClassClosure,
    types: HashMap<&'o str, Vec<&'o str>>,
    successors: HashMap<(&'o str, &'o str), Vec<&'o str>>,
    bools: HashSet<(&'o str, &'o str, bool)>,
    /// defined class names below each class (including itself)
    defined_below: HashMap<String, Vec<&'o str>>,
    index: IndividualIndex<'o>,
    extensions: OnceLock<Extensions<'o>>,
}

struct IndividualIndex<'o> {
    all: Vec<&'o Individual>,
    position: HashMap<&'o str, usize>,
}

struct Extensions<'o> {
    asserted: HashMap<&'o str, FixedBitSet>,
    role_pairs: HashMap<&'o str, Vec<(usize, usize)>>,
    bool_sets: HashMap<(&'o str, bool), FixedBitSet>,
    defined: HashMap<&'o str, FixedBitSet>,
}

impl<'o> Reasoner<'o> {
    pub fn new(ontology: &'o Ontology) -> Self {
        let closure = ClassClosure::build(ontology);
        let mut types: HashMap<&str, Vec<&str>> = HashMap::new();
        let mut successors: HashMap<(&str, &str), Vec<&str>> = HashMap::new();
        let mut bools = HashSet::new();
        for axiom in ontology.axioms() {
            match axiom {
                Axiom::ClassAssertion { class, individual } => {
                    types.entry(individual.as_str()).or_default().push(class.as_str())
                }
                Axiom::RoleAssertion { role, subject, object } => successors
                    .entry((role.as_str(), subject.as_str()))
                    .or_default()
                    .push(object.as_str()),
                Axiom::BoolAssertion { property, individual, value } => {
                    bools.insert((property.as_str(), individual.as_str(), *value));
                }
                _ => {}
            }
        }
        let mut defined_below: HashMap<String, Vec<&str>> = HashMap::new();
        for name in ontology.definitions().keys() {
            for sup in closure.superclasses(name) {
                defined_below.entry(sup).or_default().push(name.as_str());
            }
        }
        let all: Vec<&Individual> = ontology.individuals().iter().collect();
        let position = all.iter().enumerate().map(|(i, ind)| (ind.as_str(), i)).collect();
        Reasoner {
            ontology,
            closure,
            types,
            successors,
            bools,
            defined_below,
            index: IndividualIndex { all, position },
            extensions: OnceLock::new(),
        }
    }

    pub fn ontology(&self) -> &'o Ontology {
        self.ontology
    }

    pub fn closure(&self) -> &ClassClosure {
        &self.closure
    }

    /// Fails if `expr` mentions a name outside the ontology's signature.
    pub fn check_signature(&self, expr: &ClassExpression) -> Result<(), ReasonerError> {
        check_signature(self.ontology, expr)
    }

    /// Decides whether `ind` is an instance of `expr`.
    pub fn instance_check(
        &self,
        expr: &ClassExpression,
        ind: &Individual,
    ) -> Result<bool, ReasonerError> {
        self.check_signature(expr)?;
        if !self.index.position.contains_key(ind.as_str()) {
            return Err(ReasonerError::UnknownIndividual(ind.0.clone()));
        }
        Ok(self.holds(expr, ind.as_str()))
    }

    /// Unchecked variant of [`instance_check`](Self::instance_check): unknown
    /// names and individuals simply do not satisfy anything but `Thing`.
    pub fn holds(&self, expr: &ClassExpression, ind: &str) -> bool {
        let mut in_progress = Vec::new();
        self.eval(expr, ind, &mut in_progress)
    }

    fn eval<'a>(
        &'a self,
        expr: &'a ClassExpression,
        ind: &'a str,
        in_progress: &mut Vec<(&'a str, &'a str)>,
    ) -> bool {
        match expr {
            ClassExpression::Top => true,
            ClassExpression::Atomic(class) => {
                if let Some(asserted) = self.types.get(ind) {
                    if asserted.iter().any(|b| self.closure.is_subclass_of(b, class)) {
                        return true;
                    }
                }
                let Some(defined) = self.defined_below.get(class) else { return false };
                // A derivation that needs its own goal again can be cut back
                // to the inner derivation, so revisiting a goal never helps.
                if in_progress.contains(&(class.as_str(), ind)) {
                    return false;
                }
                in_progress.push((class.as_str(), ind));
                let ok = defined.iter().any(|&name| {
                    self.ontology.definition(name).is_some_and(|def| self.eval(def, ind, in_progress))
                });
                in_progress.pop();
                ok
            }
            ClassExpression::And(parts) => parts.iter().all(|p| self.eval(p, ind, in_progress)),
            ClassExpression::Or(parts) => parts.iter().any(|p| self.eval(p, ind, in_progress)),
            ClassExpression::Exists(role, filler) => self
                .successors
                .get(&(role.as_str(), ind))
                .is_some_and(|objs| objs.iter().any(|o| self.eval(filler, o, in_progress))),
            ClassExpression::Value(prop, value) => {
                self.bools.contains(&(prop.as_str(), ind, *value))
            }
        }
    }

    /// All individuals of the signature that are instances of `expr`.
    pub fn retrieval(&self, expr: &ClassExpression) -> Result<BTreeSet<Individual>, ReasonerError> {
        self.check_signature(expr)?;
        let bits = self.retrieval_bits(expr);
        Ok(bits.ones().map(|i| self.index.all[i].clone()).collect())
    }

    /// Extension of `expr` as a bitset over [`individuals`](Self::individuals).
    pub fn retrieval_bits(&self, expr: &ClassExpression) -> FixedBitSet {
        let ext = self.extensions();
        self.eval_bits(expr, ext, &ext.defined)
    }

    /// Individuals in bitset order.
    pub fn individuals(&self) -> &[&'o Individual] {
        &self.index.all
    }

    pub fn position(&self, ind: &str) -> Option<usize> {
        self.index.position.get(ind).copied()
    }

    fn extensions(&self) -> &Extensions<'o> {
        self.extensions.get_or_init(|| self.build_extensions())
    }

    fn build_extensions(&self) -> Extensions<'o> {
        let n = self.index.all.len();
        let mut asserted: HashMap<&str, FixedBitSet> = HashMap::new();
        let mut role_pairs: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
        let mut bool_sets: HashMap<(&str, bool), FixedBitSet> = HashMap::new();
        let pos = &self.index.position;
        for axiom in self.ontology.axioms() {
            match axiom {
                Axiom::ClassAssertion { class, individual } => asserted
                    .entry(class.as_str())
                    .or_insert_with(|| FixedBitSet::with_capacity(n))
                    .insert(pos[individual.as_str()]),
                Axiom::RoleAssertion { role, subject, object } => role_pairs
                    .entry(role.as_str())
                    .or_default()
                    .push((pos[subject.as_str()], pos[object.as_str()])),
                Axiom::BoolAssertion { property, individual, value } => bool_sets
                    .entry((property.as_str(), *value))
                    .or_insert_with(|| FixedBitSet::with_capacity(n))
                    .insert(pos[individual.as_str()]),
                _ => {}
            }
        }
        let mut ext = Extensions { asserted, role_pairs, bool_sets, defined: HashMap::new() };
        // Least fixpoint over all definitions, starting from empty extensions.
        let mut defined: HashMap<&str, FixedBitSet> = self
            .ontology
            .definitions()
            .keys()
            .map(|k| (k.as_str(), FixedBitSet::with_capacity(n)))
            .collect();
        loop {
            let mut changed = false;
            for (name, def) in self.ontology.definitions() {
                let next = self.eval_bits(def, &ext, &defined);
                if next != defined[name.as_str()] {
                    defined.insert(name.as_str(), next);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        ext.defined = defined;
        ext
    }

    fn eval_bits(
        &self,
        expr: &ClassExpression,
        ext: &Extensions<'o>,
        defined: &HashMap<&str, FixedBitSet>,
    ) -> FixedBitSet {
        let n = self.index.all.len();
        match expr {
            ClassExpression::Top => {
                let mut all = FixedBitSet::with_capacity(n);
                all.insert_range(..);
                all
            }
            ClassExpression::Atomic(class) => {
                let mut out = FixedBitSet::with_capacity(n);
                for sub in self.closure.subclasses(class) {
                    if let Some(bits) = ext.asserted.get(sub.as_str()) {
                        out.union_with(bits);
                    }
                    if let Some(bits) = defined.get(sub.as_str()) {
                        out.union_with(bits);
                    }
                }
                out
            }
            ClassExpression::And(parts) => {
                let mut iter = parts.iter();
                let mut out = match iter.next() {
                    Some(first) => self.eval_bits(first, ext, defined),
                    None => return self.eval_bits(&ClassExpression::Top, ext, defined),
                };
                for p in iter {
                    out.intersect_with(&self.eval_bits(p, ext, defined));
                }
                out
            }
            ClassExpression::Or(parts) => {
                let mut out = FixedBitSet::with_capacity(n);
                for p in parts {
                    out.union_with(&self.eval_bits(p, ext, defined));
                }
                out
            }
            ClassExpression::Exists(role, filler) => {
                let mut out = FixedBitSet::with_capacity(n);
                if let Some(pairs) = ext.role_pairs.get(role.as_str()) {
                    let fill = self.eval_bits(filler, ext, defined);
                    for &(s, o) in pairs {
                        if fill.contains(o) {
                            out.insert(s);
                        }
                    }
                }
                out
            }
            ClassExpression::Value(prop, value) => ext
                .bool_sets
                .get(&(prop.as_str(), *value))
                .cloned()
                .unwrap_or_else(|| FixedBitSet::with_capacity(n)),
        }
    }
}
