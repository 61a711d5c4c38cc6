//! Class-expression learning by top-down refinement and beam search.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ClassExpression, Individual, Ontology};
use crate::reasoner::{check_signature, ClassClosure, Reasoner, ReasonerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("learning problem needs at least one positive and one negative example")]
    EmptyProblem,
    #[error("individual {0} is both a positive and a negative example")]
    Overlap(String),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearningProblem {
    pub positives: BTreeSet<Individual>,
    pub negatives: BTreeSet<Individual>,
}

impl LearningProblem {
    pub fn new(
        ontology: &Ontology,
        positives: BTreeSet<Individual>,
        negatives: BTreeSet<Individual>,
    ) -> Result<Self, LearnError> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(LearnError::EmptyProblem);
        }
        if let Some(both) = positives.intersection(&negatives).next() {
            return Err(LearnError::Overlap(both.0.clone()));
        }
        if let Some(missing) = positives.iter().chain(&negatives).find(|i| !ontology.individuals().contains(*i)) {
            return Err(ReasonerError::UnknownIndividual(missing.0.clone()).into());
        }
        Ok(LearningProblem { positives, negatives })
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `pos <id>` / `neg <id>` lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.positives {
            out.push_str(&format!("pos {p}\n"));
        }
        for n in &self.negatives {
            out.push_str(&format!("neg {n}\n"));
        }
        out
    }

    pub fn parse(ontology: &Ontology, text: &str) -> Result<Self, String> {
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once(char::is_whitespace) {
                Some(("pos", id)) => pos.insert(Individual::new(id.trim())),
                Some(("neg", id)) => neg.insert(Individual::new(id.trim())),
                _ => return Err(format!("line {}: expected `pos <id>` or `neg <id>`", i + 1)),
            };
        }
        LearningProblem::new(ontology, pos, neg).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(with = "crate::serde_expr")]
    pub expr: ClassExpression,
    pub accuracy: f64,
    pub covered_pos: usize,
    pub covered_neg: usize,
}

impl fmt::Display for Candidate {
    /// `accuracy<TAB>expression`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}\t{}", self.accuracy, self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub beam_width: usize,
    pub max_depth: usize,
    pub max_length: usize,
    /// Candidates need accuracy strictly above this.
    pub cutoff: f64,
    /// Maximum number of expressions scored.
    pub max_nodes: usize,
    pub length_bonus: f64,
    /// Maximum number of returned candidates.
    pub max_results: usize,
    /// How many of the best candidates are paired into disjunctions.
    pub disjunction_pool: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            beam_width: 200,
            max_depth: 3,
            max_length: 7,
            cutoff: 0.5,
            max_nodes: 50_000,
            length_bonus: 0.01,
            max_results: 50,
            disjunction_pool: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnResult {
    pub candidates: Vec<Candidate>,
    pub nodes_scored: usize,
    pub budget_exhausted: bool,
}

/// Downward refinement operator over the class hierarchy of one ontology.
pub struct Refiner {
    closure: ClassClosure,
    most_general: Vec<ClassExpression>,
    direct_subclasses: HashMap<String, Vec<String>>,
    roles: Vec<String>,
    bool_props: Vec<String>,
}

impl Refiner {
    pub fn new(ontology: &Ontology) -> Self {
        let closure = ClassClosure::build(ontology);
        let classes: Vec<&String> = ontology.classes().iter().collect();
        let strictly_below = |a: &str, b: &str| closure.is_subclass_of(a, b) && !closure.is_subclass_of(b, a);
        let most_general = classes
            .iter()
            .filter(|c| !classes.iter().any(|d| strictly_below(c, d)))
            .map(|c| ClassExpression::atomic(c.as_str()))
            .collect();
        let mut direct_subclasses: HashMap<String, Vec<String>> = HashMap::new();
        for &a in &classes {
            let below: Vec<&String> = classes.iter().copied().filter(|b| strictly_below(b, a)).collect();
            let direct = below
                .iter()
                .filter(|b| !below.iter().any(|c| strictly_below(b, c)))
                .map(|b| b.to_string())
                .collect();
            direct_subclasses.insert(a.clone(), direct);
        }
        Refiner {
            closure,
            most_general,
            direct_subclasses,
            roles: ontology.roles().iter().cloned().collect(),
            bool_props: ontology.bool_props().iter().cloned().collect(),
        }
    }

    pub fn closure(&self) -> &ClassClosure {
        &self.closure
    }

    /// Expressions that may be conjoined to anything.
    fn conjuncts(&self) -> Vec<ClassExpression> {
        let mut out = self.most_general.clone();
        out.extend(self.roles.iter().map(|r| ClassExpression::exists(r.as_str(), ClassExpression::Top)));
        for p in &self.bool_props {
            out.push(ClassExpression::value(p.as_str(), true));
            out.push(ClassExpression::value(p.as_str(), false));
        }
        out
    }

    /// Specializations that do not add a conjunct.
    fn specialize(&self, expr: &ClassExpression) -> Vec<ClassExpression> {
        match expr {
            ClassExpression::Top => self.conjuncts(),
            ClassExpression::Atomic(a) => self
                .direct_subclasses
                .get(a)
                .map(|subs| subs.iter().map(|s| ClassExpression::atomic(s.as_str())).collect())
                .unwrap_or_default(),
            ClassExpression::Exists(r, filler) => {
                let mut fillers = self.specialize(filler);
                if !matches!(**filler, ClassExpression::Top) {
                    fillers.extend(self.with_conjunct(filler));
                }
                fillers.into_iter().map(|f| ClassExpression::exists(r.as_str(), f)).collect()
            }
            ClassExpression::And(parts) => {
                let mut out = Vec::new();
                for (i, part) in parts.iter().enumerate() {
                    for refined in self.specialize(part) {
                        let mut next = parts.clone();
                        next[i] = refined;
                        out.push(ClassExpression::and(next));
                    }
                }
                out
            }
            ClassExpression::Or(parts) => {
                let mut out = Vec::new();
                for (i, part) in parts.iter().enumerate() {
                    for refined in self.refine(part) {
                        let mut next = parts.clone();
                        next[i] = refined;
                        out.push(ClassExpression::or(next));
                    }
                }
                out
            }
            ClassExpression::Value(..) => Vec::new(),
        }
    }

    fn with_conjunct(&self, expr: &ClassExpression) -> Vec<ClassExpression> {
        let present: Vec<&ClassExpression> = match expr {
            ClassExpression::And(parts) => parts.iter().collect(),
            other => vec![other],
        };
        self.conjuncts()
            .into_iter()
            .filter(|d| !present.contains(&d))
            .map(|d| ClassExpression::and(vec![expr.clone(), d]))
            .collect()
    }

    /// Downward refinements of `expr`, canonical and deduplicated.
    pub fn refine(&self, expr: &ClassExpression) -> Vec<ClassExpression> {
        let mut out = self.specialize(expr);
        if !matches!(expr, ClassExpression::Top) {
            out.extend(self.with_conjunct(expr));
        }
        let mut seen = HashSet::new();
        out.retain(|e| e != expr && !self.redundant(e) && seen.insert(e.clone()));
        out
    }

    /// Whether `a` is told-subsumed by `b`, with `Thing` above everything.
    fn below(&self, a: &ClassExpression, b: &ClassExpression) -> bool {
        match (a, b) {
            (_, ClassExpression::Top) => true,
            (ClassExpression::Atomic(x), ClassExpression::Atomic(y)) => self.closure.is_subclass_of(x, y),
            _ => false,
        }
    }

    /// Some conjunction or disjunction holds two operands where one is
    /// told-subsumed by the other (`A ⊑ B`, `r some A` against `r some B`, or
    /// anything against `Thing`). `A and B` then equals `A` and `A or B`
    /// equals `B`, a shorter expression the search reaches anyway.
    pub fn redundant(&self, expr: &ClassExpression) -> bool {
        match expr {
            ClassExpression::Top | ClassExpression::Atomic(_) | ClassExpression::Value(..) => false,
            ClassExpression::Exists(_, filler) => self.redundant(filler),
            ClassExpression::And(parts) | ClassExpression::Or(parts) => {
                let pair_redundant = |a: &ClassExpression, b: &ClassExpression| match (a, b) {
                    (_, ClassExpression::Top) => true,
                    (ClassExpression::Atomic(_), ClassExpression::Atomic(_)) => self.below(a, b),
                    (ClassExpression::Exists(r, x), ClassExpression::Exists(s, y)) => r == s && self.below(x, y),
                    _ => false,
                };
                parts.iter().enumerate().any(|(i, a)| {
                    parts.iter().enumerate().any(|(j, b)| i != j && pair_redundant(a, b))
                }) || parts.iter().any(|p| self.redundant(p))
            }
        }
    }
}

/// Convenience wrapper building a [`Refiner`] for one call.
pub fn refine(expr: &ClassExpression, ontology: &Ontology) -> Vec<ClassExpression> {
    Refiner::new(ontology).refine(&expr.canonical())
}

/// Positive and negative examples as bitsets over a reasoner's individuals.
struct Examples {
    positives: FixedBitSet,
    negatives: FixedBitSet,
    num_pos: usize,
    num_neg: usize,
}

impl Examples {
    fn new(reasoner: &Reasoner<'_>, problem: &LearningProblem) -> Result<Self, LearnError> {
        let n = reasoner.individuals().len();
        let bits = |set: &BTreeSet<Individual>| -> Result<FixedBitSet, LearnError> {
            let mut b = FixedBitSet::with_capacity(n);
            for ind in set {
                let i = reasoner
                    .position(ind.as_str())
                    .ok_or_else(|| ReasonerError::UnknownIndividual(ind.0.clone()))?;
                b.insert(i);
            }
            Ok(b)
        };
        Ok(Examples {
            positives: bits(&problem.positives)?,
            negatives: bits(&problem.negatives)?,
            num_pos: problem.positives.len(),
            num_neg: problem.negatives.len(),
        })
    }

    fn candidate(&self, expr: ClassExpression, cover: &FixedBitSet) -> Candidate {
        let covered_pos = cover.intersection(&self.positives).count();
        let covered_neg = cover.intersection(&self.negatives).count();
        let accuracy =
            (covered_pos + self.num_neg - covered_neg) as f64 / (self.num_pos + self.num_neg) as f64;
        Candidate { expr, accuracy, covered_pos, covered_neg }
    }
}

/// Scores one expression against a learning problem.
pub fn score(
    ontology: &Ontology,
    expr: &ClassExpression,
    problem: &LearningProblem,
) -> Result<Candidate, LearnError> {
    check_signature(ontology, expr)?;
    let reasoner = Reasoner::new(ontology);
    let examples = Examples::new(&reasoner, problem)?;
    Ok(examples.candidate(expr.canonical(), &reasoner.retrieval_bits(expr)))
}

/// Total order used for result lists: accuracy descending, then length, then
/// printed form.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.accuracy
        .total_cmp(&a.accuracy)
        .then(a.expr.length().cmp(&b.expr.length()))
        .then_with(|| a.expr.to_string().cmp(&b.expr.to_string()))
}

pub fn learn(
    ontology: &Ontology,
    problem: &LearningProblem,
    config: &LearnerConfig,
) -> Result<LearnResult, LearnError> {
    let reasoner = Reasoner::new(ontology);
    let refiner = Refiner::new(ontology);
    learn_with(&reasoner, &refiner, problem, config)
}

/// Beam search from `Thing` using a prepared reasoner and refiner.
pub fn learn_with(
    reasoner: &Reasoner<'_>,
    refiner: &Refiner,
    problem: &LearningProblem,
    config: &LearnerConfig,
) -> Result<LearnResult, LearnError> {
    let examples = Examples::new(reasoner, problem)?;
    let heuristic = |c: &Candidate| c.accuracy + config.length_bonus / c.expr.length() as f64;
    let admissible = |e: &ClassExpression| e.depth() <= config.max_depth && e.length() <= config.max_length;

    let mut seen: HashSet<ClassExpression> = HashSet::new();
    let mut all: Vec<Candidate> = Vec::new();
    let top = examples.candidate(ClassExpression::Top, &reasoner.retrieval_bits(&ClassExpression::Top));
    seen.insert(ClassExpression::Top);
    let mut beam = vec![top.clone()];
    all.push(top);
    let mut exhausted = false;

    while !beam.is_empty() && !exhausted {
        let mut fresh: Vec<ClassExpression> = Vec::new();
        for parent in &beam {
            for child in refiner.refine(&parent.expr) {
                if admissible(&child) && seen.insert(child.clone()) {
                    fresh.push(child);
                }
            }
        }
        let room = config.max_nodes.saturating_sub(all.len());
        if fresh.len() > room {
            fresh.truncate(room);
            exhausted = true;
        }
        let scored: Vec<Candidate> = fresh
            .into_par_iter()
            .map(|e| {
                let cover = reasoner.retrieval_bits(&e);
                examples.candidate(e, &cover)
            })
            .collect();
        // Expressions covering no positive example cannot be improved by
        // further specialization, so they are kept but not expanded.
        let mut next: Vec<Candidate> = scored.iter().filter(|c| c.covered_pos > 0).cloned().collect();
        next.sort_by(|a, b| heuristic(b).total_cmp(&heuristic(a)).then_with(|| candidate_order(a, b)));
        next.truncate(config.beam_width);
        all.extend(scored);
        beam = next;
    }

    let mut conjunctive: Vec<Candidate> = all.clone();
    conjunctive.sort_by(candidate_order);
    let heads: Vec<&Candidate> = conjunctive
        .iter()
        .filter(|c| !matches!(c.expr, ClassExpression::Top) && c.covered_pos > 0)
        .take(config.disjunction_pool)
        .collect();
    let mut unions = Vec::new();
    for (i, a) in heads.iter().enumerate() {
        for b in &heads[i + 1..] {
            let e = ClassExpression::or(vec![a.expr.clone(), b.expr.clone()]);
            if admissible(&e) && !refiner.redundant(&e) && seen.insert(e.clone()) {
                unions.push(e);
            }
        }
    }
    let scored_unions: Vec<Candidate> = unions
        .into_par_iter()
        .map(|e| {
            let cover = reasoner.retrieval_bits(&e);
            examples.candidate(e, &cover)
        })
        .collect();
    all.extend(scored_unions);

    let nodes_scored = all.len();
    all.retain(|c| c.accuracy > config.cutoff);
    all.sort_by(candidate_order);
    all.truncate(config.max_results);
    Ok(LearnResult { candidates: all, nodes_scored, budget_exhausted: exhausted })
}

/// One `accuracy<TAB>expression` line per candidate.
pub fn render_candidates(candidates: &[Candidate]) -> String {
    candidates.iter().map(|c| format!("{c}\n")).collect()
}
