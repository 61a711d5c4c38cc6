use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{ExplainerClass, PipelineError};
use crate::justifier::{support_individuals, Justification, Justifier};
use crate::mapper::{mu_inverse, strip_sub, MuMap};
use crate::ontology::{ClassExpression, Individual, Ontology};
use crate::reasoner::Reasoner;

/// Classes of `pool` for `category` that the ontology entails on `individual`.
pub fn entail_classes<'p>(
    reasoner: &Reasoner<'_>,
    pool: &'p [ExplainerClass],
    individual: &Individual,
    category: usize,
) -> Result<Vec<&'p ExplainerClass>, PipelineError> {
    if reasoner.position(individual.as_str()).is_none() {
        return Err(PipelineError::UnknownIndividual(individual.0.clone()));
    }
    Ok(pool.iter().filter(|c| c.category == category && reasoner.holds(&c.expr, individual.as_str())).collect())
}

/// Fraction of `individuals` on which `expr` is entailed.
pub fn entailment_frequency(
    reasoner: &Reasoner<'_>,
    expr: &ClassExpression,
    individuals: &BTreeSet<Individual>,
) -> Result<f64, PipelineError> {
    if individuals.is_empty() {
        return Err(PipelineError::EmptyIndividuals);
    }
    reasoner.check_signature(expr)?;
    let mut hits = 0;
    for ind in individuals {
        if reasoner.position(ind.as_str()).is_none() {
            return Err(PipelineError::UnknownIndividual(ind.0.clone()));
        }
        if reasoner.holds(expr, ind.as_str()) {
            hits += 1;
        }
    }
    Ok(hits as f64 / individuals.len() as f64)
}

/// `|S ∩ sub| / |S|`, or `None` when `S` is empty.
pub fn fidelity_of_sets(support: &BTreeSet<Individual>, subgraph: &BTreeSet<Individual>) -> Option<f64> {
    if support.is_empty() {
        return None;
    }
    Some(support.intersection(subgraph).count() as f64 / support.len() as f64)
}

/// Base-graph ids of explainer-subgraph individuals.
pub fn normalize_subgraph(parts: &BTreeSet<Individual>) -> BTreeSet<Individual> {
    parts.iter().map(strip_sub).collect()
}

/// The support set compared against the subgraph: the justification's
/// individuals other than the graph itself, with structures expanded to edges.
pub fn fidelity_support(justification: &Justification, graph: &Individual, mu: &MuMap) -> BTreeSet<Individual> {
    mu_inverse(mu, &support_individuals(justification, graph))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntailedClass {
    pub class: ExplainerClass,
    pub justification: Justification,
    pub support: BTreeSet<Individual>,
    pub fidelity: Option<f64>,
    /// Highest fidelity over all justifications tied at minimum cardinality.
    pub max_tie_fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub graph_id: String,
    pub individual: Individual,
    pub predicted: usize,
    pub entailed: Vec<EntailedClass>,
}

impl Explanation {
    /// No pool class is entailed.
    pub fn is_empty(&self) -> bool {
        self.entailed.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Explanation for {} (predicted category {})", self.individual, self.predicted);
        if self.entailed.is_empty() {
            out.push_str("  no explainer class is entailed\n");
        }
        for e in &self.entailed {
            let _ = writeln!(out);
            let _ = writeln!(out, "  {} ({}, accuracy {:.4})", e.class.name, e.class.kind, e.class.accuracy);
            let _ = writeln!(out, "    {}", e.class.expr);
            let _ = writeln!(
                out,
                "  Justification ({} axioms{}):",
                e.justification.len(),
                if e.justification.best_effort { ", best effort" } else { "" }
            );
            for line in e.justification.render().lines() {
                let _ = writeln!(out, "    {line}");
            }
            match e.fidelity {
                Some(f) => {
                    let _ = writeln!(out, "  Fidelity: {f:.4}");
                }
                None => out.push_str("  Fidelity: n/a\n"),
            }
        }
        out
    }

    pub fn to_record(&self) -> ExplanationRecord {
        ExplanationRecord {
            graph_id: self.graph_id.clone(),
            individual: self.individual.0.clone(),
            predicted: self.predicted,
            entailed: self
                .entailed
                .iter()
                .map(|e| EntailedRecord {
                    name: e.class.name.clone(),
                    kind: e.class.kind.to_string(),
                    expr: e.class.expr.to_string(),
                    accuracy: e.class.accuracy,
                    justification: e.justification.axioms.iter().map(|a| a.to_string()).collect(),
                    best_effort: e.justification.best_effort,
                    support: e.support.iter().map(|i| i.0.clone()).collect(),
                    fidelity: e.fidelity,
                    max_tie_fidelity: e.max_tie_fidelity,
                })
                .collect(),
        }
    }
}

/// Serializable form of an explanation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplanationRecord {
    pub graph_id: String,
    pub individual: String,
    pub predicted: usize,
    pub entailed: Vec<EntailedRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntailedRecord {
    pub name: String,
    pub kind: String,
    pub expr: String,
    pub accuracy: f64,
    /// Justification axioms in ontology-file line format.
    pub justification: Vec<String>,
    pub best_effort: bool,
    pub support: Vec<String>,
    pub fidelity: Option<f64>,
    pub max_tie_fidelity: Option<f64>,
}

/// Reasoner and justifier over one ontology that already contains the pool
/// definitions.
pub struct InstanceExplainer<'o> {
    pub reasoner: Reasoner<'o>,
    justifier: Justifier<'o>,
}

impl<'o> InstanceExplainer<'o> {
    pub fn new(ontology: &'o Ontology) -> Self {
        InstanceExplainer { reasoner: Reasoner::new(ontology), justifier: Justifier::new(ontology) }
    }

    /// Minimum justification of the class on the graph individual and its
    /// fidelity against the explainer subgraph.
    pub fn fidelity(
        &self,
        class: &ExplainerClass,
        graph: &Individual,
        mu: &MuMap,
        subgraph: &BTreeSet<Individual>,
    ) -> Result<EntailedClass, PipelineError> {
        if self.reasoner.ontology().definition(&class.name).is_none() {
            return Err(PipelineError::MissingDefinition(class.name.clone()));
        }
        let subgraph = normalize_subgraph(subgraph);
        let mut ties = self.justifier.minimum(&ClassExpression::atomic(class.name.clone()), graph)?.into_iter();
        let justification = ties.next().expect("minimum returns at least one justification");
        let support = fidelity_support(&justification, graph, mu);
        let fidelity = fidelity_of_sets(&support, &subgraph);
        let max_tie_fidelity = ties
            .filter_map(|j| fidelity_of_sets(&fidelity_support(&j, graph, mu), &subgraph))
            .fold(fidelity, |best, f| Some(best.map_or(f, |b: f64| b.max(f))));
        Ok(EntailedClass { class: class.clone(), justification, support, fidelity, max_tie_fidelity })
    }

    pub fn explain(
        &self,
        pool: &[ExplainerClass],
        graph_id: &str,
        graph: &Individual,
        predicted: usize,
        mu: &MuMap,
        subgraph: &BTreeSet<Individual>,
    ) -> Result<Explanation, PipelineError> {
        let entailed = entail_classes(&self.reasoner, pool, graph, predicted)?
            .into_iter()
            .map(|class| self.fidelity(class, graph, mu, subgraph))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Explanation { graph_id: graph_id.to_string(), individual: graph.clone(), predicted, entailed })
    }
}

/// Fidelity of one pool class on one graph.
pub fn fidelity(
    ontology: &Ontology,
    class: &ExplainerClass,
    graph: &Individual,
    mu: &MuMap,
    subgraph: &BTreeSet<Individual>,
) -> Result<Option<f64>, PipelineError> {
    Ok(InstanceExplainer::new(ontology).fidelity(class, graph, mu, subgraph)?.fidelity)
}

pub fn final_explanation(
    ontology: &Ontology,
    pool: &[ExplainerClass],
    graph_id: &str,
    predicted: usize,
    mu: &MuMap,
    subgraph: &BTreeSet<Individual>,
) -> Result<Explanation, PipelineError> {
    let graph = crate::mapper::graph_individual(graph_id);
    InstanceExplainer::new(ontology).explain(pool, graph_id, &graph, predicted, mu, subgraph)
}
