use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::learner::{learn_with, LearnerConfig, LearningProblem, Refiner};
use crate::mapper::{graph_individual, sub_individual};
use crate::ontology::{Axiom, ClassExpression, Individual, Ontology};
use crate::reasoner::Reasoner;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    /// Learned from full-graph individuals.
    InputOutput,
    /// Learned from explainer-subgraph individuals.
    Importance,
}

impl ClassKind {
    fn prefix(self) -> &'static str {
        match self {
            ClassKind::InputOutput => "phi",
            ClassKind::Importance => "phihat",
        }
    }

    /// The example individual standing for graph `id`.
    pub fn individual(self, id: &str) -> Individual {
        match self {
            ClassKind::InputOutput => graph_individual(id),
            ClassKind::Importance => sub_individual(id),
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::InputOutput => "input-output",
            ClassKind::Importance => "importance",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplainerClass {
    /// `phi_<category>_<rank>` or `phihat_<category>_<rank>`.
    pub name: String,
    pub kind: ClassKind,
    pub category: usize,
    #[serde(with = "crate::serde_expr")]
    pub expr: ClassExpression,
    pub accuracy: f64,
}

impl ExplainerClass {
    pub fn definition(&self) -> Axiom {
        Axiom::equivalent(&self.name, self.expr.clone())
    }
}

impl fmt::Display for ExplainerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{} c{} acc {:.4}] {}", self.name, self.kind, self.category, self.accuracy, self.expr)
    }
}

/// Learns the explainer classes of one kind for one predicted category.
///
/// `examples` restricts which graphs serve as examples (typically the training
/// split); positives are those predicted as `category`, negatives the rest.
pub fn learn_explainer_classes(
    ontology: &Ontology,
    predictions: &BTreeMap<String, usize>,
    examples: &[String],
    category: usize,
    kind: ClassKind,
    config: &LearnerConfig,
) -> Result<Vec<ExplainerClass>, PipelineError> {
    let reasoner = Reasoner::new(ontology);
    let refiner = Refiner::new(ontology);
    learn_prepared(&reasoner, &refiner, predictions, examples, category, kind, config)
}

pub(crate) fn learn_prepared(
    reasoner: &Reasoner<'_>,
    refiner: &Refiner,
    predictions: &BTreeMap<String, usize>,
    examples: &[String],
    category: usize,
    kind: ClassKind,
    config: &LearnerConfig,
) -> Result<Vec<ExplainerClass>, PipelineError> {
    let mut positives = BTreeSet::new();
    let mut negatives = BTreeSet::new();
    for id in examples {
        let predicted = predictions.get(id).ok_or_else(|| PipelineError::UnknownGraph(id.clone()))?;
        if *predicted == category {
            positives.insert(kind.individual(id));
        } else {
            negatives.insert(kind.individual(id));
        }
    }
    if positives.is_empty() {
        return Err(PipelineError::CategoryAbsent(category));
    }
    if negatives.is_empty() {
        return Err(PipelineError::NoNegatives(category));
    }
    let problem = LearningProblem::new(reasoner.ontology(), positives, negatives)?;
    let result = learn_with(reasoner, refiner, &problem, config)?;
    if result.budget_exhausted {
        log::warn!("{kind} classes for category {category}: learner node budget exhausted");
    }
    Ok(result
        .candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| ExplainerClass {
            name: format!("{}_{category}_{}", kind.prefix(), i + 1),
            kind,
            category,
            expr: c.expr,
            accuracy: c.accuracy,
        })
        .collect())
}

/// Adds one `EquivalentTo` definition per pool class.
pub fn with_pool(ontology: &Ontology, pool: &[ExplainerClass]) -> Result<Ontology, PipelineError> {
    let mut out = ontology.clone();
    for class in pool {
        out.add_axiom(class.definition())?;
    }
    Ok(out)
}

pub fn render_pool(pool: &[ExplainerClass]) -> String {
    pool.iter().map(|c| format!("{c}\n")).collect()
}
