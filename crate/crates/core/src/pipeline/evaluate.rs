use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ExplainerClass, Explanation, PipelineError};
use crate::learner::{learn, LearnerConfig, LearningProblem};
use crate::mapper::graph_individual;
use crate::ontology::{ClassExpression, Ontology};
use crate::reasoner::Reasoner;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub sd: Option<f64>,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Summary::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Summary { count: values.len(), mean: Some(mean), sd: Some(var.sqrt()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub name: String,
    pub kind: String,
    pub category: usize,
    pub expr: String,
    pub accuracy: f64,
    /// Graphs predicted as the class's category.
    pub eligible: usize,
    pub entailed: usize,
    /// `entailed / eligible`.
    pub entailment_rate: Option<f64>,
    /// Over entailed graphs with a defined fidelity.
    pub fidelity: Summary,
    /// Same, using the best of the tied minimum justifications.
    pub max_tie_fidelity: Summary,
    pub undefined_fidelity: usize,
}

/// Graphs predicted as one category whose ground truth agrees (TP) or not (FP).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub graphs: usize,
    pub entailments: usize,
    /// Mean over all entailments with defined fidelity.
    pub per_entailment: Summary,
    /// Mean over graphs of each graph's mean fidelity.
    pub per_graph: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: usize,
    pub true_positives: Partition,
    pub false_positives: Partition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub graphs: usize,
    pub model_accuracy: f64,
    pub empty_explanations: usize,
    pub classes: Vec<ClassStats>,
    pub categories: Vec<CategoryStats>,
    /// Pearson correlation of class accuracy and mean fidelity.
    pub accuracy_fidelity_correlation: Option<f64>,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Aggregates per-graph explanations. Every number is recomputable from the
/// explanations and `truth` alone.
pub fn evaluate(
    explanations: &[Explanation],
    truth: &BTreeMap<String, usize>,
    pool: &[ExplainerClass],
) -> Result<EvaluationReport, PipelineError> {
    let label = |id: &str| truth.get(id).copied().ok_or_else(|| PipelineError::UnknownGraph(id.to_string()));
    let mut correct = 0;
    for e in explanations {
        if label(&e.graph_id)? == e.predicted {
            correct += 1;
        }
    }

    let classes = pool
        .iter()
        .map(|class| {
            let eligible = explanations.iter().filter(|e| e.predicted == class.category).count();
            let hits: Vec<(Option<f64>, Option<f64>)> = explanations
                .iter()
                .flat_map(|e| e.entailed.iter())
                .filter(|x| x.class.name == class.name)
                .map(|x| (x.fidelity, x.max_tie_fidelity))
                .collect();
            let defined: Vec<f64> = hits.iter().filter_map(|h| h.0).collect();
            let tie_max: Vec<f64> = hits.iter().filter_map(|h| h.1).collect();
            ClassStats {
                name: class.name.clone(),
                kind: class.kind.to_string(),
                category: class.category,
                expr: class.expr.to_string(),
                accuracy: class.accuracy,
                eligible,
                entailed: hits.len(),
                entailment_rate: (eligible > 0).then(|| hits.len() as f64 / eligible as f64),
                undefined_fidelity: hits.len() - defined.len(),
                fidelity: Summary::of(&defined),
                max_tie_fidelity: Summary::of(&tie_max),
            }
        })
        .collect::<Vec<_>>();

    let categories: BTreeSet<usize> = explanations.iter().map(|e| e.predicted).chain(pool.iter().map(|c| c.category)).collect();
    let mut category_stats = Vec::new();
    for category in categories {
        let mut tp = Vec::new();
        let mut fp = Vec::new();
        for e in explanations.iter().filter(|e| e.predicted == category) {
            if label(&e.graph_id)? == category {
                tp.push(e);
            } else {
                fp.push(e);
            }
        }
        category_stats.push(CategoryStats { category, true_positives: partition(&tp), false_positives: partition(&fp) });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) =
        classes.iter().filter_map(|c| c.fidelity.mean.map(|m| (c.accuracy, m))).unzip();
    Ok(EvaluationReport {
        graphs: explanations.len(),
        model_accuracy: if explanations.is_empty() { 0.0 } else { correct as f64 / explanations.len() as f64 },
        empty_explanations: explanations.iter().filter(|e| e.is_empty()).count(),
        classes,
        categories: category_stats,
        accuracy_fidelity_correlation: pearson(&xs, &ys),
    })
}

fn partition(explanations: &[&Explanation]) -> Partition {
    let all: Vec<f64> = explanations.iter().flat_map(|e| e.entailed.iter().filter_map(|x| x.fidelity)).collect();
    let per_graph: Vec<f64> = explanations
        .iter()
        .filter_map(|e| Summary::of(&e.entailed.iter().filter_map(|x| x.fidelity).collect::<Vec<_>>()).mean)
        .collect();
    Partition {
        graphs: explanations.len(),
        entailments: explanations.iter().map(|e| e.entailed.len()).sum(),
        per_entailment: Summary::of(&all),
        per_graph: Summary::of(&per_graph),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

impl EvaluationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graphs: {}  model accuracy: {:.4}  empty explanations: {}", self.graphs, self.model_accuracy, self.empty_explanations);
        let _ = writeln!(out, "\nclass\tkind\tcategory\taccuracy\tentailment rate\tfidelity mean\tfidelity sd\tn/a\texpression");
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.4}\t{}\t{}\t{}\t{}\t{}",
                c.name,
                c.kind,
                c.category,
                c.accuracy,
                fmt_opt(c.entailment_rate),
                fmt_opt(c.fidelity.mean),
                fmt_opt(c.fidelity.sd),
                c.undefined_fidelity,
                c.expr
            );
        }
        let _ = writeln!(out, "\ncategory\tpartition\tgraphs\tentailments\tfidelity per entailment\tfidelity per graph");
        for c in &self.categories {
            for (name, p) in [("TP", &c.true_positives), ("FP", &c.false_positives)] {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    c.category,
                    name,
                    p.graphs,
                    p.entailments,
                    fmt_opt(p.per_entailment.mean),
                    fmt_opt(p.per_graph.mean)
                );
            }
        }
        let _ = writeln!(out, "\naccuracy/fidelity correlation: {}", fmt_opt(self.accuracy_fidelity_correlation));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    #[serde(with = "crate::serde_expr")]
    pub expr: ClassExpression,
    pub positive_category: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Pure inductive-logic classifier: the top learner candidate for
/// `positive_category` on ground-truth labels, evaluated on held-out graphs.
pub fn baseline_pure_ill(
    ontology: &Ontology,
    train: &BTreeMap<String, usize>,
    test: &BTreeMap<String, usize>,
    positive_category: usize,
    config: &LearnerConfig,
) -> Result<BaselineResult, PipelineError> {
    let mut positives = BTreeSet::new();
    let mut negatives = BTreeSet::new();
    for (id, &label) in train {
        if label == positive_category {
            positives.insert(graph_individual(id));
        } else {
            negatives.insert(graph_individual(id));
        }
    }
    let problem = LearningProblem::new(ontology, positives, negatives)?;
    // The classifier must exist even if nothing beats the cutoff.
    let config = LearnerConfig { cutoff: f64::NEG_INFINITY, ..config.clone() };
    let result = learn(ontology, &problem, &config)?;
    let best = result.candidates.into_iter().next().ok_or(PipelineError::NoClassifier)?;
    let reasoner = Reasoner::new(ontology);
    let mut correct = 0;
    for (id, &label) in test {
        let ind = graph_individual(id);
        if reasoner.position(ind.as_str()).is_none() {
            return Err(PipelineError::UnknownGraph(id.clone()));
        }
        let predicted_positive = reasoner.holds(&best.expr, ind.as_str());
        if predicted_positive == (label == positive_category) {
            correct += 1;
        }
    }
    Ok(BaselineResult {
        expr: best.expr,
        positive_category,
        train_accuracy: best.accuracy,
        test_accuracy: if test.is_empty() { 0.0 } else { correct as f64 / test.len() as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::justifier::Justification;
    use crate::ontology::{parse_manchester, parse_ontology, Individual};
    use crate::pipeline::{ClassKind, EntailedClass};

    fn class(name: &str, category: usize, accuracy: f64) -> ExplainerClass {
        ExplainerClass {
            name: name.into(),
            kind: ClassKind::Importance,
            category,
            expr: ClassExpression::Top,
            accuracy,
        }
    }

    fn explanation(id: &str, predicted: usize, entailed: &[(&ExplainerClass, Option<f64>)]) -> Explanation {
        let individual = Individual::from(format!("graph_{id}").as_str());
        Explanation {
            graph_id: id.into(),
            individual: individual.clone(),
            predicted,
            entailed: entailed
                .iter()
                .map(|&(c, fidelity)| EntailedClass {
                    class: c.clone(),
                    justification: Justification {
                        axioms: BTreeSet::new(),
                        expr: ClassExpression::atomic(c.name.clone()),
                        individual: individual.clone(),
                        best_effort: false,
                    },
                    support: BTreeSet::new(),
                    fidelity,
                    max_tie_fidelity: fidelity,
                })
                .collect(),
        }
    }

    #[test]
    fn summary_and_pearson() {
        let s = Summary::of(&[1.0, 3.0]);
        assert_eq!((s.count, s.mean, s.sd), (2, Some(2.0), Some(1.0)));
        assert_eq!(Summary::of(&[]).mean, None);
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[2.0, 3.0]), None);
    }

    #[test]
    fn report_rows_match_hand_computation() {
        let a = class("phihat_1_1", 1, 0.9);
        let b = class("phihat_1_2", 1, 0.6);
        let z = class("phihat_0_1", 0, 0.8);
        let explanations = vec![
            explanation("0", 1, &[(&a, Some(1.0)), (&b, Some(0.5))]),
            explanation("1", 1, &[(&a, Some(0.5))]),
            explanation("2", 1, &[(&b, None)]),
            explanation("3", 0, &[(&z, Some(0.25))]),
            explanation("4", 0, &[]),
        ];
        let truth: BTreeMap<String, usize> =
            [("0", 1), ("1", 1), ("2", 0), ("3", 0), ("4", 1)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let pool = vec![a, b, z];
        let r = evaluate(&explanations, &truth, &pool).unwrap();
        assert_eq!(r.graphs, 5);
        assert_eq!(r.model_accuracy, 0.6);
        assert_eq!(r.empty_explanations, 1);

        let a = &r.classes[0];
        assert_eq!((a.eligible, a.entailed, a.undefined_fidelity), (3, 2, 0));
        assert_eq!(a.entailment_rate, Some(2.0 / 3.0));
        assert_eq!((a.fidelity.mean, a.fidelity.sd), (Some(0.75), Some(0.25)));
        let b = &r.classes[1];
        assert_eq!((b.entailed, b.undefined_fidelity, b.fidelity.mean), (2, 1, Some(0.5)));
        let z = &r.classes[2];
        assert_eq!((z.eligible, z.entailment_rate, z.fidelity.mean), (2, Some(0.5), Some(0.25)));

        let c1 = r.categories.iter().find(|c| c.category == 1).unwrap();
        assert_eq!((c1.true_positives.graphs, c1.true_positives.entailments), (2, 3));
        assert_eq!(c1.true_positives.per_entailment.mean, Some(2.0 / 3.0));
        assert_eq!(c1.true_positives.per_graph.mean, Some(0.625));
        assert_eq!((c1.false_positives.graphs, c1.false_positives.per_entailment.mean), (1, None));
        let c0 = r.categories.iter().find(|c| c.category == 0).unwrap();
        assert_eq!((c0.true_positives.graphs, c0.false_positives.graphs), (1, 1));
        assert_eq!(c0.false_positives.entailments, 0);
        let total: usize = r.categories.iter().map(|c| c.true_positives.graphs + c.false_positives.graphs).sum();
        assert_eq!(total, r.graphs);

        // accuracy (0.9, 0.6, 0.8) against mean fidelity (0.75, 0.5, 0.25)
        let expected = pearson(&[0.9, 0.6, 0.8], &[0.75, 0.5, 0.25]).unwrap();
        assert_eq!(r.accuracy_fidelity_correlation, Some(expected));
        assert!(r.render().contains("phihat_1_1\timportance\t1\t0.9000\t0.6667\t0.7500"));
    }

    #[test]
    fn perfect_model_has_empty_false_positive_partition() {
        let a = class("phihat_1_1", 1, 1.0);
        let explanations = vec![explanation("0", 1, &[(&a, Some(1.0))]), explanation("1", 0, &[])];
        let truth: BTreeMap<String, usize> = [("0".to_string(), 1), ("1".to_string(), 0)].into();
        let r = evaluate(&explanations, &truth, &[a]).unwrap();
        let c1 = r.categories.iter().find(|c| c.category == 1).unwrap();
        assert_eq!(c1.true_positives.per_entailment.mean, Some(1.0));
        assert_eq!(c1.false_positives.graphs, 0);
        assert_eq!(r.model_accuracy, 1.0);
    }

    #[test]
    fn unknown_graph_in_truth_is_an_error() {
        let explanations = vec![explanation("7", 1, &[])];
        assert!(matches!(evaluate(&explanations, &BTreeMap::new(), &[]), Err(PipelineError::UnknownGraph(_))));
    }

    #[test]
    fn pure_ill_baseline_on_separable_toy() {
        let mut text = String::new();
        let mut train = BTreeMap::new();
        let mut test = BTreeMap::new();
        for i in 0..8 {
            let atom = if i % 2 == 0 { "Nitrogen" } else { "Carbon" };
            text.push_str(&format!(
                "Type(graph_{i}, Compound)\nRole(hasAtom, graph_{i}, feature_{i}_0)\nType(feature_{i}_0, {atom})\n"
            ));
            let split = if i < 4 { &mut train } else { &mut test };
            split.insert(i.to_string(), usize::from(i % 2 == 0));
        }
        let o = parse_ontology(&text).unwrap();
        let b = baseline_pure_ill(&o, &train, &test, 1, &LearnerConfig::default()).unwrap();
        assert_eq!(b.expr, parse_manchester("hasAtom some Nitrogen").unwrap());
        assert_eq!((b.train_accuracy, b.test_accuracy), (1.0, 1.0));
    }
}
