mod common;

use std::collections::{BTreeMap, BTreeSet};

use hybrid_xai::datasets::{generate, SyntheticSpec};
use hybrid_xai::gnn::TrainConfig;
use hybrid_xai::justifier::entails;
use hybrid_xai::learner::LearnerConfig;
use hybrid_xai::mapper::MuMap;
use hybrid_xai::ontology::{ClassExpression, Individual};
use hybrid_xai::pipeline::{entailment_frequency, fidelity_of_sets, fidelity_support, normalize_subgraph, Summary};
use hybrid_xai::reasoner::Reasoner;
use hybrid_xai::workflow::{run_all, RunConfig, RunOutput};
use proptest::prelude::*;

use common::*;

fn set(names: &[String]) -> BTreeSet<Individual> {
    names.iter().map(Individual::new).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fidelity_is_a_fraction(
        support in proptest::collection::btree_set("[a-f]", 0..6),
        subgraph in proptest::collection::btree_set("[a-f]", 0..6),
    ) {
        let s = set(&support.iter().cloned().collect::<Vec<_>>());
        let g = set(&subgraph.iter().cloned().collect::<Vec<_>>());
        match fidelity_of_sets(&s, &g) {
            None => prop_assert!(s.is_empty()),
            Some(f) => {
                prop_assert!((0.0..=1.0).contains(&f));
                prop_assert_eq!(f == 1.0, s.is_subset(&g));
                prop_assert_eq!(f == 0.0, s.is_disjoint(&g));
                let (hits, len) = fidelity_fraction(&support.iter().cloned().collect::<Vec<_>>(), &BTreeMap::new(), &subgraph.iter().cloned().collect::<Vec<_>>());
                prop_assert!((f - hits as f64 / len as f64).abs() < 1e-15);
            }
        }
        let superset: BTreeSet<Individual> = s.union(&g).cloned().collect();
        if !s.is_empty() {
            prop_assert_eq!(fidelity_of_sets(&s, &superset), Some(1.0));
        }
    }

    #[test]
    fn top_is_entailed_everywhere(seed in any::<u64>()) {
        let (axioms, n) = random_case(seed, 16, 8);
        let o = declared_ontology(&axioms, n);
        let reasoner = Reasoner::new(&o);
        prop_assert_eq!(entailment_frequency(&reasoner, &ClassExpression::Top, o.individuals()).unwrap(), 1.0);
    }
}

fn small_run() -> (RunOutput, BTreeMap<String, usize>) {
    let data = generate(&SyntheticSpec { num_graphs: 40, seed: 3, ..SyntheticSpec::default() }).unwrap();
    let truth: BTreeMap<String, usize> = data.truth.iter().map(|t| (t.graph_id.clone(), t.clean_label)).collect();
    let config = RunConfig {
        seed: 3,
        train: TrainConfig { epochs: 150, hidden: [16, 16, 16], ..TrainConfig::default() },
        learner: LearnerConfig { max_nodes: 5_000, max_results: 10, ..LearnerConfig::default() },
        ..RunConfig::default()
    };
    let out = run_all(&data.dataset, &data.delta, &data.mapping, &truth, &config).unwrap();
    (out, truth)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
        _ => false,
    }
}

#[test]
fn small_run_explanations_are_sound_and_reports_recompute() {
    let (out, truth) = small_run();
    assert_eq!(out.explanations.len(), out.split.test.len());
    assert!(out.explanations.iter().any(|e| !e.is_empty()));
    let mu: &MuMap = &out.corpus.mu;
    for e in &out.explanations {
        assert_eq!(e.predicted, out.predictions[&e.graph_id]);
        let subgraph = normalize_subgraph(out.corpus.subgraphs.get(&e.graph_id).unwrap_or(&BTreeSet::new()));
        for x in &e.entailed {
            let j = &x.justification;
            assert_eq!(j.expr, ClassExpression::atomic(x.class.name.clone()));
            assert!(entails(&j.axioms, &j.expr, &j.individual));
            for a in &j.axioms {
                let mut smaller = j.axioms.clone();
                smaller.remove(a);
                assert!(!entails(&smaller, &j.expr, &j.individual), "{} has a removable axiom", x.class.name);
            }
            assert_eq!(x.support, fidelity_support(j, &e.individual, mu));
            assert_eq!(x.fidelity, fidelity_of_sets(&x.support, &subgraph));
            if let (Some(f), Some(m)) = (x.fidelity, x.max_tie_fidelity) {
                assert!(m >= f);
            }
        }
    }

    let report = &out.report;
    for stats in &report.categories {
        let mut tp = Vec::new();
        let mut fp = Vec::new();
        let mut tp_graphs = 0;
        for e in out.explanations.iter().filter(|e| e.predicted == stats.category) {
            let fids: Vec<f64> = e.entailed.iter().filter_map(|x| x.fidelity).collect();
            if truth[&e.graph_id] == stats.category {
                tp_graphs += 1;
                tp.extend(fids);
            } else {
                fp.extend(fids);
            }
        }
        assert_eq!(stats.true_positives.graphs, tp_graphs);
        assert!(close(stats.true_positives.per_entailment.mean, mean(&tp)));
        assert!(close(stats.false_positives.per_entailment.mean, mean(&fp)));
        assert_eq!(stats.true_positives.per_entailment, Summary::of(&tp));
    }
    for class in &report.classes {
        let fids: Vec<f64> = out
            .explanations
            .iter()
            .flat_map(|e| &e.entailed)
            .filter(|x| x.class.name == class.name)
            .filter_map(|x| x.fidelity)
            .collect();
        assert!(close(class.fidelity.mean, mean(&fids)));
    }
    let correct = out.explanations.iter().filter(|e| truth[&e.graph_id] == e.predicted).count();
    assert!((report.model_accuracy - correct as f64 / out.explanations.len() as f64).abs() < 1e-12);

    let (again, _) = small_run();
    assert_eq!(again.explanations, out.explanations);
    assert_eq!(again.report, out.report);
}
