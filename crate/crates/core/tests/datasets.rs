use std::collections::BTreeSet;
use std::path::Path;

use hybrid_xai::datasets::{default_mapping, generate, load_dataset, parse_dataset, render_dataset, save_dataset, SyntheticSpec, PLANTED_CLASS};
use hybrid_xai::mapper::extract_structures;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn generated_graphs_are_simple_connected_and_carry_their_motif(seed in any::<u64>(), noise in 0.0f64..0.3) {
        let spec = SyntheticSpec { num_graphs: 30, seed, label_noise: noise, ..SyntheticSpec::default() };
        let data = generate(&spec).unwrap();
        let mapping = default_mapping();
        let planted = &mapping.structures.iter().find(|r| r.class == PLANTED_CLASS).unwrap().pattern;
        prop_assert_eq!(data.dataset.graphs.len(), 30);
        prop_assert_eq!(data.truth.len(), 30);
        for (g, t) in data.dataset.graphs.iter().zip(&data.truth) {
            prop_assert_eq!(&g.id, &t.graph_id);
            let a = g.adjacency();
            for u in 0..g.num_nodes {
                prop_assert_eq!(a[[u, u]], 0.0);
                for v in 0..g.num_nodes {
                    prop_assert_eq!(a[[u, v]], a[[v, u]]);
                }
            }
            prop_assert!(g.is_connected());
            if t.motif.is_some() {
                let found = extract_structures(g, &data.dataset.feature_names, planted).unwrap();
                let want: BTreeSet<(usize, usize)> = t.motif_edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
                prop_assert!(found.iter().any(|m| m.edges.iter().copied().collect::<BTreeSet<_>>() == want));
            }
        }
        if noise == 0.0 {
            prop_assert!(data.dataset.graphs.iter().zip(&data.truth).all(|(g, t)| g.label == t.clean_label));
        }
    }
}

#[test]
fn generation_is_seeded() {
    let spec = SyntheticSpec { num_graphs: 20, ..SyntheticSpec::default() };
    assert_eq!(render_dataset(&generate(&spec).unwrap().dataset), render_dataset(&generate(&spec).unwrap().dataset));
    let other = SyntheticSpec { seed: spec.seed + 1, ..spec.clone() };
    assert_ne!(render_dataset(&generate(&spec).unwrap().dataset), render_dataset(&generate(&other).unwrap().dataset));
}

#[test]
fn mutag_style_fixture_loads_and_round_trips() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mutag10.json");
    let dataset = load_dataset(&path).unwrap();
    assert_eq!(dataset.graphs.len(), 10);
    assert_eq!(dataset.feature_names, ["C", "N", "O", "F", "I", "Cl", "Br"]);
    assert_eq!(dataset.num_classes(), 2);
    let nitrobenzene = dataset.get("m0").unwrap();
    assert_eq!(nitrobenzene.num_nodes, 9);
    assert_eq!(nitrobenzene.edges().len(), 9);
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("copy.json");
    save_dataset(&dataset, &copy).unwrap();
    let back = load_dataset(&copy).unwrap();
    assert_eq!(render_dataset(&back), render_dataset(&dataset));
}

#[test]
fn one_directional_edges_are_rejected() {
    let text = r#"{"feature_names": ["C"], "graphs": [
        {"id": "g", "num_nodes": 2, "edges": [[0, 1]], "node_features": [["C"], ["C"]], "label": 0}]}"#;
    assert!(parse_dataset(text).is_err());
    let fixed = text.replace("[[0, 1]]", "[[0, 1], [1, 0]]");
    assert!(parse_dataset(&fixed).is_ok());
    let unknown = fixed.replace(r#"["C"], ["C"]]"#, r#"["C"], ["Xx"]]"#);
    assert!(parse_dataset(&unknown).is_err());
}
