use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hxai(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hxai"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_RUN: &[&str] =
    &["run", "--num-graphs", "40", "--epochs", "120", "--hidden", "16,16,16", "--beam", "50", "--pool-size", "10"];

#[test]
fn full_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = hxai(&out, SMALL_RUN);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "dataset.json",
        "delta.ont",
        "model.json",
        "masks.json",
        "ontology.ont",
        "mu.txt",
        "pool.txt",
        "evaluation.txt",
        "evaluation.json",
        "baselines.txt",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let split: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("split.json")).unwrap()).unwrap();
    let test_ids = split["test"].as_array().unwrap();
    assert!(!test_ids.is_empty());
    for id in test_ids {
        let file = out.join("explanations").join(format!("{}.txt", id.as_str().unwrap()));
        let text = fs::read_to_string(&file).unwrap();
        assert!(text.starts_with("Explanation for graph_"), "{}", file.display());
    }

    let id = test_ids[0].as_str().unwrap();
    let o = hxai(&out, &["explain-instance", id]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout), fs::read_to_string(out.join("explanations").join(format!("{id}.txt"))).unwrap());

    let o = hxai(&out, &["explain-instance", "no_such_graph"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown graph"), "{}", stderr(&o));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(hxai(&a, SMALL_RUN).status.success());
    assert!(hxai(&b, SMALL_RUN).status.success());
    for name in ["evaluation.json", "pool.txt", "ontology.ont", "baselines.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn stages_out_of_order_name_the_missing_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(hxai(&out, &["generate", "--num-graphs", "20"]).status.success());
    let o = hxai(&out, &["learn-classes"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("run `hxai map` first"), "{}", stderr(&o));
    let o = hxai(&out, &["explain"]);
    assert!(stderr(&o).contains("run `hxai train` first"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(hxai(&out, &["generate", "--num-graphs", "20"]).status.success());
    let o = hxai(&out, &["train", "--split", "1.5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("split"), "{}", stderr(&o));
    let o = hxai(&out, &["train", "--hidden", "4,0,4", "--epochs", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("hidden widths must be positive"), "{}", stderr(&o));
    let o = hxai(&out, &["train", "--hidden", "4,4", "--epochs", "1"]);
    assert!(stderr(&o).contains("exactly three widths"), "{}", stderr(&o));
}
