use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hybrid_xai::datasets::{generate, GroundTruth, SyntheticSpec};
use hybrid_xai::gnn::{ExplainConfig, GcnModel, MaskPair, TrainConfig};
use hybrid_xai::learner::LearnerConfig;
use hybrid_xai::mapper::MappingConfig;
use hybrid_xai::pipeline::{render_pool, ExplainerClass, Explanation, ExplanationRecord};
use hybrid_xai::workflow::{
    compare_baselines, evaluate_stage, explain_instances_stage, explain_stage, labels_of, learn_stage, map_stage,
    predict_all, split_dataset, train_stage, RunConfig, Split,
};

use crate::artifacts::*;
use crate::{
    BaselineArgs, Command, EvaluateArgs, ExplainArgs, GenerateArgs, LearnArgs, MapArgs, RunArgs, TrainArgs,
    TruthSource,
};

/// Written next to the model so later stages can report it.
#[derive(Serialize, Deserialize)]
struct TrainingSummary {
    config: TrainConfig,
    split: f64,
    train_accuracy: f64,
    test_accuracy: f64,
    final_loss: Option<f64>,
}

pub fn dispatch(out: &Path, command: Command) -> Result<()> {
    let run = RunDir::new(out)?;
    match command {
        Command::Generate(args) => generate_cmd(&run, &args),
        Command::Train(args) => train_cmd(&run, &args),
        Command::Explain(args) => explain_cmd(&run, &args),
        Command::Map(args) => map_cmd(&run, &args),
        Command::LearnClasses(args) => learn_cmd(&run, &args),
        Command::ExplainInstance { graph_id } => explain_instance_cmd(&run, &graph_id),
        Command::Evaluate(args) => evaluate_cmd(&run, &args),
        Command::CompareBaselines(args) => baselines_cmd(&run, &args),
        Command::Run(args) => run_cmd(&run, &args),
    }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        bail!("{name} must be in [0, 1], got {value}");
    }
    Ok(())
}

fn generate_cmd(run: &RunDir, args: &GenerateArgs) -> Result<()> {
    let spec = SyntheticSpec {
        seed: args.seed,
        num_graphs: args.num_graphs,
        motif_probability: args.motif_probability,
        label_noise: args.label_noise,
        ..SyntheticSpec::default()
    };
    let data = generate(&spec)?;
    run.save_dataset(&data.dataset)?;
    run.save_ontology(DELTA, &data.delta)?;
    run.write_json(MAPPING, &data.mapping)?;
    run.write_json(TRUTH, &data.truth)?;
    println!("generated {} graphs into {}", data.dataset.graphs.len(), run.path("").display());
    Ok(())
}

fn train_config(seed: u64, epochs: usize, hidden: &[usize], learning_rate: f64) -> Result<TrainConfig> {
    let hidden: [usize; 3] = hidden.try_into().context("--hidden takes exactly three widths")?;
    if hidden.contains(&0) {
        bail!("hidden widths must be positive");
    }
    Ok(TrainConfig { seed, epochs, learning_rate, hidden, ..TrainConfig::default() })
}

fn train_cmd(run: &RunDir, args: &TrainArgs) -> Result<()> {
    let config = train_config(args.seed, args.epochs, &args.hidden, args.learning_rate)?;
    RunConfig { split: args.split, ..RunConfig::default() }.validate()?;
    let dataset = run.dataset(args.dataset.as_deref())?;
    if args.dataset.is_some() {
        run.save_dataset(&dataset)?;
    }
    let split = split_dataset(&dataset, args.split, args.seed);
    let outcome = train_stage(&dataset, &split, &config)?;
    let predictions = predict_all(&outcome.model, &dataset)?;
    run.write_json(SPLIT, &split)?;
    run.write_json(MODEL, &outcome.model)?;
    run.write_json(PREDICTIONS, &predictions)?;
    run.write_json(
        TRAINING,
        &TrainingSummary {
            config,
            split: args.split,
            train_accuracy: outcome.report.train_accuracy,
            test_accuracy: outcome.test_accuracy,
            final_loss: outcome.report.losses.last().copied(),
        },
    )?;
    println!(
        "train accuracy {:.4}, test accuracy {:.4} ({} train / {} test graphs)",
        outcome.report.train_accuracy,
        outcome.test_accuracy,
        split.train.len(),
        split.test.len()
    );
    Ok(())
}

fn explain_config(args: &ExplainArgs) -> Result<ExplainConfig> {
    check_unit("--mask-threshold", args.mask_threshold)?;
    Ok(ExplainConfig {
        threshold: args.mask_threshold,
        top_k: args.top_k_edges,
        epochs: args.mask_epochs,
        ..ExplainConfig::default()
    })
}

fn explain_cmd(run: &RunDir, args: &ExplainArgs) -> Result<()> {
    let config = explain_config(args)?;
    let dataset = run.dataset(None)?;
    let model: GcnModel = run.read_json(MODEL)?;
    let masks = explain_stage(&model, &dataset, &config)?;
    run.write_json(MASKS, &masks)?;
    let kept: usize = masks.iter().map(|m| m.binarized_edges.len()).sum();
    println!("masks for {} graphs, {kept} edges kept in total", masks.len());
    Ok(())
}

fn map_cmd(run: &RunDir, args: &MapArgs) -> Result<()> {
    let dataset = run.dataset(None)?;
    let masks: Vec<MaskPair> = run.read_json(MASKS)?;
    let delta = match &args.delta {
        Some(p) => hybrid_xai::ontology::load_ontology(p).with_context(|| format!("loading {}", p.display()))?,
        None => run.ontology(DELTA)?,
    };
    let mapping: MappingConfig = match &args.mapping {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .with_context(|| format!("malformed mapping {}", p.display()))?,
        None => run.read_json(MAPPING)?,
    };
    if args.delta.is_some() {
        run.save_ontology(DELTA, &delta)?;
    }
    if args.mapping.is_some() {
        run.write_json(MAPPING, &mapping)?;
    }
    let corpus = map_stage(&delta, &dataset, &masks, &mapping)?;
    run.save_corpus(&corpus)?;
    println!(
        "mapped {} graphs: {} axioms ({} with explainer subgraphs), {} structures",
        dataset.graphs.len(),
        corpus.base.len(),
        corpus.full.len(),
        corpus.mu.len()
    );
    Ok(())
}

fn learner_config(args: &LearnArgs) -> Result<LearnerConfig> {
    let config = LearnerConfig {
        cutoff: args.cutoff,
        beam_width: args.beam,
        max_depth: args.max_depth,
        max_results: args.pool_size,
        ..LearnerConfig::default()
    };
    RunConfig { learner: config.clone(), ..RunConfig::default() }.validate()?;
    Ok(config)
}

fn learn_cmd(run: &RunDir, args: &LearnArgs) -> Result<()> {
    let config = learner_config(args)?;
    let ontology = run.ontology(ONTOLOGY)?;
    let predictions: BTreeMap<String, usize> = run.read_json(PREDICTIONS)?;
    let split: Split = run.read_json(SPLIT)?;
    let pool = learn_stage(&ontology, &predictions, &split.train, &config)?;
    run.write_json(POOL, &pool)?;
    run.write_text(POOL_TEXT, &render_pool(&pool))?;
    println!("learned {} explainer classes", pool.len());
    Ok(())
}

struct Explainable {
    pool: Vec<ExplainerClass>,
    predictions: BTreeMap<String, usize>,
    corpus: hybrid_xai::workflow::Corpus,
}

fn load_explainable(run: &RunDir) -> Result<Explainable> {
    Ok(Explainable {
        pool: run.read_json(POOL)?,
        predictions: run.read_json(PREDICTIONS)?,
        corpus: run.corpus()?,
    })
}

fn explanation_file(id: &str) -> String {
    format!("{EXPLANATIONS_DIR}/{id}.txt")
}

fn explain_instance_cmd(run: &RunDir, graph_id: &str) -> Result<()> {
    let state = load_explainable(run)?;
    if !state.predictions.contains_key(graph_id) {
        bail!("unknown graph {graph_id:?}");
    }
    let ids = [graph_id.to_string()];
    let explanations =
        explain_instances_stage(&state.corpus.full, &state.pool, &state.corpus, &state.predictions, &ids)?;
    let text = explanations[0].render();
    run.write_text(&explanation_file(graph_id), &text)?;
    print!("{text}");
    Ok(())
}

fn write_explanations(run: &RunDir, explanations: &[Explanation]) -> Result<()> {
    for e in explanations {
        run.write_text(&explanation_file(&e.graph_id), &e.render())?;
    }
    let records: Vec<ExplanationRecord> = explanations.iter().map(Explanation::to_record).collect();
    run.write_json(EXPLANATIONS, &records)
}

fn evaluate_cmd(run: &RunDir, args: &EvaluateArgs) -> Result<()> {
    let state = load_explainable(run)?;
    let split: Split = run.read_json(SPLIT)?;
    let truth: BTreeMap<String, usize> = match args.truth {
        TruthSource::Labels => labels_of(&run.dataset(None)?, &split.test)?,
        TruthSource::Clean => {
            let all: Vec<GroundTruth> = run.read_json(TRUTH)?;
            let clean: BTreeMap<&str, usize> = all.iter().map(|t| (t.graph_id.as_str(), t.clean_label)).collect();
            split
                .test
                .iter()
                .map(|id| {
                    clean.get(id.as_str()).map(|&l| (id.clone(), l)).with_context(|| format!("no ground truth for {id}"))
                })
                .collect::<Result<_>>()?
        }
    };
    let explanations =
        explain_instances_stage(&state.corpus.full, &state.pool, &state.corpus, &state.predictions, &split.test)?;
    write_explanations(run, &explanations)?;
    let report = evaluate_stage(&explanations, &truth, &state.pool)?;
    run.write_json(EVALUATION, &report)?;
    let text = report.render();
    run.write_text(EVALUATION_TEXT, &text)?;
    print!("{text}");
    Ok(())
}

fn baselines_cmd(run: &RunDir, args: &BaselineArgs) -> Result<()> {
    let learner = learner_config(&args.learner)?;
    let dataset = run.dataset(None)?;
    let split: Split = run.read_json(SPLIT)?;
    let training: TrainingSummary = run.read_json(TRAINING)?;
    let base = run.ontology(BASE_ONTOLOGY)?;
    let mapping: MappingConfig = run.read_json(MAPPING)?;
    let pool: Vec<ExplainerClass> = run.read_json(POOL)?;
    let config = RunConfig { train: training.config.clone(), learner, ..RunConfig::default() };
    let comparison = compare_baselines(
        &dataset,
        &split,
        &base,
        &mapping,
        training.test_accuracy,
        &pool,
        args.positive_category,
        &config,
    )?;
    run.write_json(BASELINES, &comparison)?;
    let text = comparison.render();
    run.write_text(BASELINES_TEXT, &text)?;
    print!("{text}");
    Ok(())
}

fn run_cmd(run: &RunDir, args: &RunArgs) -> Result<()> {
    generate_cmd(run, &args.generate)?;
    train_cmd(
        run,
        &TrainArgs {
            seed: args.generate.seed,
            split: args.split,
            epochs: args.epochs,
            hidden: args.hidden.clone(),
            learning_rate: TrainConfig::default().learning_rate,
            dataset: None,
        },
    )?;
    explain_cmd(run, &args.explain)?;
    map_cmd(run, &MapArgs { delta: None, mapping: None })?;
    learn_cmd(run, &args.learner)?;
    evaluate_cmd(run, &EvaluateArgs { truth: TruthSource::Labels })?;
    baselines_cmd(run, &BaselineArgs { learner: args.learner.clone(), positive_category: 1 })
}
