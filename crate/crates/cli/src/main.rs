mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hxai", version, about = "Ontology-grounded explanations for graph classifiers")]
struct Cli {
    /// Directory holding every stage's artifacts.
    #[arg(long, global = true, default_value = "hxai-run")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the bundled synthetic dataset with its domain ontology and mapping.
    Generate(GenerateArgs),
    /// Split the dataset and train the graph classifier.
    Train(TrainArgs),
    /// Learn edge and feature masks for every graph.
    Explain(ExplainArgs),
    /// Map graphs and explainer subgraphs into the ontology.
    Map(MapArgs),
    /// Learn input-output and importance explainer classes.
    LearnClasses(LearnArgs),
    /// Print the final explanation of one graph.
    ExplainInstance {
        graph_id: String,
    },
    /// Explain every test graph and aggregate the results.
    Evaluate(EvaluateArgs),
    /// Compare the classifier with a pure class-expression classifier.
    CompareBaselines(BaselineArgs),
    /// Run every stage in order.
    Run(RunArgs),
}

#[derive(Args, Debug, Clone)]
struct GenerateArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    num_graphs: usize,
    #[arg(long, default_value_t = 0.85)]
    motif_probability: f64,
    #[arg(long, default_value_t = 0.0)]
    label_noise: f64,
}

#[derive(Args, Debug, Clone)]
struct TrainArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of graphs used for training.
    #[arg(long, default_value_t = 0.5)]
    split: f64,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    /// Hidden widths of the three layers, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [32, 32, 32])]
    hidden: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    /// Dataset file; defaults to the one written by `generate`.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ExplainArgs {
    #[arg(long, default_value_t = 0.5)]
    mask_threshold: f64,
    #[arg(long, default_value_t = 6)]
    top_k_edges: usize,
    #[arg(long, default_value_t = 100)]
    mask_epochs: usize,
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// Domain ontology; defaults to the one written by `generate`.
    #[arg(long)]
    delta: Option<PathBuf>,
    /// Mapping tables and structure patterns (JSON).
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct LearnArgs {
    #[arg(long, default_value_t = 0.5)]
    cutoff: f64,
    #[arg(long, default_value_t = 200)]
    beam: usize,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    /// Maximum number of classes kept per kind and category.
    #[arg(long, default_value_t = 50)]
    pool_size: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TruthSource {
    /// Dataset labels.
    Labels,
    /// Noise-free labels recorded by `generate`.
    Clean,
}

#[derive(Args, Debug, Clone)]
struct EvaluateArgs {
    #[arg(long, value_enum, default_value_t = TruthSource::Labels)]
    truth: TruthSource,
}

#[derive(Args, Debug, Clone)]
struct BaselineArgs {
    #[command(flatten)]
    learner: LearnArgs,
    /// Category treated as the positive class by the pure classifier.
    #[arg(long, default_value_t = 1)]
    positive_category: usize,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    generate: GenerateArgs,
    #[arg(long, default_value_t = 0.5)]
    split: f64,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [32, 32, 32])]
    hidden: Vec<usize>,
    #[command(flatten)]
    explain: ExplainArgs,
    #[command(flatten)]
    learner: LearnArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(&cli.out, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
