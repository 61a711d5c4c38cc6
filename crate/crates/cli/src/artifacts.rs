//! File layout of a run directory and typed load/save helpers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use hybrid_xai::datasets::{load_dataset, save_dataset};
use hybrid_xai::gnn::Dataset;
use hybrid_xai::mapper::{parse_mu, render_mu, MuMap};
use hybrid_xai::ontology::{load_ontology, save_ontology, Individual, Ontology};
use hybrid_xai::workflow::Corpus;

pub const DATASET: &str = "dataset.json";
pub const DELTA: &str = "delta.ont";
pub const MAPPING: &str = "mapping.json";
pub const TRUTH: &str = "truth.json";
pub const SPLIT: &str = "split.json";
pub const MODEL: &str = "model.json";
pub const TRAINING: &str = "training.json";
pub const PREDICTIONS: &str = "predictions.json";
pub const MASKS: &str = "masks.json";
pub const BASE_ONTOLOGY: &str = "base.ont";
pub const ONTOLOGY: &str = "ontology.ont";
pub const MU: &str = "mu.txt";
pub const SUBGRAPHS: &str = "subgraphs.json";
pub const POOL: &str = "pool.json";
pub const POOL_TEXT: &str = "pool.txt";
pub const EXPLANATIONS_DIR: &str = "explanations";
pub const EXPLANATIONS: &str = "explanations.json";
pub const EVALUATION: &str = "evaluation.json";
pub const EVALUATION_TEXT: &str = "evaluation.txt";
pub const BASELINES: &str = "baselines.json";
pub const BASELINES_TEXT: &str = "baselines.txt";

pub struct RunDir {
    root: PathBuf,
}

/// The command that writes each artifact, for stage-order diagnostics.
fn producer(name: &str) -> &'static str {
    match name {
        DATASET | DELTA | MAPPING | TRUTH => "generate",
        SPLIT | MODEL | TRAINING | PREDICTIONS => "train",
        MASKS => "explain",
        BASE_ONTOLOGY | ONTOLOGY | MU | SUBGRAPHS => "map",
        POOL | POOL_TEXT => "learn-classes",
        _ => "evaluate",
    }
}

impl RunDir {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(RunDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Path of a required input, or a diagnostic naming the stage to run first.
    pub fn input(&self, name: &str) -> Result<PathBuf> {
        let path = self.path(name);
        if !path.exists() {
            bail!("missing {}: run `hxai {}` first", path.display(), producer(name));
        }
        Ok(path)
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let path = self.input(name)?;
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn dataset(&self, explicit: Option<&Path>) -> Result<Dataset> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => self.input(DATASET)?,
        };
        load_dataset(&path).with_context(|| format!("loading dataset {}", path.display()))
    }

    pub fn save_dataset(&self, dataset: &Dataset) -> Result<()> {
        Ok(save_dataset(dataset, self.path(DATASET))?)
    }

    pub fn ontology(&self, name: &str) -> Result<Ontology> {
        let path = self.input(name)?;
        load_ontology(&path).with_context(|| format!("loading ontology {}", path.display()))
    }

    pub fn save_ontology(&self, name: &str, ontology: &Ontology) -> Result<()> {
        Ok(save_ontology(ontology, self.path(name))?)
    }

    pub fn save_corpus(&self, corpus: &Corpus) -> Result<()> {
        self.save_ontology(BASE_ONTOLOGY, &corpus.base)?;
        self.save_ontology(ONTOLOGY, &corpus.full)?;
        self.write_text(MU, &render_mu(&corpus.mu))?;
        self.write_json(SUBGRAPHS, &corpus.subgraphs)
    }

    pub fn corpus(&self) -> Result<Corpus> {
        let mu_path = self.input(MU)?;
        let mu: MuMap = parse_mu(&fs::read_to_string(&mu_path)?)
            .map_err(|e| anyhow::anyhow!("malformed {}: {e}", mu_path.display()))?;
        let subgraphs: BTreeMap<String, BTreeSet<Individual>> = self.read_json(SUBGRAPHS)?;
        Ok(Corpus {
            base: self.ontology(BASE_ONTOLOGY)?,
            full: self.ontology(ONTOLOGY)?,
            mu,
            subgraphs,
            structures: BTreeMap::new(),
        })
    }
}
