use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cefr_onto::corpus::{CorpusFormat, DEFAULT_TRAIN_FRACTION};
use cefr_onto::dlgen::DEFAULT_IRI;
use cefr_onto::fixture::DEFAULT_SEED;
use cefr_onto::{DefinitionMode, FeatureCatalog, TrainConfig};
use clap::Args;
use serde::Deserialize;

/// Pipeline settings; every field is optional so a config file may set any
/// subset and flags override it.
#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineArgs {
    /// Labeled corpus (CSV with text,label[,label2]; JSONL; or TSV)
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Corpus format: csv, jsonl or tsv (default: from file extension)
    #[arg(long, global = true)]
    pub format: Option<CorpusFormat>,
    /// JSON descriptor catalog (default: all ten descriptors)
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Maximum tree depth (default 5)
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    /// Minimum samples in each child of a split (default 50)
    #[arg(long = "min-branch", global = true)]
    #[serde(alias = "min_branch")]
    pub min_samples_branch: Option<usize>,
    /// Descriptors below this normalized importance are left out of box definitions (default 0.01)
    #[arg(long, global = true)]
    pub importance_threshold: Option<f64>,
    /// Training fraction of the stratified split (default 0.8)
    #[arg(long = "split", global = true)]
    #[serde(alias = "split")]
    pub train_fraction: Option<f64>,
    /// Seed for the split and the synthetic fixture
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Definition mode: box or exact (default box)
    #[arg(long, global = true)]
    pub mode: Option<DefinitionMode>,
    /// Ontology IRI (default https://example.org/conv-onto#)
    #[arg(long, global = true)]
    pub iri: Option<String>,
    /// Output directory (default ./out)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl PipelineArgs {
    pub fn from_file(path: &Path) -> anyhow::Result<PipelineArgs> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: PipelineArgs) -> PipelineArgs {
        PipelineArgs {
            corpus: self.corpus.or(base.corpus),
            format: self.format.or(base.format),
            catalog: self.catalog.or(base.catalog),
            max_depth: self.max_depth.or(base.max_depth),
            min_samples_branch: self.min_samples_branch.or(base.min_samples_branch),
            importance_threshold: self.importance_threshold.or(base.importance_threshold),
            train_fraction: self.train_fraction.or(base.train_fraction),
            seed: self.seed.or(base.seed),
            mode: self.mode.or(base.mode),
            iri: self.iri.or(base.iri),
            out: self.out.or(base.out),
        }
    }

    pub fn resolve(self) -> anyhow::Result<PipelineConfig> {
        let defaults = TrainConfig::default();
        let train = TrainConfig {
            max_depth: self.max_depth.unwrap_or(defaults.max_depth),
            min_samples_branch: self.min_samples_branch.unwrap_or(defaults.min_samples_branch),
            min_samples_leaf: None,
            importance_threshold: self.importance_threshold.unwrap_or(defaults.importance_threshold),
        };
        train.validate()?;
        let train_fraction = self.train_fraction.unwrap_or(DEFAULT_TRAIN_FRACTION);
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            bail!("--split must lie strictly between 0 and 1, got {train_fraction}");
        }
        let catalog = match &self.catalog {
            Some(p) => FeatureCatalog::from_json_file(p)?,
            None => FeatureCatalog::default(),
        };
        Ok(PipelineConfig {
            corpus: self.corpus,
            format: self.format,
            catalog,
            train,
            train_fraction,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            mode: self.mode.unwrap_or(DefinitionMode::Box),
            iri: self.iri.unwrap_or_else(|| DEFAULT_IRI.to_string()),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub format: Option<CorpusFormat>,
    pub catalog: FeatureCatalog,
    pub train: TrainConfig,
    pub train_fraction: f64,
    pub seed: u64,
    pub mode: DefinitionMode,
    pub iri: String,
    pub out: PathBuf,
}

impl PipelineConfig {
    pub fn corpus_path(&self) -> anyhow::Result<&Path> {
        self.corpus.as_deref().context("--corpus is required")
    }

    pub fn corpus_format(&self) -> anyhow::Result<CorpusFormat> {
        if let Some(f) = self.format {
            return Ok(f);
        }
        let path = self.corpus_path()?;
        format_from_extension(path)
            .with_context(|| format!("cannot infer corpus format of {}; pass --format", path.display()))
    }
}

pub fn format_from_extension(path: &Path) -> Option<CorpusFormat> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(CorpusFormat::Csv),
        "jsonl" | "ndjson" => Some(CorpusFormat::Jsonl),
        "tsv" | "txt" => Some(CorpusFormat::Tsv),
        _ => None,
    }
}
