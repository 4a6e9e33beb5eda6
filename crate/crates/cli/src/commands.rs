use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use cefr_onto::corpus::{
    agreement_score, build_matrix, stratified_split_indices, CorpusFormat, LabeledCorpus,
};
use cefr_onto::dlgen::{class_name, emit_ontology, parse_ontology};
use cefr_onto::eval::{write_reports, EvalReport};
use cefr_onto::fixture;
use cefr_onto::rules::{build_definitions, check_consistency, classify_by_rules, DefinitionBody};
use cefr_onto::textmetrics::{features_for_text, Lexicons};
use cefr_onto::{DecisionTree, DefinitionSet, FeatureCatalog, FeatureVector, LevelLabel};
use serde_json::{json, Value};

use crate::config::{format_from_extension, PipelineConfig};
use crate::{ModelArgs, Status};

pub const FEATURES_CSV: &str = "features.csv";
pub const TREE_JSON: &str = "tree.json";
pub const IMPORTANCE_CSV: &str = "importance.csv";
pub const DEFINITIONS_JSON: &str = "definitions.json";
pub const ONTOLOGY_OMN: &str = "ontology.omn";
pub const CONSISTENCY_JSON: &str = "consistency.json";

fn out_dir(cfg: &PipelineConfig) -> anyhow::Result<&Path> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    Ok(&cfg.out)
}

fn load_corpus(cfg: &PipelineConfig) -> anyhow::Result<LabeledCorpus> {
    let path = cfg.corpus_path()?;
    Ok(LabeledCorpus::load(path, cfg.corpus_format()?)?)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn features(cfg: &PipelineConfig) -> anyhow::Result<Status> {
    let corpus = load_corpus(cfg)?;
    let matrix = build_matrix(&corpus, &cfg.catalog, Lexicons::bundled())?;
    let path = out_dir(cfg)?.join(FEATURES_CSV);
    matrix.write_csv(create(&path)?)?;
    println!("m = {}, N = {}", matrix.n_features(), matrix.n_rows());
    println!("wrote {}", path.display());
    Ok(Status::Done)
}

pub fn train(cfg: &PipelineConfig) -> anyhow::Result<Status> {
    let corpus = load_corpus(cfg)?;
    let matrix = build_matrix(&corpus, &cfg.catalog, Lexicons::bundled())?;
    let split = stratified_split_indices(&matrix.labels, cfg.train_fraction, cfg.seed)?;
    let train = matrix.select(&split.train);
    let validation = matrix.select(&split.validation);

    let tree = DecisionTree::fit(&train, cfg.train)?;
    let importance = tree.feature_importance();
    let predicted = validation
        .rows
        .iter()
        .map(|r| tree.predict(r))
        .collect::<Result<Vec<_>, _>>()?;
    let report = EvalReport::new(&validation.labels, &predicted)?;

    let dir = out_dir(cfg)?;
    tree.save(dir.join(TREE_JSON))?;
    importance.write_csv(create(&dir.join(IMPORTANCE_CSV))?)?;
    write_reports(dir, &report, Some(&importance), None)?;

    println!("train {} / validation {}", train.n_rows(), validation.n_rows());
    println!("tree: depth {}, {} leaves, {} nodes", tree.depth, tree.leaf_count, tree.node_count);
    println!("validation accuracy {:.4}, mae {:.4}", report.accuracy, report.mae);
    for e in importance.entries.iter().filter(|e| e.below_threshold) {
        println!("below importance threshold: {}", e.id);
    }
    println!("wrote {}", dir.display());
    if tree.is_single_leaf() {
        eprintln!(
            "warning: no split satisfied min {} samples per branch; the tree is a single leaf",
            cfg.train.leaf_minimum()
        );
        return Ok(Status::Degenerate);
    }
    Ok(Status::Done)
}

pub fn ontology(cfg: &PipelineConfig, tree_path: Option<PathBuf>) -> anyhow::Result<Status> {
    let tree_path = tree_path.unwrap_or_else(|| cfg.out.join(TREE_JSON));
    let tree = DecisionTree::load(&tree_path)?;
    let defs = build_definitions(&tree, &tree.feature_importance(), cfg.mode);
    let doc = emit_ontology(&defs, &cfg.iri)?;
    let mut consistency = check_consistency(&defs);
    if cfg.corpus.is_some() {
        let corpus = load_corpus(cfg)?;
        let matrix = build_matrix(&corpus, &tree.catalog, Lexicons::bundled())?;
        consistency = consistency.with_data_ranges(&matrix);
    }

    let dir = out_dir(cfg)?;
    defs.save(dir.join(DEFINITIONS_JSON))?;
    write_file(&dir.join(ONTOLOGY_OMN), &doc)?;
    write_file(
        &dir.join(CONSISTENCY_JSON),
        serde_json::to_string_pretty(&consistency)? + "\n",
    )?;

    for def in &defs.definitions {
        match &def.body {
            DefinitionBody::Box { constraints } => {
                println!("{}: {} constraints", class_name(def.label), constraints.len())
            }
            DefinitionBody::Exact { paths } => println!(
                "{}: {} paths, {} constraints",
                class_name(def.label),
                paths.len(),
                def.body.constraint_count()
            ),
        }
    }
    let findings = consistency.summary_lines();
    if findings.is_empty() {
        println!("consistency: clean");
    } else {
        println!("consistency findings:");
        for f in findings {
            println!("  {f}");
        }
    }
    println!("wrote {}", dir.join(ONTOLOGY_OMN).display());
    if tree.is_single_leaf() {
        eprintln!("warning: single-leaf tree; level classes carry no equivalence axiom");
        return Ok(Status::Degenerate);
    }
    Ok(Status::Done)
}

enum Model {
    Tree(DecisionTree),
    Rules(DefinitionSet),
}

impl Model {
    fn load(args: &ModelArgs) -> anyhow::Result<Model> {
        if let Some(p) = &args.tree {
            return Ok(Model::Tree(DecisionTree::load(p)?));
        }
        if let Some(p) = &args.defs {
            return Ok(Model::Rules(DefinitionSet::load(p)?));
        }
        let p = args.ontology.as_ref().context("one of --defs, --tree, --ontology is required")?;
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let parsed = parse_ontology(&text).with_context(|| format!("parsing {}", p.display()))?;
        Ok(Model::Rules(parsed.definitions))
    }

    fn catalog(&self) -> &FeatureCatalog {
        match self {
            Model::Tree(t) => &t.catalog,
            Model::Rules(d) => &d.catalog,
        }
    }

    fn classify(&self, fv: &FeatureVector) -> anyhow::Result<(LevelLabel, Value)> {
        Ok(match self {
            Model::Tree(t) => {
                let (leaf, _) = t.leaf_for(fv)?;
                (t.predict(fv)?, json!({ "leaf": leaf }))
            }
            Model::Rules(d) => {
                let c = classify_by_rules(d, fv)?;
                (c.label, serde_json::to_value(&c.diagnostics)?)
            }
        })
    }
}

pub fn classify(model: &ModelArgs, input: &Path, output: Option<&Path>) -> anyhow::Result<Status> {
    let model = Model::load(model)?;
    let reader: Box<dyn BufRead> = if input == Path::new("-") {
        Box::new(std::io::stdin().lock())
    } else {
        let f = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
        Box::new(std::io::BufReader::new(f))
    };
    let mut out: Box<dyn Write> = match output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let lex = Lexicons::bundled();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading line {}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = match features_for_text(&line, model.catalog(), lex) {
            Ok(fv) => {
                let (label, diagnostics) = model.classify(&fv)?;
                json!({ "text": line, "label": label, "diagnostics": diagnostics })
            }
            Err(e) => json!({ "text": line, "label": null, "error": e.to_string() }),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(Status::Done)
}

pub fn evaluate(cfg: &PipelineConfig, model: &ModelArgs) -> anyhow::Result<Status> {
    let model = Model::load(model)?;
    let corpus = load_corpus(cfg)?;
    let matrix = build_matrix(&corpus, model.catalog(), Lexicons::bundled())?;
    let mut predicted = Vec::with_capacity(matrix.n_rows());
    let mut fallbacks = 0;
    for row in &matrix.rows {
        let (label, diag) = model.classify(row)?;
        fallbacks += (diag.get("fallback") == Some(&Value::Bool(true))) as usize;
        predicted.push(label);
    }
    let report = EvalReport::new(&matrix.labels, &predicted)?;
    let consistency = match &model {
        Model::Rules(d) => Some(check_consistency(d)),
        Model::Tree(_) => None,
    };
    let dir = out_dir(cfg)?;
    write_reports(dir, &report, None, consistency.as_ref())?;

    println!("n {}, accuracy {:.4}, mae {:.4}", report.n, report.accuracy, report.mae);
    if fallbacks > 0 {
        println!("{fallbacks} texts matched no definition (nearest-box fallback)");
    }
    if corpus.items.iter().all(|it| it.label2.is_some()) {
        println!("annotator agreement {:.4}", agreement_score(&corpus)?);
    }
    println!("wrote {}", dir.display());
    Ok(Status::Done)
}

pub fn gen_fixture(cfg: &PipelineConfig, per_level: usize, output: Option<PathBuf>) -> anyhow::Result<Status> {
    let path = match output {
        Some(p) => p,
        None => out_dir(cfg)?.join("fixture.csv"),
    };
    let format = cfg
        .format
        .or_else(|| format_from_extension(&path))
        .unwrap_or(CorpusFormat::Csv);
    let corpus = fixture::generate(per_level, cfg.seed, Lexicons::bundled());
    corpus.save(&path, format)?;
    println!("wrote {} texts to {}", corpus.len(), path.display());
    Ok(Status::Done)
}
