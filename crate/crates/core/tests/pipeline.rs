use cefr_onto::corpus::{build_matrix, stratified_split_indices, DEFAULT_TRAIN_FRACTION};
use cefr_onto::dlgen::{emit_ontology, parse_ontology, same_structure, DEFAULT_IRI};
use cefr_onto::eval::EvalReport;
use cefr_onto::fixture::{generate, DEFAULT_PER_LEVEL, DEFAULT_SEED};
use cefr_onto::rules::{build_definitions, check_consistency, classify_by_rules, DefinitionMode};
use cefr_onto::textmetrics::Lexicons;
use cefr_onto::{DecisionTree, FeatureCatalog, TrainConfig};

#[test]
fn fixture_pipeline_end_to_end() {
    let lex = Lexicons::bundled();
    let corpus = generate(DEFAULT_PER_LEVEL, DEFAULT_SEED, lex);
    let matrix = build_matrix(&corpus, &FeatureCatalog::default(), lex).unwrap();
    let split = stratified_split_indices(&matrix.labels, DEFAULT_TRAIN_FRACTION, DEFAULT_SEED).unwrap();
    let train = matrix.select(&split.train);
    let val = matrix.select(&split.validation);

    let tree = DecisionTree::fit(&train, TrainConfig::default()).unwrap();
    let pred: Vec<_> = val.rows.iter().map(|r| tree.predict(r).unwrap()).collect();
    let report = EvalReport::new(&val.labels, &pred).unwrap();
    eprintln!("{}", report.render_text());
    assert!(report.accuracy >= 0.9, "accuracy {}", report.accuracy);
    assert!(report.mae <= 0.15, "mae {}", report.mae);
    assert!(tree.leaf_count <= 32);

    let imp = tree.feature_importance();
    let exact = build_definitions(&tree, &imp, DefinitionMode::Exact);
    for r in &val.rows {
        assert_eq!(classify_by_rules(&exact, r).unwrap().label, tree.predict(r).unwrap());
    }
    let consistency = check_consistency(&exact);
    let p = consistency.partition.as_ref().unwrap();
    assert!(p.disjoint && p.exhaustive);

    for mode in [DefinitionMode::Exact, DefinitionMode::Box] {
        let defs = build_definitions(&tree, &imp, mode);
        let doc = emit_ontology(&defs, DEFAULT_IRI).unwrap();
        assert!(same_structure(&parse_ontology(&doc).unwrap().definitions, &defs));
    }
}
