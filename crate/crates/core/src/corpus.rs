//! Labeled corpora: CEFR labels, CSV/JSONL loading, stratified splits,
//! inter-annotator agreement and feature matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::textmetrics::{features_for_text, FeatureCatalog, FeatureVector, Lexicons};
use crate::{Error, Result};

/// One of the six CEFR levels, ordered A1 < A2 < … < C2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelLabel {
    A1,
    A2,
    B1,
    B2,
    C1,
    C2,
}

pub const NUM_LEVELS: usize = 6;

impl LevelLabel {
    pub const ALL: [LevelLabel; NUM_LEVELS] = [
        LevelLabel::A1,
        LevelLabel::A2,
        LevelLabel::B1,
        LevelLabel::B2,
        LevelLabel::C1,
        LevelLabel::C2,
    ];

    /// A1 = 0 … C2 = 5.
    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<LevelLabel> {
        LevelLabel::ALL.get(ordinal).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            LevelLabel::A1 => "A1",
            LevelLabel::A2 => "A2",
            LevelLabel::B1 => "B1",
            LevelLabel::B2 => "B2",
            LevelLabel::C1 => "C1",
            LevelLabel::C2 => "C2",
        }
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LevelLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LevelLabel::ALL
            .iter()
            .copied()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| s.to_string())
    }
}

impl Serialize for LevelLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for LevelLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|v| serde::de::Error::custom(format!("unknown label {v:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub text: String,
    pub label: LevelLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label2: Option<LevelLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub items: Vec<CorpusItem>,
    pub source_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Jsonl,
    /// Headerless `text<TAB>level[<TAB>level]`; levels as names or 1–6.
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

fn parse_label(raw: &str, line: usize) -> Result<LevelLabel> {
    raw.parse().map_err(|value| Error::UnknownLabel { line, value })
}

/// Level name, or 1-based ordinal as in sentence-level CEFR datasets.
fn parse_tsv_label(raw: &str, line: usize) -> Result<LevelLabel> {
    let raw = raw.trim();
    match raw.parse::<usize>() {
        Ok(k) => k
            .checked_sub(1)
            .and_then(LevelLabel::from_ordinal)
            .ok_or_else(|| Error::UnknownLabel {
                line,
                value: raw.to_string(),
            }),
        Err(_) => parse_label(raw, line),
    }
}

fn parse_optional_label(raw: Option<&str>, line: usize) -> Result<Option<LevelLabel>> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => parse_label(s, line).map(Some),
    }
}

#[derive(Deserialize)]
struct JsonRow {
    text: String,
    label: String,
    #[serde(default)]
    label2: Option<String>,
}

impl LabeledCorpus {
    pub fn new(items: Vec<CorpusItem>, source_id: impl Into<String>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if let Some(i) = items.iter().position(|it| it.text.trim().is_empty()) {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty text".into(),
            });
        }
        Ok(LabeledCorpus {
            items,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<LevelLabel> {
        self.items.iter().map(|it| it.label).collect()
    }

    /// Reads a corpus file. CSV needs a header with `text` and `label`
    /// columns; JSONL needs one object per line with the same keys. An optional
    /// `label2` column/key carries a second annotation. Row order is kept.
    pub fn load(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let items = match format {
            CorpusFormat::Csv => read_csv(file)?,
            CorpusFormat::Jsonl => read_jsonl(std::io::BufReader::new(file))?,
            CorpusFormat::Tsv => read_tsv(std::io::BufReader::new(file))?,
        };
        LabeledCorpus::new(items, path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        match format {
            CorpusFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                let dual = self.items.iter().any(|it| it.label2.is_some());
                if dual {
                    w.write_record(["text", "label", "label2"])?;
                } else {
                    w.write_record(["text", "label"])?;
                }
                for it in &self.items {
                    let mut rec = vec![it.text.as_str(), it.label.name()];
                    if dual {
                        rec.push(it.label2.map_or("", LevelLabel::name));
                    }
                    w.write_record(&rec)?;
                }
                w.flush().map_err(|e| Error::io(path, e))?;
            }
            CorpusFormat::Jsonl => {
                for it in &self.items {
                    serde_json::to_writer(&mut out, it)?;
                    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
                }
                out.flush().map_err(|e| Error::io(path, e))?;
            }
            CorpusFormat::Tsv => {
                for it in &self.items {
                    let text = it.text.replace(['\t', '\n', '\r'], " ");
                    let mut line = format!("{text}\t{}", it.label.ordinal() + 1);
                    if let Some(l2) = it.label2 {
                        line += &format!("\t{}", l2.ordinal() + 1);
                    }
                    writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
                }
                out.flush().map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    }
}

fn read_csv(reader: impl std::io::Read) -> Result<Vec<CorpusItem>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text_col = col("text").ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing `text` column".into(),
    })?;
    let label_col = col("label").ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing `label` column".into(),
    })?;
    let label2_col = col("label2");

    let mut items = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing field {i}"),
            })
        };
        let text = field(text_col)?.to_string();
        if text.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty text".into(),
            });
        }
        items.push(CorpusItem {
            label: parse_label(field(label_col)?, line)?,
            label2: parse_optional_label(label2_col.and_then(|i| record.get(i)), line)?,
            text,
        });
    }
    Ok(items)
}

fn read_jsonl(reader: impl BufRead) -> Result<Vec<CorpusItem>> {
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if row.text.trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty text".into(),
            });
        }
        items.push(CorpusItem {
            label: parse_label(&row.label, line_no)?,
            label2: parse_optional_label(row.label2.as_deref(), line_no)?,
            text: row.text,
        });
    }
    Ok(items)
}

fn read_tsv(reader: impl BufRead) -> Result<Vec<CorpusItem>> {
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 || fields[0].trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected text and 1-2 level columns, found {} fields", fields.len()),
            });
        }
        items.push(CorpusItem {
            text: fields[0].to_string(),
            label: parse_tsv_label(fields[1], line_no)?,
            label2: fields.get(2).map(|l| parse_tsv_label(l, line_no)).transpose()?,
        });
    }
    Ok(items)
}

/// Indices into the original corpus for each side of a split, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Per-class seeded shuffle; each class contributes `round(n_c · fraction)`
/// items to training, clamped so both sides receive at least one.
pub fn stratified_split_indices(
    labels: &[LevelLabel],
    train_fraction: f64,
    seed: u64,
) -> Result<SplitIndices> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let mut by_class: BTreeMap<LevelLabel, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (label, mut idx) in by_class {
        let n = idx.len();
        if n < 2 {
            return Err(Error::ClassTooSmall { label, count: n });
        }
        idx.shuffle(&mut rng);
        let k = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&idx[..k]);
        validation.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok(SplitIndices { train, validation })
}

impl LabeledCorpus {
    pub fn subset(&self, indices: &[usize], suffix: &str) -> LabeledCorpus {
        LabeledCorpus {
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
            source_id: format!("{}#{suffix}", self.source_id),
        }
    }
}

pub fn stratified_split(
    corpus: &LabeledCorpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let split = stratified_split_indices(&corpus.labels(), train_fraction, seed)?;
    Ok((
        corpus.subset(&split.train, "train"),
        corpus.subset(&split.validation, "validation"),
    ))
}

/// Fraction of items on which both annotators gave the same level.
pub fn agreement_score(corpus: &LabeledCorpus) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut matches = 0usize;
    for (index, it) in corpus.items.iter().enumerate() {
        let second = it.label2.ok_or(Error::MissingSecondLabel { index })?;
        if second == it.label {
            matches += 1;
        }
    }
    Ok(matches as f64 / corpus.len() as f64)
}

/// Feature rows with aligned labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<LevelLabel>,
    pub catalog: FeatureCatalog,
}

impl FeatureMatrix {
    pub fn new(
        rows: Vec<FeatureVector>,
        labels: Vec<LevelLabel>,
        catalog: FeatureCatalog,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                gold: labels.len(),
                pred: rows.len(),
            });
        }
        let m = catalog.len();
        if let Some(row) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: row.len(),
            });
        }
        Ok(FeatureMatrix {
            rows,
            labels,
            catalog,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.catalog.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.rows[row][feature]
    }

    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            catalog: self.catalog.clone(),
        }
    }

    /// CSV with one column per descriptor followed by `label`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.catalog.iter().map(|d| d.id.as_str()).collect();
        header.push("label");
        out.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.values().iter().map(|v| v.to_string()).collect();
            rec.push(label.to_string());
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Extracts features for every item in parallel; output order follows the
/// corpus. Extraction failures name the 0-based row.
pub fn build_matrix(
    corpus: &LabeledCorpus,
    catalog: &FeatureCatalog,
    lexicons: &Lexicons,
) -> Result<FeatureMatrix> {
    let rows = corpus
        .items
        .par_iter()
        .enumerate()
        .map(|(i, it)| features_for_text(&it.text, catalog, lexicons).map_err(|e| e.at_row(i)))
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(rows, corpus.labels(), catalog.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn item(text: &str, label: LevelLabel, label2: Option<LevelLabel>) -> CorpusItem {
        CorpusItem {
            text: text.into(),
            label,
            label2,
        }
    }

    #[test]
    fn label_ordinals_round_trip() {
        for (i, l) in LevelLabel::ALL.iter().enumerate() {
            assert_eq!(l.ordinal(), i);
            assert_eq!(LevelLabel::from_ordinal(i), Some(*l));
            assert_eq!(l.name().parse::<LevelLabel>(), Ok(*l));
        }
        assert!(LevelLabel::A1 < LevelLabel::C2);
        assert_eq!("D1".parse::<LevelLabel>(), Err("D1".to_string()));
    }

    #[test]
    fn load_csv_two_rows() {
        let f = write("text,label\n\"The cat sat.\",B1\nHi.,A1\n", ".csv");
        let c = LabeledCorpus::load(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.items[0].text, "The cat sat.");
        assert_eq!(c.labels(), vec![LevelLabel::B1, LevelLabel::A1]);
    }

    #[test]
    fn unknown_label_names_value_and_line() {
        let f = write("text,label\nok.,A1\nbad.,D1\n", ".csv");
        match LabeledCorpus::load(f.path(), CorpusFormat::Csv) {
            Err(Error::UnknownLabel { line, value }) => {
                assert_eq!(value, "D1");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_tsv_numeric_levels() {
        let f = write("A short one.\t1\t2\nLonger sentence here.\tC1\t5\n", ".tsv");
        let c = LabeledCorpus::load(f.path(), CorpusFormat::Tsv).unwrap();
        assert_eq!(c.labels(), vec![LevelLabel::A1, LevelLabel::C1]);
        assert_eq!(c.items[0].label2, Some(LevelLabel::A2));
        assert_eq!(c.items[1].label2, Some(LevelLabel::C1));
        let bad = write("x\t7\n", ".tsv");
        assert!(matches!(
            LabeledCorpus::load(bad.path(), CorpusFormat::Tsv),
            Err(Error::UnknownLabel { line: 1, .. })
        ));
    }

    #[test]
    fn load_jsonl_with_second_labels() {
        let f = write(
            "{\"text\":\"a b\",\"label\":\"A1\",\"label2\":\"A2\"}\n{\"text\":\"c d\",\"label\":\"B1\",\"label2\":\"B1\"}\n",
            ".jsonl",
        );
        let c = LabeledCorpus::load(f.path(), CorpusFormat::Jsonl).unwrap();
        assert!(c.items.iter().all(|it| it.label2.is_some()));
        assert_eq!(agreement_score(&c).unwrap(), 0.5);
    }

    #[test]
    fn jsonl_parse_error_names_line() {
        let f = write("text,label\nHi.,A1\n", ".csv");
        match LabeledCorpus::load(f.path(), CorpusFormat::Jsonl) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = LabeledCorpus::load("/nonexistent/corpus.csv", CorpusFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/corpus.csv"));
    }

    #[test]
    fn save_then_load_preserves_items() {
        let c = LabeledCorpus::new(
            vec![
                item("Quoted, \"text\".", LevelLabel::C1, Some(LevelLabel::B2)),
                item("Plain.", LevelLabel::A2, None),
            ],
            "mem",
        )
        .unwrap();
        for (fmt, ext) in [(CorpusFormat::Csv, ".csv"), (CorpusFormat::Jsonl, ".jsonl")] {
            let f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
            c.save(f.path(), fmt).unwrap();
            let back = LabeledCorpus::load(f.path(), fmt).unwrap();
            assert_eq!(back.items, c.items);
        }
    }

    fn balanced(per_class: usize) -> LabeledCorpus {
        let items = LevelLabel::ALL
            .iter()
            .flat_map(|&l| (0..per_class).map(move |i| item(&format!("text {l} {i}"), l, None)))
            .collect();
        LabeledCorpus::new(items, "balanced").unwrap()
    }

    #[test]
    fn split_sixty_items() {
        let c = balanced(10);
        let (train, val) = stratified_split(&c, 0.8, 7).unwrap();
        assert_eq!((train.len(), val.len()), (48, 12));
        for l in LevelLabel::ALL {
            assert_eq!(train.items.iter().filter(|it| it.label == l).count(), 8);
            assert_eq!(val.items.iter().filter(|it| it.label == l).count(), 2);
        }
        assert_eq!(stratified_split(&c, 0.8, 7).unwrap(), (train, val));
    }

    #[test]
    fn split_partitions_indices() {
        let c = balanced(7);
        let s = stratified_split_indices(&c.labels(), 0.7, 3).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..c.len()).collect::<Vec<_>>());
        assert_ne!(s, stratified_split_indices(&c.labels(), 0.7, 4).unwrap());
    }

    #[test]
    fn split_rejects_singleton_class_and_bad_fraction() {
        let c = LabeledCorpus::new(
            vec![
                item("a.", LevelLabel::A1, None),
                item("b.", LevelLabel::A1, None),
                item("c.", LevelLabel::B1, None),
            ],
            "x",
        )
        .unwrap();
        assert!(matches!(
            stratified_split(&c, 0.8, 1),
            Err(Error::ClassTooSmall { label: LevelLabel::B1, count: 1 })
        ));
        assert!(matches!(stratified_split(&c, 1.0, 1), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn agreement_requires_second_labels() {
        let full = LabeledCorpus::new(
            vec![
                item("a.", LevelLabel::A1, Some(LevelLabel::A1)),
                item("b.", LevelLabel::C2, Some(LevelLabel::C2)),
            ],
            "x",
        )
        .unwrap();
        assert_eq!(agreement_score(&full).unwrap(), 1.0);
        let partial = LabeledCorpus::new(
            vec![
                item("a.", LevelLabel::A1, Some(LevelLabel::A2)),
                item("b.", LevelLabel::B1, None),
            ],
            "x",
        )
        .unwrap();
        assert!(matches!(
            agreement_score(&partial),
            Err(Error::MissingSecondLabel { index: 1 })
        ));
    }

    #[test]
    fn matrix_shapes_and_row_errors() {
        let lx = Lexicons::bundled();
        let cat = FeatureCatalog::default();
        let two = LabeledCorpus::new(
            vec![item("The cat sat.", LevelLabel::B1, None), item("Hi.", LevelLabel::A1, None)],
            "x",
        )
        .unwrap();
        let m = build_matrix(&two, &cat, lx).unwrap();
        assert_eq!((m.n_rows(), m.n_features()), (2, 10));

        let one = two.subset(&[1], "one");
        let m1 = build_matrix(&one, &cat, lx).unwrap();
        assert_eq!((m1.n_rows(), m1.labels.len()), (1, 1));

        let bad = LabeledCorpus::new(
            vec![item("Fine.", LevelLabel::A1, None), item("?!", LevelLabel::A1, None)],
            "x",
        )
        .unwrap();
        match build_matrix(&bad, &cat, lx) {
            Err(Error::Row { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
