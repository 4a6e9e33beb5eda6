//! Accuracy, ordinal MAE, confusion matrix and per-class P/R/F1, with
//! JSON / CSV / plain-text report writers.
//!
//! Levels map to ordinals A1=0 … C2=5. Rows of the confusion matrix are gold
//! labels, columns predictions.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{LevelLabel, NUM_LEVELS};
use crate::dtree::ImportanceReport;
use crate::rules::ConsistencyReport;
use crate::{Error, Result};

pub type Confusion = [[usize; NUM_LEVELS]; NUM_LEVELS];

fn check(gold: &[LevelLabel], pred: &[LevelLabel]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn accuracy(gold: &[LevelLabel], pred: &[LevelLabel]) -> Result<f64> {
    check(gold, pred)?;
    let hits = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    Ok(hits as f64 / gold.len() as f64)
}

pub fn mae_ordinal(gold: &[LevelLabel], pred: &[LevelLabel]) -> Result<f64> {
    check(gold, pred)?;
    let total: usize = gold
        .iter()
        .zip(pred)
        .map(|(g, p)| g.ordinal().abs_diff(p.ordinal()))
        .sum();
    Ok(total as f64 / gold.len() as f64)
}

pub fn confusion_matrix(gold: &[LevelLabel], pred: &[LevelLabel]) -> Result<Confusion> {
    check(gold, pred)?;
    let mut m = [[0; NUM_LEVELS]; NUM_LEVELS];
    for (g, p) in gold.iter().zip(pred) {
        m[g.ordinal()][p.ordinal()] += 1;
    }
    Ok(m)
}

/// Share of misclassifications that land on an adjacent level; `None` when
/// there are none.
pub fn neighbor_error_share(m: &Confusion) -> Option<f64> {
    let mut off = 0;
    let mut near = 0;
    for (i, row) in m.iter().enumerate() {
        for (j, &n) in row.iter().enumerate() {
            if i != j {
                off += n;
                if i.abs_diff(j) == 1 {
                    near += n;
                }
            }
        }
    }
    (off > 0).then(|| near as f64 / off as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: LevelLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold count.
    pub support: usize,
    /// A zero denominator forced precision or recall to 0.
    pub undefined: bool,
}

pub fn prf_per_class(m: &Confusion) -> Vec<ClassMetrics> {
    LevelLabel::ALL
        .iter()
        .map(|&label| {
            let k = label.ordinal();
            let tp = m[k][k] as f64;
            let row: usize = m[k].iter().sum();
            let col: usize = m.iter().map(|r| r[k]).sum();
            let precision = if col > 0 { tp / col as f64 } else { 0.0 };
            let recall = if row > 0 { tp / row as f64 } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label,
                precision,
                recall,
                f1,
                support: row,
                undefined: row == 0 || col == 0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub mae: f64,
    pub confusion: Confusion,
    pub neighbor_error_share: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
}

impl EvalReport {
    pub fn new(gold: &[LevelLabel], pred: &[LevelLabel]) -> Result<EvalReport> {
        let confusion = confusion_matrix(gold, pred)?;
        Ok(EvalReport {
            n: gold.len(),
            accuracy: accuracy(gold, pred)?,
            mae: mae_ordinal(gold, pred)?,
            neighbor_error_share: neighbor_error_share(&confusion),
            per_class: prf_per_class(&confusion),
            confusion,
        })
    }

    /// Header plus one row per gold level.
    pub fn write_confusion_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["gold\\pred".to_string()];
        header.extend(LevelLabel::ALL.iter().map(ToString::to_string));
        out.write_record(&header)?;
        for (label, row) in LevelLabel::ALL.iter().zip(&self.confusion) {
            let mut rec = vec![label.to_string()];
            rec.extend(row.iter().map(ToString::to_string));
            out.write_record(&rec)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Aligned confusion matrix and metric table.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n         {}", self.n);
        let _ = writeln!(s, "accuracy  {:.4}", self.accuracy);
        let _ = writeln!(s, "mae       {:.4}", self.mae);
        match self.neighbor_error_share {
            Some(v) => {
                let _ = writeln!(s, "neighbor  {v:.4}");
            }
            None => {
                let _ = writeln!(s, "neighbor  n/a");
            }
        }
        let _ = writeln!(s);
        let _ = write!(s, "gold\\pred");
        for l in LevelLabel::ALL {
            let _ = write!(s, "{:>7}", l.to_string());
        }
        let _ = writeln!(s);
        for (l, row) in LevelLabel::ALL.iter().zip(&self.confusion) {
            let _ = write!(s, "{:<9}", l.to_string());
            for n in row {
                let _ = write!(s, "{n:>7}");
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<6}{:>10}{:>10}{:>10}{:>9}", "level", "precision", "recall", "f1", "support");
        for c in &self.per_class {
            let _ = writeln!(
                s,
                "{:<6}{:>10.4}{:>10.4}{:>10.4}{:>9}{}",
                c.label.to_string(),
                c.precision,
                c.recall,
                c.f1,
                c.support,
                if c.undefined { "  (undefined)" } else { "" }
            );
        }
        s
    }
}

#[derive(Serialize)]
struct FullReport<'a> {
    #[serde(flatten)]
    eval: &'a EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    importance: Option<&'a ImportanceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistency: Option<&'a ConsistencyReport>,
}

pub const REPORT_JSON: &str = "eval.json";
pub const CONFUSION_CSV: &str = "confusion.csv";
pub const REPORT_TXT: &str = "report.txt";

/// Writes `eval.json`, `confusion.csv` and `report.txt` into `dir`.
pub fn write_reports(
    dir: impl AsRef<Path>,
    eval: &EvalReport,
    importance: Option<&ImportanceReport>,
    consistency: Option<&ConsistencyReport>,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let full = FullReport {
        eval,
        importance,
        consistency,
    };
    let json_path = dir.join(REPORT_JSON);
    std::fs::write(&json_path, serde_json::to_string_pretty(&full)? + "\n")
        .map_err(|e| Error::io(&json_path, e))?;

    let csv_path = dir.join(CONFUSION_CSV);
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    eval.write_confusion_csv(file)?;

    let mut text = eval.render_text();
    if let Some(imp) = importance {
        let _ = writeln!(text, "\n{:<22}{:>12}", "descriptor", "importance");
        for e in &imp.entries {
            let flag = if e.below_threshold { "  (below threshold)" } else { "" };
            let _ = writeln!(text, "{:<22}{:>12.6}{flag}", e.id, e.importance);
        }
    }
    if let Some(c) = consistency {
        let lines = c.summary_lines();
        let _ = writeln!(text, "\nconsistency: {}", if lines.is_empty() { "clean" } else { "findings" });
        for l in lines {
            let _ = writeln!(text, "  {l}");
        }
    }
    let txt_path = dir.join(REPORT_TXT);
    std::fs::write(&txt_path, text).map_err(|e| Error::io(&txt_path, e))
}
