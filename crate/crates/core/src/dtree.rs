//! Constrained CART classifier over [`FeatureMatrix`] rows.
//!
//! Splits are chosen by Gini impurity decrease over midpoint thresholds. Depth
//! and per-child support limits bound the tree; there is no pruning and no
//! class weighting.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{FeatureMatrix, LevelLabel, NUM_LEVELS};
use crate::textmetrics::{FeatureCatalog, FeatureVector};
use crate::{Error, Result};

pub type ClassCounts = [usize; NUM_LEVELS];

/// Two impurity decreases closer than this are treated as a tie.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_depth: usize,
    /// Samples needed to form a new branch; also the default per-leaf minimum.
    pub min_samples_branch: usize,
    /// Minimum samples in each child of a split. `None` means `min_samples_branch`.
    #[serde(default)]
    pub min_samples_leaf: Option<usize>,
    /// Normalized importance below which a descriptor is dropped from box definitions.
    pub importance_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_depth: 5,
            min_samples_branch: 50,
            min_samples_leaf: None,
            importance_threshold: 0.01,
        }
    }
}

impl TrainConfig {
    pub fn leaf_minimum(&self) -> usize {
        self.min_samples_leaf.unwrap_or(self.min_samples_branch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        if self.min_samples_branch < 1 || self.leaf_minimum() < 1 {
            return Err(Error::InvalidConfig("sample minimums must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.importance_threshold) {
            return Err(Error::InvalidConfig(
                "importance_threshold must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// `1 − Σ p_k²` over the given class counts.
pub fn gini_impurity(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyNode);
    }
    Ok(gini_of(class_counts, total))
}

fn gini_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

pub fn tally(labels: impl IntoIterator<Item = LevelLabel>) -> ClassCounts {
    let mut counts = [0usize; NUM_LEVELS];
    for l in labels {
        counts[l.ordinal()] += 1;
    }
    counts
}

/// Most frequent class; ties go to the lowest ordinal.
pub fn majority(counts: &ClassCounts) -> LevelLabel {
    let mut best = 0;
    for k in 1..NUM_LEVELS {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    LevelLabel::ALL[best]
}

/// Threshold placed in the gap `[lo, hi)` between two consecutive distinct
/// values: the midpoint rounded to 6 fractional digits, or the exact midpoint
/// if rounding would leave the gap. Both send `lo` left and `hi` right.
pub fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    let mid = if mid >= hi { lo } else { mid };
    let rounded: f64 = format!("{mid:.6}").parse().unwrap_or(mid);
    if rounded >= lo && rounded < hi {
        if rounded == 0.0 {
            0.0
        } else {
            rounded
        }
    } else {
        mid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Best Gini split of `rows`, or `None` when no admissible split lowers
/// impurity.
///
/// Candidates are the gaps between consecutive distinct values of each
/// feature. A candidate is admissible when both children hold at least
/// `min_leaf` rows. The winner maximizes
/// `G(parent) − n_L/n·G(L) − n_R/n·G(R)`; ties within [`TIE_EPSILON`] go to
/// the lowest feature index, then the lowest threshold.
pub fn best_split(matrix: &FeatureMatrix, rows: &[usize], min_leaf: usize) -> Option<Split> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let parent_counts = tally(rows.iter().map(|&r| matrix.labels[r]));
    let parent = gini_of(&parent_counts, n);
    if parent <= 0.0 {
        return None;
    }
    let min_leaf = min_leaf.max(1);
    let nf = n as f64;

    let mut best: Option<Split> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for feature in 0..matrix.n_features() {
        order.sort_by(|&a, &b| {
            matrix
                .value(a, feature)
                .total_cmp(&matrix.value(b, feature))
                .then(a.cmp(&b))
        });
        let mut left = [0usize; NUM_LEVELS];
        for i in 0..n - 1 {
            left[matrix.labels[order[i]].ordinal()] += 1;
            let lo = matrix.value(order[i], feature);
            let hi = matrix.value(order[i + 1], feature);
            if lo == hi {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let mut right = parent_counts;
            for k in 0..NUM_LEVELS {
                right[k] -= left[k];
            }
            let decrease = parent
                - (n_left as f64 / nf) * gini_of(&left, n_left)
                - (n_right as f64 / nf) * gini_of(&right, n_right);
            if decrease <= TIE_EPSILON {
                continue;
            }
            if best.is_none_or(|b| decrease > b.impurity_decrease + TIE_EPSILON) {
                best = Some(Split {
                    feature,
                    threshold: split_threshold(lo, hi),
                    impurity_decrease: decrease,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        samples: usize,
        impurity_decrease: f64,
        counts: ClassCounts,
        /// Rows with `value <= threshold`.
        left: Box<TreeNode>,
        /// Rows with `value > threshold`.
        right: Box<TreeNode>,
    },
    Leaf {
        counts: ClassCounts,
        majority: LevelLabel,
    },
}

impl TreeNode {
    pub fn counts(&self) -> &ClassCounts {
        match self {
            TreeNode::Split { counts, .. } | TreeNode::Leaf { counts, .. } => counts,
        }
    }

    pub fn samples(&self) -> usize {
        self.counts().iter().sum()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    fn visit<'a>(&'a self, depth: usize, f: &mut impl FnMut(&'a TreeNode, usize)) {
        f(self, depth);
        if let TreeNode::Split { left, right, .. } = self {
            left.visit(depth + 1, f);
            right.visit(depth + 1, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub catalog: FeatureCatalog,
    pub config: TrainConfig,
    pub n_train: usize,
    pub node_count: usize,
    pub leaf_count: usize,
    pub depth: usize,
}

struct Grower<'a> {
    matrix: &'a FeatureMatrix,
    config: &'a TrainConfig,
}

impl Grower<'_> {
    fn grow(&self, rows: Vec<usize>, depth: usize) -> TreeNode {
        let counts = tally(rows.iter().map(|&r| self.matrix.labels[r]));
        let leaf = |counts: ClassCounts| TreeNode::Leaf {
            majority: majority(&counts),
            counts,
        };
        let min_leaf = self.config.leaf_minimum();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.config.max_depth || rows.len() < 2 * min_leaf || pure {
            return leaf(counts);
        }
        let Some(split) = best_split(self.matrix, &rows, min_leaf) else {
            return leaf(counts);
        };
        let samples = rows.len();
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.matrix.value(i, split.feature) <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            samples,
            impurity_decrease: split.impurity_decrease,
            counts,
            left: Box::new(self.grow(l, depth + 1)),
            right: Box::new(self.grow(r, depth + 1)),
        }
    }
}

impl DecisionTree {
    /// Greedy recursive fit. A node stays a leaf at `max_depth`, when it holds
    /// fewer than twice the per-leaf minimum, when it is pure, or when no
    /// admissible split exists.
    pub fn fit(matrix: &FeatureMatrix, config: TrainConfig) -> Result<DecisionTree> {
        config.validate()?;
        if matrix.n_rows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        let grower = Grower {
            matrix,
            config: &config,
        };
        let root = grower.grow((0..matrix.n_rows()).collect(), 0);
        Ok(DecisionTree::assemble(
            root,
            matrix.catalog.clone(),
            config,
            matrix.n_rows(),
        ))
    }

    fn assemble(
        root: TreeNode,
        catalog: FeatureCatalog,
        config: TrainConfig,
        n_train: usize,
    ) -> DecisionTree {
        let (mut nodes, mut leaves, mut depth) = (0, 0, 0);
        root.visit(0, &mut |node, d| {
            nodes += 1;
            if node.is_leaf() {
                leaves += 1;
                depth = depth.max(d);
            }
        });
        DecisionTree {
            root,
            catalog,
            config,
            n_train,
            node_count: nodes,
            leaf_count: leaves,
            depth,
        }
    }

    pub fn is_single_leaf(&self) -> bool {
        self.root.is_leaf()
    }

    fn check_len(&self, fv: &FeatureVector) -> Result<()> {
        if fv.len() != self.catalog.len() {
            return Err(Error::DimensionMismatch {
                expected: self.catalog.len(),
                found: fv.len(),
            });
        }
        Ok(())
    }

    /// Leaf reached by `fv`, with its index in left-to-right leaf order.
    pub fn leaf_for(&self, fv: &FeatureVector) -> Result<(usize, &TreeNode)> {
        self.check_len(fv)?;
        let mut node = &self.root;
        let mut offset = 0;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = node
        {
            if fv[*feature] <= *threshold {
                node = left;
            } else {
                offset += count_leaves(left);
                node = right;
            }
        }
        Ok((offset, node))
    }

    pub fn predict(&self, fv: &FeatureVector) -> Result<LevelLabel> {
        match self.leaf_for(fv)?.1 {
            TreeNode::Leaf { majority, .. } => Ok(*majority),
            TreeNode::Split { .. } => unreachable!("descent ends at a leaf"),
        }
    }

    /// Internal nodes in pre-order.
    pub fn splits(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(0, &mut |node, _| {
            if !node.is_leaf() {
                out.push(node);
            }
        });
        out
    }

    /// Per-descriptor Gini importance: the sum over nodes splitting on the
    /// descriptor of `(n_node / N) · ΔG`, normalized to sum to one.
    pub fn feature_importance(&self) -> ImportanceReport {
        let m = self.catalog.len();
        let mut raw = vec![0.0; m];
        let n_total = self.n_train.max(1) as f64;
        for node in self.splits() {
            if let TreeNode::Split {
                feature,
                samples,
                impurity_decrease,
                ..
            } = node
            {
                raw[*feature] += (*samples as f64 / n_total) * impurity_decrease;
            }
        }
        let total: f64 = raw.iter().sum();
        let no_splits = self.is_single_leaf() || total <= 0.0;
        if !no_splits {
            for v in &mut raw {
                *v /= total;
            }
        }
        let threshold = self.config.importance_threshold;
        let mut entries: Vec<ImportanceEntry> = raw
            .into_iter()
            .enumerate()
            .map(|(index, importance)| ImportanceEntry {
                id: self.catalog[index].id.clone(),
                index,
                importance,
                below_threshold: importance < threshold || no_splits,
            })
            .collect();
        entries.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.index.cmp(&b.index)));
        ImportanceReport {
            entries,
            threshold,
            no_splits,
        }
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(&self.to_file()).expect("tree serializes");
        hex::encode(Sha256::digest(&json))
    }
}

fn count_leaves(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf { .. } => 1,
        TreeNode::Split { left, right, .. } => count_leaves(left) + count_leaves(right),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub id: String,
    pub index: usize,
    pub importance: f64,
    pub below_threshold: bool,
}

/// Normalized importances sorted descending (ties by catalog index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
    pub threshold: f64,
    /// The tree has no internal node; importances are all zero and unnormalized.
    pub no_splits: bool,
}

impl ImportanceReport {
    pub fn importance_of(&self, index: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.index == index)
            .map_or(0.0, |e| e.importance)
    }

    pub fn is_flagged(&self, index: usize) -> bool {
        self.entries
            .iter()
            .find(|e| e.index == index)
            .is_none_or(|e| e.below_threshold)
    }

    /// Catalog-ordered importances.
    pub fn by_index(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        for e in &self.entries {
            out[e.index] = e.importance;
        }
        out
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["descriptor", "importance", "below_threshold"])?;
        for e in &self.entries {
            out.write_record([
                e.id.as_str(),
                &format!("{:.6}", e.importance),
                if e.below_threshold { "true" } else { "false" },
            ])?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

// Serialized form: descriptors are referenced by id, children in (left, right) order.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum NodeRecord {
    Split {
        feature_id: String,
        threshold: f64,
        samples: usize,
        impurity_decrease: f64,
        counts: ClassCounts,
        children: Vec<NodeRecord>,
    },
    Leaf {
        counts: ClassCounts,
        majority: LevelLabel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TreeFile {
    catalog: FeatureCatalog,
    config: TrainConfig,
    n_train: usize,
    root: NodeRecord,
}

impl DecisionTree {
    fn to_file(&self) -> TreeFile {
        fn rec(node: &TreeNode, catalog: &FeatureCatalog) -> NodeRecord {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    samples,
                    impurity_decrease,
                    counts,
                    left,
                    right,
                } => NodeRecord::Split {
                    feature_id: catalog[*feature].id.clone(),
                    threshold: *threshold,
                    samples: *samples,
                    impurity_decrease: *impurity_decrease,
                    counts: *counts,
                    children: vec![rec(left, catalog), rec(right, catalog)],
                },
                TreeNode::Leaf { counts, majority } => NodeRecord::Leaf {
                    counts: *counts,
                    majority: *majority,
                },
            }
        }
        TreeFile {
            catalog: self.catalog.clone(),
            config: self.config,
            n_train: self.n_train,
            root: rec(&self.root, &self.catalog),
        }
    }

    fn from_file(file: TreeFile) -> Result<DecisionTree> {
        fn node(rec: NodeRecord, catalog: &FeatureCatalog) -> Result<TreeNode> {
            match rec {
                NodeRecord::Leaf { counts, majority } => {
                    if counts.iter().sum::<usize>() == 0 {
                        return Err(Error::EmptyNode);
                    }
                    Ok(TreeNode::Leaf { counts, majority })
                }
                NodeRecord::Split {
                    feature_id,
                    threshold,
                    samples,
                    impurity_decrease,
                    counts,
                    children,
                } => {
                    let feature = catalog
                        .index_of(&feature_id)
                        .ok_or(Error::UnknownDescriptor(feature_id))?;
                    if !threshold.is_finite() {
                        return Err(Error::InvalidConfig("non-finite threshold".into()));
                    }
                    let [left, right]: [NodeRecord; 2] = children.try_into().map_err(|_| {
                        Error::InvalidConfig("split node must have exactly two children".into())
                    })?;
                    Ok(TreeNode::Split {
                        feature,
                        threshold,
                        samples,
                        impurity_decrease,
                        counts,
                        left: Box::new(node(left, catalog)?),
                        right: Box::new(node(right, catalog)?),
                    })
                }
            }
        }
        file.config.validate()?;
        let root = node(file.root, &file.catalog)?;
        Ok(DecisionTree::assemble(root, file.catalog, file.config, file.n_train))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("tree serializes")
    }

    pub fn from_json(json: &str) -> Result<DecisionTree> {
        DecisionTree::from_file(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DecisionTree> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DecisionTree::from_json(&text)
    }
}
