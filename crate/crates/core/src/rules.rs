//! Compiles a fitted tree into per-level interval definitions.
//!
//! Each root-to-leaf path becomes a [`PathRule`]: a conjunction of at most one
//! interval per descriptor. A level's definition is either the disjunction of
//! its leaf rules ([`DefinitionMode::Exact`], faithful to the tree) or the
//! bounding box of those rules ([`DefinitionMode::Box`], one conjunction of
//! ranges per level).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{FeatureMatrix, LevelLabel};
use crate::dtree::{DecisionTree, ImportanceReport, TrainConfig, TreeNode};
use crate::textmetrics::{FeatureCatalog, FeatureVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub inclusive: bool,
}

/// A real interval; `None` on a side means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Interval {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lower: None,
        upper: None,
    };

    /// `(−∞, t]`, the left branch of a split.
    pub fn at_most(t: f64) -> Interval {
        Interval {
            lower: None,
            upper: Some(Bound {
                value: t,
                inclusive: true,
            }),
        }
    }

    /// `(t, +∞)`, the right branch of a split.
    pub fn greater_than(t: f64) -> Interval {
        Interval {
            lower: Some(Bound {
                value: t,
                inclusive: false,
            }),
            upper: None,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Interval {
        Interval {
            lower: Some(Bound {
                value: lo,
                inclusive: true,
            }),
            upper: Some(Bound {
                value: hi,
                inclusive: true,
            }),
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower.is_none() && self.upper.is_none()
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = self.lower.is_none_or(|b| x > b.value || (b.inclusive && x == b.value));
        let below = self.upper.is_none_or(|b| x < b.value || (b.inclusive && x == b.value));
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l.value > u.value || (l.value == u.value && !(l.inclusive && u.inclusive)),
            _ => false,
        }
    }

    /// Tightest lower and upper bound of both.
    pub fn intersect(&self, other: &Interval) -> Interval {
        let lower = match (self.lower, other.lower) {
            (Some(a), Some(b)) => Some(if a.value > b.value {
                a
            } else if b.value > a.value {
                b
            } else {
                Bound {
                    value: a.value,
                    inclusive: a.inclusive && b.inclusive,
                }
            }),
            (a, b) => a.or(b),
        };
        let upper = match (self.upper, other.upper) {
            (Some(a), Some(b)) => Some(if a.value < b.value {
                a
            } else if b.value < a.value {
                b
            } else {
                Bound {
                    value: a.value,
                    inclusive: a.inclusive && b.inclusive,
                }
            }),
            (a, b) => a.or(b),
        };
        Interval { lower, upper }
    }

    /// Smallest interval containing both; an unbounded side wins.
    pub fn hull(&self, other: &Interval) -> Interval {
        let lower = match (self.lower, other.lower) {
            (Some(a), Some(b)) => Some(if a.value < b.value {
                a
            } else if b.value < a.value {
                b
            } else {
                Bound {
                    value: a.value,
                    inclusive: a.inclusive || b.inclusive,
                }
            }),
            _ => None,
        };
        let upper = match (self.upper, other.upper) {
            (Some(a), Some(b)) => Some(if a.value > b.value {
                a
            } else if b.value > a.value {
                b
            } else {
                Bound {
                    value: a.value,
                    inclusive: a.inclusive || b.inclusive,
                }
            }),
            _ => None,
        };
        Interval { lower, upper }
    }

    /// Width when bounded on both sides.
    pub fn width(&self) -> Option<f64> {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => Some((u.value - l.value).max(0.0)),
            _ => None,
        }
    }

    /// Distance from `x` to the nearest boundary when outside, else 0.
    pub fn distance(&self, x: f64) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        let below = self.lower.map_or(0.0, |b| (b.value - x).max(0.0));
        let above = self.upper.map_or(0.0, |b| (x - b.value).max(0.0));
        below.max(above)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lower {
            None => write!(f, "(-inf, ")?,
            Some(b) => write!(f, "{}{}, ", if b.inclusive { '[' } else { '(' }, b.value)?,
        }
        match self.upper {
            None => write!(f, "+inf)"),
            Some(b) => write!(f, "{}{}", b.value, if b.inclusive { ']' } else { ')' }),
        }
    }
}

mod bound_serde {
    use super::Bound;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "lowercase")]
    enum Sentinel {
        Unbounded,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Sentinel(Sentinel),
        Bound(Bound),
    }

    pub fn serialize<S: Serializer>(b: &Option<Bound>, s: S) -> Result<S::Ok, S::Error> {
        match b {
            None => Repr::Sentinel(Sentinel::Unbounded),
            Some(b) => Repr::Bound(*b),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Bound>, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Sentinel(_) => None,
            Repr::Bound(b) => Some(b),
        })
    }
}

/// A range condition on one descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalConstraint {
    pub descriptor: String,
    /// Catalog index of `descriptor`; resolved on load.
    #[serde(skip)]
    pub feature: usize,
    #[serde(with = "bound_serde")]
    pub lower: Option<Bound>,
    #[serde(with = "bound_serde")]
    pub upper: Option<Bound>,
}

impl IntervalConstraint {
    pub fn new(catalog: &FeatureCatalog, feature: usize, interval: Interval) -> Self {
        IntervalConstraint {
            descriptor: catalog[feature].id.clone(),
            feature,
            lower: interval.lower,
            upper: interval.upper,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lower: self.lower,
            upper: self.upper,
        }
    }

    pub fn matches(&self, fv: &FeatureVector) -> bool {
        self.interval().contains(fv[self.feature])
    }
}

impl fmt::Display for IntervalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.descriptor, self.interval())
    }
}

/// The box of one tree leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRule {
    /// Position of the leaf in left-to-right order.
    pub leaf: usize,
    /// At most one constraint per descriptor, in catalog order.
    pub constraints: Vec<IntervalConstraint>,
    pub label: LevelLabel,
    pub support: usize,
    pub purity: f64,
}

impl PathRule {
    pub fn matches(&self, fv: &FeatureVector) -> bool {
        self.constraints.iter().all(|c| c.matches(fv))
    }

    fn distance(&self, fv: &FeatureVector) -> f64 {
        box_distance(&self.constraints, fv)
    }
}

fn box_distance(constraints: &[IntervalConstraint], fv: &FeatureVector) -> f64 {
    constraints
        .iter()
        .map(|c| c.interval().distance(fv[c.feature]))
        .fold(0.0, f64::max)
}

/// Product of widths over dimensions bounded on both sides; infinite when
/// no dimension is.
fn box_volume(constraints: &[IntervalConstraint]) -> f64 {
    let widths: Vec<f64> = constraints.iter().filter_map(|c| c.interval().width()).collect();
    if widths.is_empty() {
        f64::INFINITY
    } else {
        widths.iter().product()
    }
}

/// Split conditions along each root-to-leaf path before any merging, in leaf
/// order: `(feature, interval)` per split, root first.
pub fn raw_path_conditions(tree: &DecisionTree) -> Vec<(Vec<(usize, Interval)>, &TreeNode)> {
    fn walk<'a>(
        node: &'a TreeNode,
        path: &mut Vec<(usize, Interval)>,
        out: &mut Vec<(Vec<(usize, Interval)>, &'a TreeNode)>,
    ) {
        match node {
            TreeNode::Leaf { .. } => out.push((path.clone(), node)),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                path.push((*feature, Interval::at_most(*threshold)));
                walk(left, path, out);
                path.pop();
                path.push((*feature, Interval::greater_than(*threshold)));
                walk(right, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut Vec::new(), &mut out);
    out
}

/// One [`PathRule`] per leaf, in leaf order. Repeated conditions on the same
/// descriptor along a path are merged into a single interval by keeping the
/// tightest lower and upper bound.
pub fn extract_paths(tree: &DecisionTree) -> Vec<PathRule> {
    raw_path_conditions(tree)
        .into_iter()
        .enumerate()
        .map(|(leaf, (conditions, node))| {
            let mut merged: Vec<Option<Interval>> = vec![None; tree.catalog.len()];
            for (feature, interval) in conditions {
                let slot = &mut merged[feature];
                *slot = Some(slot.map_or(interval, |cur| cur.intersect(&interval)));
            }
            let constraints = merged
                .into_iter()
                .enumerate()
                .filter_map(|(f, iv)| iv.map(|iv| IntervalConstraint::new(&tree.catalog, f, iv)))
                .collect();
            let counts = node.counts();
            let support: usize = counts.iter().sum();
            let label = match node {
                TreeNode::Leaf { majority, .. } => *majority,
                TreeNode::Split { .. } => unreachable!("paths end at leaves"),
            };
            PathRule {
                leaf,
                constraints,
                label,
                support,
                purity: counts[label.ordinal()] as f64 / support as f64,
            }
        })
        .collect()
}

/// Bounding interval, per descriptor, of every path predicting `label`.
/// A path that leaves a descriptor unconstrained makes that descriptor
/// unbounded; fully unbounded descriptors are omitted.
pub fn class_ranges(paths: &[PathRule], label: LevelLabel) -> Result<Vec<IntervalConstraint>> {
    let own: Vec<&PathRule> = paths.iter().filter(|p| p.label == label).collect();
    if own.is_empty() {
        return Err(Error::NoPathsForLabel(label));
    }
    let mut features: Vec<(usize, &str)> = own
        .iter()
        .flat_map(|p| p.constraints.iter().map(|c| (c.feature, c.descriptor.as_str())))
        .collect();
    features.sort_unstable();
    features.dedup();

    Ok(features
        .into_iter()
        .filter_map(|(feature, id)| {
            let hull = own
                .iter()
                .map(|p| {
                    p.constraints
                        .iter()
                        .find(|c| c.feature == feature)
                        .map_or(Interval::UNBOUNDED, IntervalConstraint::interval)
                })
                .reduce(|a, b| a.hull(&b))
                .unwrap_or(Interval::UNBOUNDED);
            (!hull.is_unbounded()).then(|| IntervalConstraint {
                descriptor: id.to_string(),
                feature,
                lower: hull.lower,
                upper: hull.upper,
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefinitionMode {
    Exact,
    Box,
}

impl std::str::FromStr for DefinitionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(DefinitionMode::Exact),
            "box" => Ok(DefinitionMode::Box),
            other => Err(format!("unknown definition mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DefinitionBody {
    /// Disjunction of leaf boxes.
    Exact { paths: Vec<PathRule> },
    /// Single conjunction of ranges.
    Box { constraints: Vec<IntervalConstraint> },
}

impl DefinitionBody {
    pub fn mode(&self) -> DefinitionMode {
        match self {
            DefinitionBody::Exact { .. } => DefinitionMode::Exact,
            DefinitionBody::Box { .. } => DefinitionMode::Box,
        }
    }

    /// Structural equality: same mode and same constraints, ignoring path
    /// metadata (leaf index, support, purity, predicted label).
    pub fn same_structure(&self, other: &DefinitionBody) -> bool {
        match (self, other) {
            (DefinitionBody::Box { constraints: a }, DefinitionBody::Box { constraints: b }) => a == b,
            (DefinitionBody::Exact { paths: a }, DefinitionBody::Exact { paths: b }) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.constraints == y.constraints)
            }
            _ => false,
        }
    }

    pub fn constraint_count(&self) -> usize {
        match self {
            DefinitionBody::Exact { paths } => paths.iter().map(|p| p.constraints.len()).sum(),
            DefinitionBody::Box { constraints } => constraints.len(),
        }
    }

    fn constraints_mut(&mut self) -> Box<dyn Iterator<Item = &mut IntervalConstraint> + '_> {
        match self {
            DefinitionBody::Exact { paths } => {
                Box::new(paths.iter_mut().flat_map(|p| p.constraints.iter_mut()))
            }
            DefinitionBody::Box { constraints } => Box::new(constraints.iter_mut()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDefinition {
    pub label: LevelLabel,
    #[serde(flatten)]
    pub body: DefinitionBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tree_hash: String,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitionSet {
    pub mode: DefinitionMode,
    pub catalog: FeatureCatalog,
    pub provenance: Provenance,
    /// One per predicted label, ascending ordinal.
    pub definitions: Vec<ClassDefinition>,
}

/// Builds one definition per label that some leaf predicts. Box mode drops
/// descriptors flagged below the importance threshold; exact mode keeps every
/// split condition.
pub fn build_definitions(
    tree: &DecisionTree,
    importance: &ImportanceReport,
    mode: DefinitionMode,
) -> DefinitionSet {
    let paths = extract_paths(tree);
    let mut labels: Vec<LevelLabel> = paths.iter().map(|p| p.label).collect();
    labels.sort_unstable();
    labels.dedup();

    let definitions = labels
        .into_iter()
        .map(|label| {
            let body = match mode {
                DefinitionMode::Exact => DefinitionBody::Exact {
                    paths: paths.iter().filter(|p| p.label == label).cloned().collect(),
                },
                DefinitionMode::Box => DefinitionBody::Box {
                    constraints: class_ranges(&paths, label)
                        .expect("label taken from paths")
                        .into_iter()
                        .filter(|c| !importance.is_flagged(c.feature))
                        .collect(),
                },
            };
            ClassDefinition { label, body }
        })
        .collect();

    DefinitionSet {
        mode,
        catalog: tree.catalog.clone(),
        provenance: Provenance {
            tree_hash: tree.content_hash(),
            config: tree.config,
        },
        definitions,
    }
}

impl DefinitionSet {
    pub fn get(&self, label: LevelLabel) -> Option<&ClassDefinition> {
        self.definitions.iter().find(|d| d.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("definitions serialize")
    }

    /// Parses JSON and resolves descriptor ids against the embedded catalog.
    pub fn from_json(json: &str) -> Result<DefinitionSet> {
        let mut defs: DefinitionSet = serde_json::from_str(json)?;
        let catalog = defs.catalog.clone();
        for def in &mut defs.definitions {
            for c in def.body.constraints_mut() {
                c.feature = catalog
                    .index_of(&c.descriptor)
                    .ok_or_else(|| Error::UnknownDescriptor(c.descriptor.clone()))?;
            }
        }
        Ok(defs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DefinitionSet> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DefinitionSet::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDiagnostics {
    /// Labels whose definition matched (exact mode: label of each matching path).
    pub matched: Vec<LevelLabel>,
    /// Leaf indices of matching paths (exact mode only).
    pub matched_paths: Vec<usize>,
    /// No definition matched; the nearest one was used.
    pub fallback: bool,
    /// L∞ distance to the chosen definition when `fallback` is set.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: LevelLabel,
    pub diagnostics: MatchDiagnostics,
}

/// Assigns `fv` to the level whose definition it satisfies.
///
/// Exact mode expects exactly one matching leaf box. Box mode resolves
/// multiple matches to the smallest-volume box (ties: lowest ordinal). When
/// nothing matches, the nearest definition by per-dimension boundary
/// distance (L∞) is chosen and `fallback` is set.
pub fn classify_by_rules(defs: &DefinitionSet, fv: &FeatureVector) -> Result<Classification> {
    if fv.len() != defs.catalog.len() {
        return Err(Error::DimensionMismatch {
            expected: defs.catalog.len(),
            found: fv.len(),
        });
    }
    if defs.definitions.is_empty() {
        return Err(Error::EmptyDefinitionSet);
    }
    match defs.mode {
        DefinitionMode::Exact => classify_exact(defs, fv).ok_or(Error::EmptyDefinitionSet),
        DefinitionMode::Box => Ok(classify_box(defs, fv)),
    }
}

fn classify_exact(defs: &DefinitionSet, fv: &FeatureVector) -> Option<Classification> {
    let mut paths: Vec<(LevelLabel, &PathRule)> = Vec::new();
    for def in &defs.definitions {
        if let DefinitionBody::Exact { paths: ps } = &def.body {
            paths.extend(ps.iter().map(|p| (def.label, p)));
        }
    }
    paths.sort_by_key(|(_, p)| p.leaf);
    let hits: Vec<&(LevelLabel, &PathRule)> = paths.iter().filter(|(_, p)| p.matches(fv)).collect();
    if let Some((label, _)) = hits.first() {
        return Some(Classification {
            label: *label,
            diagnostics: MatchDiagnostics {
                matched: hits.iter().map(|(l, _)| *l).collect(),
                matched_paths: hits.iter().map(|(_, p)| p.leaf).collect(),
                fallback: false,
                distance: None,
            },
        });
    }
    let (label, dist) = paths
        .iter()
        .map(|(l, p)| (*l, p.distance(fv)))
        .fold(None::<(LevelLabel, f64)>, |best, (l, d)| match best {
            Some((bl, bd)) if bd < d || (bd == d && bl <= l) => Some((bl, bd)),
            _ => Some((l, d)),
        })?;
    Some(Classification {
        label,
        diagnostics: MatchDiagnostics {
            matched: vec![],
            matched_paths: vec![],
            fallback: true,
            distance: Some(dist),
        },
    })
}

fn box_constraints(def: &ClassDefinition) -> &[IntervalConstraint] {
    match &def.body {
        DefinitionBody::Box { constraints } => constraints,
        DefinitionBody::Exact { .. } => &[],
    }
}

fn classify_box(defs: &DefinitionSet, fv: &FeatureVector) -> Classification {
    let hits: Vec<&ClassDefinition> = defs
        .definitions
        .iter()
        .filter(|d| box_constraints(d).iter().all(|c| c.matches(fv)))
        .collect();
    if !hits.is_empty() {
        let mut best = hits[0];
        let mut best_vol = box_volume(box_constraints(best));
        for &d in &hits[1..] {
            let vol = box_volume(box_constraints(d));
            if vol < best_vol || (vol == best_vol && d.label < best.label) {
                best = d;
                best_vol = vol;
            }
        }
        return Classification {
            label: best.label,
            diagnostics: MatchDiagnostics {
                matched: hits.iter().map(|d| d.label).collect(),
                matched_paths: vec![],
                fallback: false,
                distance: None,
            },
        };
    }
    let mut best = &defs.definitions[0];
    let mut best_dist = box_distance(box_constraints(best), fv);
    for d in &defs.definitions[1..] {
        let dist = box_distance(box_constraints(d), fv);
        if dist < best_dist || (dist == best_dist && d.label < best.label) {
            best = d;
            best_dist = dist;
        }
    }
    Classification {
        label: best.label,
        diagnostics: MatchDiagnostics {
            matched: vec![],
            matched_paths: vec![],
            fallback: true,
            distance: Some(best_dist),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapFinding {
    pub first: LevelLabel,
    pub second: LevelLabel,
    /// Intersection of the two boxes on every descriptor either constrains.
    pub region: Vec<IntervalConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptyFinding {
    pub label: LevelLabel,
    /// Leaf index when the empty body is one path of an exact definition.
    pub leaf: Option<usize>,
    pub descriptors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFinding {
    pub disjoint: bool,
    pub exhaustive: bool,
    /// Leaf index pairs whose boxes intersect.
    pub overlapping_leaves: Vec<(usize, usize)>,
    /// A region of feature space no leaf box covers, when one exists.
    pub uncovered: Option<Vec<IntervalConstraint>>,
}

/// Closed `[min, max]` range per descriptor over the rows carrying `label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRange {
    pub label: LevelLabel,
    pub ranges: Vec<IntervalConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub overlaps: Vec<OverlapFinding>,
    pub empty_definitions: Vec<EmptyFinding>,
    /// Present for exact-mode sets.
    pub partition: Option<PartitionFinding>,
    /// Per-level data min/max, present when a matrix was supplied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data_ranges: Vec<DataRange>,
}

impl ConsistencyReport {
    pub fn is_clean(&self) -> bool {
        self.overlaps.is_empty()
            && self.empty_definitions.is_empty()
            && self.partition.as_ref().is_none_or(|p| p.disjoint && p.exhaustive)
    }

    pub fn with_data_ranges(mut self, matrix: &FeatureMatrix) -> Self {
        self.data_ranges = data_ranges(matrix);
        self
    }

    /// One human-readable line per finding.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for o in &self.overlaps {
            let region: Vec<String> = o.region.iter().map(ToString::to_string).collect();
            out.push(format!(
                "overlap {} / {}: {}",
                o.first,
                o.second,
                if region.is_empty() { "everywhere".into() } else { region.join(", ") }
            ));
        }
        for e in &self.empty_definitions {
            let at = e.leaf.map(|l| format!(" (leaf {l})")).unwrap_or_default();
            out.push(format!(
                "empty definition {}{}: contradictory bounds on {}",
                e.label,
                at,
                e.descriptors.join(", ")
            ));
        }
        if let Some(p) = &self.partition {
            if !p.disjoint {
                out.push(format!("leaf boxes overlap: {:?}", p.overlapping_leaves));
            }
            if !p.exhaustive {
                out.push("leaf boxes do not cover feature space".into());
            }
        }
        out
    }
}

fn empty_descriptors(constraints: &[IntervalConstraint]) -> Vec<String> {
    constraints
        .iter()
        .filter(|c| c.interval().is_empty())
        .map(|c| c.descriptor.clone())
        .collect()
}

/// Per-feature intersection of two constraint lists; `None` if empty on some
/// descriptor.
fn intersect_boxes(
    a: &[IntervalConstraint],
    b: &[IntervalConstraint],
    catalog: &FeatureCatalog,
) -> Option<Vec<IntervalConstraint>> {
    let mut region = Vec::new();
    for f in 0..catalog.len() {
        let ia = a.iter().find(|c| c.feature == f).map(IntervalConstraint::interval);
        let ib = b.iter().find(|c| c.feature == f).map(IntervalConstraint::interval);
        let iv = match (ia, ib) {
            (None, None) => continue,
            (x, y) => x.unwrap_or_default().intersect(&y.unwrap_or_default()),
        };
        if iv.is_empty() {
            return None;
        }
        region.push(IntervalConstraint::new(catalog, f, iv));
    }
    Some(region)
}

/// Overlaps between levels' bounding boxes (in exact mode, the hull of each
/// level's paths), contradictory definitions, and for exact mode whether the
/// leaf boxes partition feature space.
pub fn check_consistency(defs: &DefinitionSet) -> ConsistencyReport {
    let mut empty_definitions = Vec::new();
    let mut boxes: Vec<(LevelLabel, Vec<IntervalConstraint>)> = Vec::new();
    let mut leaf_boxes: Vec<(usize, Vec<IntervalConstraint>)> = Vec::new();

    for def in &defs.definitions {
        match &def.body {
            DefinitionBody::Box { constraints } => {
                let bad = empty_descriptors(constraints);
                if bad.is_empty() {
                    boxes.push((def.label, constraints.clone()));
                } else {
                    empty_definitions.push(EmptyFinding {
                        label: def.label,
                        leaf: None,
                        descriptors: bad,
                    });
                }
            }
            DefinitionBody::Exact { paths } => {
                let mut live = Vec::new();
                for p in paths {
                    let bad = empty_descriptors(&p.constraints);
                    if bad.is_empty() {
                        live.push(p.clone());
                        leaf_boxes.push((p.leaf, p.constraints.clone()));
                    } else {
                        empty_definitions.push(EmptyFinding {
                            label: def.label,
                            leaf: Some(p.leaf),
                            descriptors: bad,
                        });
                    }
                }
                for p in &mut live {
                    p.label = def.label;
                }
                if let Ok(hull) = class_ranges(&live, def.label) {
                    boxes.push((def.label, hull));
                }
            }
        }
    }

    let mut overlaps = Vec::new();
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if let Some(region) = intersect_boxes(&boxes[i].1, &boxes[j].1, &defs.catalog) {
                overlaps.push(OverlapFinding {
                    first: boxes[i].0,
                    second: boxes[j].0,
                    region,
                });
            }
        }
    }

    let partition = (defs.mode == DefinitionMode::Exact).then(|| {
        leaf_boxes.sort_by_key(|(leaf, _)| *leaf);
        let mut overlapping_leaves = Vec::new();
        for i in 0..leaf_boxes.len() {
            for j in i + 1..leaf_boxes.len() {
                if intersect_boxes(&leaf_boxes[i].1, &leaf_boxes[j].1, &defs.catalog).is_some() {
                    overlapping_leaves.push((leaf_boxes[i].0, leaf_boxes[j].0));
                }
            }
        }
        let dense: Vec<Vec<Interval>> = leaf_boxes
            .iter()
            .map(|(_, cs)| dense_box(cs, defs.catalog.len()))
            .collect();
        let uncovered = find_uncovered(vec![Interval::UNBOUNDED; defs.catalog.len()], &dense)
            .map(|region| {
                region
                    .into_iter()
                    .enumerate()
                    .filter(|(_, iv)| !iv.is_unbounded())
                    .map(|(f, iv)| IntervalConstraint::new(&defs.catalog, f, iv))
                    .collect()
            });
        PartitionFinding {
            disjoint: overlapping_leaves.is_empty(),
            exhaustive: uncovered.is_none(),
            overlapping_leaves,
            uncovered,
        }
    });

    ConsistencyReport {
        overlaps,
        empty_definitions,
        partition,
        data_ranges: Vec::new(),
    }
}

fn dense_box(constraints: &[IntervalConstraint], m: usize) -> Vec<Interval> {
    let mut out = vec![Interval::UNBOUNDED; m];
    for c in constraints {
        out[c.feature] = out[c.feature].intersect(&c.interval());
    }
    out
}

/// Returns a non-empty sub-region of `region` that no box covers, if any.
///
/// Picks a box meeting the region; if the box does not contain the region,
/// cuts the region along one of the box's bounds and recurses on both parts.
fn find_uncovered(region: Vec<Interval>, boxes: &[Vec<Interval>]) -> Option<Vec<Interval>> {
    if region.iter().any(Interval::is_empty) {
        return None;
    }
    let Some(b) = boxes
        .iter()
        .find(|b| b.iter().zip(&region).all(|(x, r)| !x.intersect(r).is_empty()))
    else {
        return Some(region);
    };
    for (d, iv) in b.iter().enumerate() {
        let cuts = [
            iv.lower.map(|l| {
                let outside = Interval {
                    lower: None,
                    upper: Some(Bound {
                        value: l.value,
                        inclusive: !l.inclusive,
                    }),
                };
                let inside = Interval {
                    lower: Some(l),
                    upper: None,
                };
                (outside, inside)
            }),
            iv.upper.map(|u| {
                let outside = Interval {
                    lower: Some(Bound {
                        value: u.value,
                        inclusive: !u.inclusive,
                    }),
                    upper: None,
                };
                let inside = Interval {
                    lower: None,
                    upper: Some(u),
                };
                (outside, inside)
            }),
        ];
        for (outside, inside) in cuts.into_iter().flatten() {
            let out_part = region[d].intersect(&outside);
            if out_part.is_empty() {
                continue;
            }
            let mut a = region.clone();
            a[d] = out_part;
            let mut b_region = region.clone();
            b_region[d] = region[d].intersect(&inside);
            return find_uncovered(a, boxes).or_else(|| find_uncovered(b_region, boxes));
        }
    }
    None
}

/// Literal per-level `[min, max]` of each descriptor over the data.
pub fn data_ranges(matrix: &FeatureMatrix) -> Vec<DataRange> {
    LevelLabel::ALL
        .iter()
        .filter_map(|&label| {
            let rows: Vec<&FeatureVector> = matrix
                .rows
                .iter()
                .zip(&matrix.labels)
                .filter(|(_, l)| **l == label)
                .map(|(r, _)| r)
                .collect();
            if rows.is_empty() {
                return None;
            }
            let ranges = (0..matrix.n_features())
                .map(|f| {
                    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r[f]), hi.max(r[f]))
                    });
                    IntervalConstraint::new(&matrix.catalog, f, Interval::closed(lo, hi))
                })
                .collect();
            Some(DataRange { label, ranges })
        })
        .collect()
}
