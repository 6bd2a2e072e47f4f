//! Structural feature extraction from normalized (word-free) parse trees.
//!
//! Four feature families are supported:
//!
//! * **all subtrees of depth d** — anchored at every node of height at least
//!   `d`, truncated exactly `d` edges below the anchor, keyed by canonical
//!   string; a tree contributes one count per qualifying anchor.
//! * **rooted subtree of depth L** — the whole tree truncated `L` edges
//!   below the root (returned untruncated if shallower); one key per tree.
//! * **POS counts** — every node label, once per occurrence.
//! * **POS by level** — node labels keyed by `level:label` with the root at
//!   level 1.
//!
//! Keys are plain strings shared across families, so downstream vocabulary
//! and matrix code never needs to know which family produced them.

use std::collections::{btree_map, BTreeMap};
use std::fmt;

use crate::treebank::ParseTree;

/// Which feature family to extract, with its depth/level parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureSpec {
    /// All subtrees truncated to exactly `depth` edges below their anchor
    /// node; `depth >= 1`.
    AllSubtrees { depth: usize },
    /// The rooted subtree truncated `level` edges below the root;
    /// `level >= 1`.
    RootedSubtrees { level: usize },
    /// Label histogram of whole trees.
    PosCounts,
    /// Label histogram stratified by 1-based level.
    PosByLevel,
}

impl FeatureSpec {
    /// Stable short name used by artifacts and reports.
    pub fn name(&self) -> &'static str {
        match self {
            FeatureSpec::AllSubtrees { .. } => "all-subtrees",
            FeatureSpec::RootedSubtrees { .. } => "rooted",
            FeatureSpec::PosCounts => "pos",
            FeatureSpec::PosByLevel => "pos-by-level",
        }
    }

    /// The depth/level parameter, for the families that take one.
    pub fn param(&self) -> Option<usize> {
        match self {
            FeatureSpec::AllSubtrees { depth } => Some(*depth),
            FeatureSpec::RootedSubtrees { level } => Some(*level),
            FeatureSpec::PosCounts | FeatureSpec::PosByLevel => None,
        }
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(p) => write!(f, "{}({})", self.name(), p),
            None => f.write_str(self.name()),
        }
    }
}

/// A feature identity: a canonical subtree string, a label, or a
/// `level:label` pair. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureKey(String);

impl FeatureKey {
    pub fn new(key: impl Into<String>) -> Self {
        FeatureKey(key.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A multiset of feature keys with nonnegative counts. Iteration order is
/// lexicographic by key, so everything downstream is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureCounts {
    counts: BTreeMap<FeatureKey, u64>,
}

impl FeatureCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: FeatureKey, n: u64) {
        if n > 0 {
            *self.counts.entry(key).or_insert(0) += n;
        }
    }

    pub fn merge_from(&mut self, other: &FeatureCounts) {
        for (k, &n) in other.iter() {
            self.add(k.clone(), n);
        }
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(&FeatureKey::new(key)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, FeatureKey, u64> {
        self.counts.iter()
    }

    /// Number of distinct keys.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Total mass: the sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl<'a> IntoIterator for &'a FeatureCounts {
    type Item = (&'a FeatureKey, &'a u64);
    type IntoIter = btree_map::Iter<'a, FeatureKey, u64>;
    fn into_iter(self) -> Self::IntoIter {
        self.counts.iter()
    }
}

impl FromIterator<(FeatureKey, u64)> for FeatureCounts {
    fn from_iter<I: IntoIterator<Item = (FeatureKey, u64)>>(iter: I) -> Self {
        let mut c = FeatureCounts::new();
        for (k, n) in iter {
            c.add(k, n);
        }
        c
    }
}

fn write_truncated(t: &ParseTree, remaining: usize, out: &mut String) {
    out.push('(');
    out.push_str(t.label().as_str());
    if remaining > 0 {
        for c in t.children() {
            write_truncated(c, remaining - 1, out);
        }
    }
    out.push(')');
}

/// All depth-`depth` subtrees of `tree`: every node whose height is at least
/// `depth` anchors one subtree, truncated exactly `depth` edges below the
/// anchor (nodes at the cut keep their label and lose their children).
pub fn all_subtrees(tree: &ParseTree, depth: usize) -> FeatureCounts {
    fn walk(t: &ParseTree, depth: usize, out: &mut FeatureCounts) -> usize {
        let height = t
            .children()
            .iter()
            .map(|c| 1 + walk(c, depth, out))
            .max()
            .unwrap_or(0);
        if height >= depth {
            let mut key = String::new();
            write_truncated(t, depth, &mut key);
            out.add(FeatureKey::new(key), 1);
        }
        height
    }
    let mut counts = FeatureCounts::new();
    walk(tree, depth, &mut counts);
    counts
}

/// The rooted subtree of `tree` truncated `level` edges below the root; a
/// tree shallower than `level` comes back whole.
pub fn rooted_subtree(tree: &ParseTree, level: usize) -> FeatureKey {
    let mut key = String::new();
    write_truncated(tree, level, &mut key);
    FeatureKey::new(key)
}

/// Label histogram over all nodes of `tree`.
pub fn pos_counts(tree: &ParseTree) -> FeatureCounts {
    fn walk(t: &ParseTree, out: &mut FeatureCounts) {
        out.add(FeatureKey::new(t.label().as_str()), 1);
        for c in t.children() {
            walk(c, out);
        }
    }
    let mut counts = FeatureCounts::new();
    walk(tree, &mut counts);
    counts
}

/// Label histogram keyed `level:label`, the root at level 1.
pub fn pos_by_level(tree: &ParseTree) -> FeatureCounts {
    fn walk(t: &ParseTree, level: usize, out: &mut FeatureCounts) {
        out.add(FeatureKey::new(format!("{level}:{}", t.label())), 1);
        for c in t.children() {
            walk(c, level + 1, out);
        }
    }
    let mut counts = FeatureCounts::new();
    walk(tree, 1, &mut counts);
    counts
}

/// Accumulate `spec` features over a document's sentences. Each sentence of
/// a `RootedSubtrees` extraction contributes exactly one key.
pub fn extract(trees: &[ParseTree], spec: &FeatureSpec) -> FeatureCounts {
    let mut totals = FeatureCounts::new();
    for tree in trees {
        match spec {
            FeatureSpec::AllSubtrees { depth } => {
                totals.merge_from(&all_subtrees(tree, *depth));
            }
            FeatureSpec::RootedSubtrees { level } => {
                totals.add(rooted_subtree(tree, *level), 1);
            }
            FeatureSpec::PosCounts => totals.merge_from(&pos_counts(tree)),
            FeatureSpec::PosByLevel => totals.merge_from(&pos_by_level(tree)),
        }
    }
    totals
}
