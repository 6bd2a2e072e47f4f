//! Documents, author classes, vocabulary selection, and the
//! term-by-document matrix.
//!
//! A [`Corpus`] is an ordered collection of documents, each a sequence of
//! normalized parse trees labeled with an author. Per-author feature totals
//! drive top-`N` vocabulary selection; the union of the per-author top-`N`
//! sets, ordered lexicographically, becomes the matrix row space. The matrix
//! holds one column per document, optionally normalized so each nonzero
//! column sums to 1.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::features::{extract, FeatureCounts, FeatureKey, FeatureSpec};
use crate::treebank::{ParseTree, SentenceStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("document '{doc_id}' has no trees")]
    EmptyDocument { doc_id: String },
    #[error("duplicate document id '{doc_id}'")]
    DuplicateDocId { doc_id: String },
    #[error("top-N must be at least 1")]
    InvalidTopN,
    #[error("author '{author}' has no features; nothing to select from")]
    EmptyAuthorFeatures { author: String },
    #[error("vocabulary has no keys")]
    EmptyVocabulary,
    #[error("duplicate vocabulary key '{key}'")]
    DuplicateVocabularyKey { key: String },
    #[error("cannot split {sentences} sentences into {parts} parts")]
    SegmentCount { sentences: usize, parts: usize },
}

/// One document: an author label, a unique id, and its normalized trees.
#[derive(Debug, Clone)]
pub struct Document {
    doc_id: String,
    author: String,
    trees: Vec<ParseTree>,
    stats: SentenceStats,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        author: impl Into<String>,
        trees: Vec<ParseTree>,
        stats: SentenceStats,
    ) -> Result<Self, CorpusError> {
        let doc_id = doc_id.into();
        if trees.is_empty() {
            return Err(CorpusError::EmptyDocument { doc_id });
        }
        Ok(Document {
            doc_id,
            author: author.into(),
            trees,
            stats,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn author(&self) -> &str {
        &self.author
    }

    pub fn trees(&self) -> &[ParseTree] {
        &self.trees
    }

    pub fn stats(&self) -> &SentenceStats {
        &self.stats
    }
}

/// One author class: its label and the indices of its documents within the
/// corpus, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Class {
    pub label: String,
    pub doc_indices: Vec<usize>,
}

impl Class {
    /// Number of documents in the class.
    pub fn size(&self) -> usize {
        self.doc_indices.len()
    }
}

/// An ordered document collection with its author classes. Classes are
/// indexed by first appearance in document order.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    classes: Vec<Class>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut seen = BTreeSet::new();
        for d in &documents {
            if !seen.insert(d.doc_id.clone()) {
                return Err(CorpusError::DuplicateDocId {
                    doc_id: d.doc_id.clone(),
                });
            }
        }
        let mut classes: Vec<Class> = Vec::new();
        for (j, d) in documents.iter().enumerate() {
            match classes.iter_mut().find(|c| c.label == d.author) {
                Some(c) => c.doc_indices.push(j),
                None => classes.push(Class {
                    label: d.author.clone(),
                    doc_indices: vec![j],
                }),
            }
        }
        Ok(Corpus { documents, classes })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Number of documents, n.
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Author classes in first-appearance order; k = `classes().len()`.
    pub fn classes(&self) -> &[Class] {
        &self.classes
    }
}

/// Feature totals per author: each author's counts summed over all of that
/// author's documents.
pub fn author_totals(corpus: &Corpus, spec: &FeatureSpec) -> BTreeMap<String, FeatureCounts> {
    let mut totals: BTreeMap<String, FeatureCounts> = BTreeMap::new();
    for d in corpus.documents() {
        totals
            .entry(d.author.clone())
            .or_default()
            .merge_from(&extract(&d.trees, spec));
    }
    totals
}

/// The ordered row space of a term-by-document matrix: distinct keys sorted
/// lexicographically, tagged with the feature spec and the per-author
/// selection size that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    keys: Vec<FeatureKey>,
    spec: FeatureSpec,
    top_n: usize,
}

impl Vocabulary {
    /// Build directly from keys (sorted and checked for duplicates).
    pub fn new(
        mut keys: Vec<FeatureKey>,
        spec: FeatureSpec,
        top_n: usize,
    ) -> Result<Self, CorpusError> {
        if keys.is_empty() {
            return Err(CorpusError::EmptyVocabulary);
        }
        keys.sort();
        for pair in keys.windows(2) {
            if pair[0] == pair[1] {
                return Err(CorpusError::DuplicateVocabularyKey {
                    key: pair[0].to_string(),
                });
            }
        }
        Ok(Vocabulary { keys, spec, top_n })
    }

    pub fn keys(&self) -> &[FeatureKey] {
        &self.keys
    }

    /// Number of rows, m.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn top_n(&self) -> usize {
        self.top_n
    }

    pub fn position(&self, key: &FeatureKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }
}

/// An author's `n` highest-count keys: count descending, ties by
/// lexicographic key order, truncated at `n` even mid-tie.
fn top_n_keys(counts: &FeatureCounts, n: usize) -> Vec<FeatureKey> {
    let mut ranked: Vec<(&FeatureKey, u64)> = counts.iter().map(|(k, &c)| (k, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(n)
        .map(|(k, _)| k.clone())
        .collect()
}

/// Union of the per-author top-`n` key sets, ordered lexicographically.
/// Every author must have at least one feature.
pub fn top_n_union(
    totals: &BTreeMap<String, FeatureCounts>,
    n: usize,
    spec: &FeatureSpec,
) -> Result<Vocabulary, CorpusError> {
    if n == 0 {
        return Err(CorpusError::InvalidTopN);
    }
    let mut union: BTreeSet<FeatureKey> = BTreeSet::new();
    for (author, counts) in totals {
        if counts.is_empty() {
            return Err(CorpusError::EmptyAuthorFeatures {
                author: author.clone(),
            });
        }
        union.extend(top_n_keys(counts, n));
    }
    Vocabulary::new(union.into_iter().collect(), spec.clone(), n)
}

/// Sizes of the distinct-key union and intersection across authors.
pub fn union_intersection_report(totals: &BTreeMap<String, FeatureCounts>) -> (usize, usize) {
    let mut sets = totals
        .values()
        .map(|c| c.iter().map(|(k, _)| k.clone()).collect::<BTreeSet<_>>());
    let Some(first) = sets.next() else {
        return (0, 0);
    };
    let mut union = first.clone();
    let mut intersection = first;
    for set in sets {
        union.extend(set.iter().cloned());
        intersection.retain(|k| set.contains(k));
    }
    (union.len(), intersection.len())
}

/// Per-column document identity in a [`TermDocMatrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMeta {
    pub doc_id: String,
    pub author: String,
}

/// The m×n term-by-document matrix: entry (i, j) counts `row_keys[i]` in
/// document j, optionally scaled so each nonzero column sums to 1.
///
/// `row_keys` is present for matrices built from a vocabulary and absent
/// for derived matrices (e.g. after projection) whose rows are no longer
/// feature keys.
#[derive(Debug, Clone)]
pub struct TermDocMatrix {
    pub values: DMatrix<f64>,
    pub row_keys: Option<Vocabulary>,
    pub col_meta: Vec<ColumnMeta>,
    pub normalized: bool,
    /// Columns whose raw sum was zero; left unscaled under normalization.
    pub zero_columns: Vec<usize>,
}

impl TermDocMatrix {
    /// Author classes derived from column metadata, in first-appearance
    /// order; each class lists its column indices in column order.
    pub fn classes(&self) -> Vec<Class> {
        let mut classes: Vec<Class> = Vec::new();
        for (j, meta) in self.col_meta.iter().enumerate() {
            match classes.iter_mut().find(|c| c.label == meta.author) {
                Some(c) => c.doc_indices.push(j),
                None => classes.push(Class {
                    label: meta.author.clone(),
                    doc_indices: vec![j],
                }),
            }
        }
        classes
    }
}

/// Count each vocabulary key in each document; with `normalize`, divide
/// every column by its sum. All-zero columns are flagged and left as they
/// are.
pub fn build_matrix(corpus: &Corpus, vocabulary: &Vocabulary, normalize: bool) -> TermDocMatrix {
    let m = vocabulary.len();
    let n = corpus.len();
    let mut values = DMatrix::<f64>::zeros(m, n);
    let mut zero_columns = Vec::new();
    for (j, d) in corpus.documents().iter().enumerate() {
        let counts = extract(&d.trees, vocabulary.spec());
        for (i, key) in vocabulary.keys().iter().enumerate() {
            values[(i, j)] = counts.get(key.as_str()) as f64;
        }
        let sum: f64 = values.column(j).sum();
        if sum == 0.0 {
            zero_columns.push(j);
        } else if normalize {
            values.column_mut(j).scale_mut(1.0 / sum);
        }
    }
    TermDocMatrix {
        values,
        row_keys: Some(vocabulary.clone()),
        col_meta: corpus
            .documents()
            .iter()
            .map(|d| ColumnMeta {
                doc_id: d.doc_id.clone(),
                author: d.author.clone(),
            })
            .collect(),
        normalized: normalize,
        zero_columns,
    }
}

/// Split a sentence sequence into `parts` contiguous runs whose lengths
/// differ by at most one, longer runs first.
pub fn segment(trees: &[ParseTree], parts: usize) -> Result<Vec<&[ParseTree]>, CorpusError> {
    if parts == 0 || parts > trees.len() {
        return Err(CorpusError::SegmentCount {
            sentences: trees.len(),
            parts,
        });
    }
    let base = trees.len() / parts;
    let extra = trees.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        out.push(&trees[start..start + len]);
        start += len;
    }
    Ok(out)
}
