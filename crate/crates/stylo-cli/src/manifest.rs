//! Corpus manifests: a JSON file listing tree files with author labels,
//! plus normalization options.
//!
//! ```json
//! {
//!   "entries": [
//!     {"author": "Hamilton", "doc_id": "fed16", "path": "trees/fed16.mrg"},
//!     {"author": "Madison", "doc_id": "fed10", "path": "trees/fed10.mrg", "segments": 4}
//!   ],
//!   "options": {"drop_root": true, "strip_words": true}
//! }
//! ```
//!
//! Paths are resolved relative to the manifest's directory. An entry with
//! `segments: s` is split into `s` contiguous near-even documents named
//! `doc_id#1` … `doc_id#s`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use stylo_core::corpus::{segment, Corpus, Document};
use stylo_core::treebank::{
    normalize, parse_trees, NormalizationConfig, ParseTree, SentenceStats, DEFAULT_PUNCTUATION,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub options: ManifestOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub author: String,
    pub doc_id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub segments: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestOptions {
    #[serde(default = "default_true")]
    pub drop_root: bool,
    #[serde(default = "default_true")]
    pub strip_words: bool,
    /// Replaces the default punctuation label set when present.
    #[serde(default)]
    pub punctuation_labels: Option<Vec<String>>,
}

fn default_true() -> bool {
    true
}

impl Default for ManifestOptions {
    fn default() -> Self {
        ManifestOptions {
            drop_root: true,
            strip_words: true,
            punctuation_labels: None,
        }
    }
}

impl ManifestOptions {
    pub fn normalization(&self) -> NormalizationConfig {
        let punctuation: BTreeSet<String> = match &self.punctuation_labels {
            Some(labels) => labels.iter().cloned().collect(),
            None => DEFAULT_PUNCTUATION.iter().map(|s| s.to_string()).collect(),
        };
        NormalizationConfig {
            drop_root: self.drop_root,
            strip_words: self.strip_words,
            punctuation_labels: punctuation,
        }
    }
}

/// Read and validate a manifest; returns it with the directory that
/// relative entry paths resolve against.
pub fn load_manifest(path: &Path) -> Result<(Manifest, PathBuf)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", path.display()))?;
    if manifest.entries.is_empty() {
        bail!("manifest {} has no entries", path.display());
    }
    for entry in &manifest.entries {
        if entry.segments == Some(0) {
            bail!("entry '{}': segments must be at least 1", entry.doc_id);
        }
    }
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((manifest, base))
}

fn normalize_all(
    raw: &[ParseTree],
    cfg: &NormalizationConfig,
    path: &Path,
) -> Result<Vec<ParseTree>> {
    raw.iter()
        .enumerate()
        .map(|(i, t)| {
            normalize(t, cfg)
                .with_context(|| format!("normalizing tree {} of {}", i + 1, path.display()))
        })
        .collect()
}

/// Load every entry's trees, normalize them, apply segmentation, and
/// assemble the corpus in manifest order.
pub fn load_corpus(manifest: &Manifest, base: &Path) -> Result<(Corpus, NormalizationConfig)> {
    let cfg = manifest.options.normalization();
    let mut documents = Vec::new();
    for entry in &manifest.entries {
        let path = base.join(&entry.path);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading trees for '{}' from {}", entry.doc_id, path.display()))?;
        let raw = parse_trees(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        if raw.is_empty() {
            bail!("{} contains no trees", path.display());
        }
        match entry.segments {
            None => {
                let stats = SentenceStats::collect(&raw, &cfg);
                let trees = normalize_all(&raw, &cfg, &path)?;
                documents.push(Document::new(&entry.doc_id, &entry.author, trees, stats)?);
            }
            Some(parts) => {
                let pieces = segment(&raw, parts).with_context(|| {
                    format!("segmenting '{}' ({} sentences)", entry.doc_id, raw.len())
                })?;
                for (i, piece) in pieces.iter().enumerate() {
                    let stats = SentenceStats::collect(piece, &cfg);
                    let trees = normalize_all(piece, &cfg, &path)?;
                    let doc_id = format!("{}#{}", entry.doc_id, i + 1);
                    documents.push(Document::new(doc_id, &entry.author, trees, stats)?);
                }
            }
        }
    }
    let corpus = Corpus::new(documents).context("assembling corpus")?;
    Ok((corpus, cfg))
}
