//! Authorship analysis from constituency parse-tree structure.
//!
//! The pipeline: parse-tree files are read and normalized ([`treebank`]),
//! per-document structural feature histograms are extracted ([`features`]),
//! a corpus-level term–document matrix is assembled over a top-N union
//! vocabulary ([`corpus`]), optionally projected to a low-dimensional
//! discriminant space ([`reducer`]), and classified by leave-one-out
//! nearest-centroid ([`classifier`]). A small probabilistic context-free
//! grammar library ([`pcfg`]) supports scoring, parse selection, and seeded
//! sampling of synthetic corpora.

pub mod classifier;
pub mod corpus;
pub mod features;
pub mod pcfg;
pub mod reducer;
pub mod treebank;

#[cfg(test)]
pub(crate) mod test_fixtures;
