//! Shared fixture values for the unit tests.

use crate::treebank::{normalize, parse_trees, NormalizationConfig, ParseTree};

/// A parsed Federalist-style sentence with a `ROOT` wrapper, a tagged comma,
/// and leaf words.
pub(crate) const SENTENCE: &str = include_str!("../../../fixtures/federalist_sentence.mrg");

/// The normalized skeleton of [`SENTENCE`], frozen.
pub(crate) const SENTENCE_CANONICAL: &str = "(S(PP(IN)(NP(NP(DT)(JJ)(NN))(PP(IN)(NP(NP(DT)(NN))(PP(IN)(NP(DT)(JJ)(JJ)(NN)))))))(NP(PRP))(VP(VBP)(VP(VBN)(PP(IN))(S(VP(TO)(VP(VB)(PP(IN)(NP(NP(DT)(JJ)(NN))(PP(IN)(NP(NP(DT)(NNP)(NNP))(PP(IN)(NP(NNP)))))))))))))";

/// The normalized sample sentence as a tree.
pub(crate) fn sentence_tree() -> ParseTree {
    let trees = parse_trees(SENTENCE).expect("fixture parses");
    normalize(&trees[0], &NormalizationConfig::default()).expect("fixture normalizes")
}
