//! Constituency parse trees: S-expression reading, normalization to
//! word-free structural skeletons, and canonical strings.
//!
//! Input files are Penn-Treebank-style `.mrg` text: one or more
//! parenthesized trees separated by arbitrary whitespace, e.g.
//! `(S (NP (PRP you)) (VP (VBP are)))`. Normalization drops a `ROOT`
//! wrapper, removes punctuation-labeled nodes together with their subtrees,
//! and strips leaf words, leaving only the label structure that the feature
//! extractors consume.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Errors from tree parsing and normalization. Offsets are 1-based byte
/// positions into the input text; for an unexpected end of input the offset
/// points one past the last byte.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unbalanced parentheses at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("empty node label at offset {offset}")]
    EmptyLabel { offset: usize },
    #[error("stray token outside any tree at offset {offset}")]
    StrayToken { offset: usize },
    #[error("node at offset {offset} mixes a word with children or holds more than one word")]
    MixedNode { offset: usize },
    #[error("invalid label {text:?}: labels are nonempty and contain no parentheses or whitespace")]
    InvalidLabel { text: String },
    #[error("ROOT node has {children} children; expected exactly one sentence under it")]
    RootShape { children: usize },
    #[error("tree vanished under normalization (its root label is punctuation)")]
    NormalizedToNothing,
}

/// A node label: nonempty, with no parentheses or whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self, TreeError> {
        let text = text.into();
        let ok = !text.is_empty()
            && !text
                .chars()
                .any(|c| c == '(' || c == ')' || c.is_whitespace());
        if ok {
            Ok(Token(text))
        } else {
            Err(TreeError::InvalidLabel { text })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered-tree node. A node carries either children or a single leaf
/// word (never both); a childless, wordless node is a bare label leaf, the
/// shape produced by normalization and truncation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    label: Token,
    children: Vec<ParseTree>,
    word: Option<String>,
}

impl ParseTree {
    /// An internal node (or a bare label leaf, when `children` is empty).
    pub fn node(label: Token, children: Vec<ParseTree>) -> Self {
        ParseTree {
            label,
            children,
            word: None,
        }
    }

    /// A leaf carrying a word, e.g. `(PRP you)`.
    pub fn word_leaf(label: Token, word: impl Into<String>) -> Self {
        ParseTree {
            label,
            children: Vec::new(),
            word: Some(word.into()),
        }
    }

    pub fn label(&self) -> &Token {
        &self.label
    }

    pub fn children(&self) -> &[ParseTree] {
        &self.children
    }

    pub fn word(&self) -> Option<&str> {
        self.word.as_deref()
    }

    /// Longest downward path in edges; a single node has height 0.
    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| 1 + c.height())
            .max()
            .unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ParseTree::node_count).sum::<usize>()
    }
}

/// Compact one-line rendering that re-parses to the same tree:
/// `(S(NP(PRP you))(VP(VBP are)))`.
impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        if let Some(w) = &self.word {
            write!(f, " {w}")?;
        }
        for c in &self.children {
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    /// 1-based offset of the current position.
    fn offset(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_whitespace(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn read_token(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b == b'(' || b == b')' || b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        // Tokens are delimited by ASCII structure; any UTF-8 content between
        // delimiters stays intact.
        std::str::from_utf8(&self.bytes[start..self.pos]).expect("token spans UTF-8 boundaries")
    }

    fn parse_node(&mut self) -> Result<ParseTree, TreeError> {
        debug_assert_eq!(self.peek(), Some(b'('));
        self.pos += 1;
        self.skip_whitespace();
        let label_offset = self.offset();
        let label_text = self.read_token();
        if label_text.is_empty() {
            return Err(TreeError::EmptyLabel {
                offset: label_offset,
            });
        }
        let label = Token::new(label_text)?;
        let mut children = Vec::new();
        let mut word: Option<String> = None;
        loop {
            self.skip_whitespace();
            match self.peek() {
                None => return Err(TreeError::Unbalanced { offset: self.offset() }),
                Some(b')') => {
                    self.pos += 1;
                    return Ok(ParseTree {
                        label,
                        children,
                        word,
                    });
                }
                Some(b'(') => {
                    if word.is_some() {
                        return Err(TreeError::MixedNode { offset: self.offset() });
                    }
                    children.push(self.parse_node()?);
                }
                Some(_) => {
                    let offset = self.offset();
                    if word.is_some() || !children.is_empty() {
                        return Err(TreeError::MixedNode { offset });
                    }
                    word = Some(self.read_token().to_string());
                }
            }
        }
    }
}

/// Parse every tree in `text`. Returns an empty vector for all-whitespace
/// input.
pub fn parse_trees(text: &str) -> Result<Vec<ParseTree>, TreeError> {
    let mut p = Parser::new(text);
    let mut trees = Vec::new();
    loop {
        p.skip_whitespace();
        match p.peek() {
            None => return Ok(trees),
            Some(b'(') => trees.push(p.parse_node()?),
            Some(b')') => return Err(TreeError::Unbalanced { offset: p.offset() }),
            Some(_) => return Err(TreeError::StrayToken { offset: p.offset() }),
        }
    }
}

/// Punctuation part-of-speech tags removed by normalization: the symbol and
/// bracket tags plus the quote tags, as tagged in Penn-Treebank data.
pub const DEFAULT_PUNCTUATION: [&str; 11] =
    ["$", "#", "``", "''", "(", ")", ",", ".", ":", "`", "'"];

/// Controls for [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationConfig {
    /// Replace a `ROOT` wrapper by its single child (rejecting other arities).
    pub drop_root: bool,
    /// Remove leaf words, keeping only labels.
    pub strip_words: bool,
    /// Labels whose nodes (and entire subtrees) are removed.
    pub punctuation_labels: BTreeSet<String>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            drop_root: true,
            strip_words: true,
            punctuation_labels: DEFAULT_PUNCTUATION.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Normalize one sentence tree: drop the `ROOT` wrapper, prune punctuation
/// nodes, strip words (each step per `cfg`).
pub fn normalize(tree: &ParseTree, cfg: &NormalizationConfig) -> Result<ParseTree, TreeError> {
    let mut t = tree;
    if cfg.drop_root {
        // Iterate so the result never starts with a wrapper; this is what
        // makes normalization idempotent on already-wrapped input.
        while t.label.as_str() == "ROOT" {
            if t.children.len() != 1 {
                return Err(TreeError::RootShape {
                    children: t.children.len(),
                });
            }
            t = &t.children[0];
        }
    }
    if cfg.punctuation_labels.contains(t.label.as_str()) {
        return Err(TreeError::NormalizedToNothing);
    }
    Ok(normalize_inner(t, cfg))
}

fn normalize_inner(t: &ParseTree, cfg: &NormalizationConfig) -> ParseTree {
    let children = t
        .children
        .iter()
        .filter(|c| !cfg.punctuation_labels.contains(c.label.as_str()))
        .map(|c| normalize_inner(c, cfg))
        .collect();
    ParseTree {
        label: t.label.clone(),
        children,
        word: if cfg.strip_words { None } else { t.word.clone() },
    }
}

/// Whitespace-free canonical string of a word-free tree:
/// `(label child child ...)` with no separators, children in order.
/// Words, if any remain, are not rendered.
pub fn canonicalize(tree: &ParseTree) -> String {
    let mut out = String::new();
    write_canonical(tree, &mut out);
    out
}

fn write_canonical(t: &ParseTree, out: &mut String) {
    out.push('(');
    out.push_str(t.label.as_str());
    for c in &t.children {
        write_canonical(c, out);
    }
    out.push(')');
}

/// Per-document totals over raw (un-normalized) sentence trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SentenceStats {
    pub sentence_count: usize,
    /// Leaf words whose tag is not a punctuation label.
    pub word_count: usize,
}

impl SentenceStats {
    pub fn collect(trees: &[ParseTree], cfg: &NormalizationConfig) -> SentenceStats {
        fn words(t: &ParseTree, punct: &BTreeSet<String>) -> usize {
            let own = usize::from(t.word.is_some() && !punct.contains(t.label.as_str()));
            own + t.children.iter().map(|c| words(c, punct)).sum::<usize>()
        }
        SentenceStats {
            sentence_count: trees.len(),
            word_count: trees
                .iter()
                .map(|t| words(t, &cfg.punctuation_labels))
                .sum(),
        }
    }
}
