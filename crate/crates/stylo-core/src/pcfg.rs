//! Probabilistic context-free grammars: loading, tree scoring, parse
//! selection among candidates, and seeded sampling of synthetic sentences.
//!
//! Grammar files are line-oriented UTF-8 text:
//!
//! ```text
//! # rules are LHS -> symbols [probability]
//! S -> NP VP [0.80]
//! Noun -> "flight" [0.30]
//! ```
//!
//! Quoted symbols are terminal words, unquoted symbols are nonterminals, and
//! `#` starts a comment (outside quotes). A right-hand side is either a
//! nonempty sequence of nonterminals or a single terminal — the lexical form
//! that appears in trees as `(Noun flight)`. The start symbol is the first
//! rule's left-hand side. Probabilities are conditional on the left-hand
//! side; groups that do not sum to 1 draw a load warning but score exactly
//! as written. Sampling, by contrast, renormalizes each group and refuses
//! grammars whose groups are further than a tolerance from 1.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::treebank::{ParseTree, Token, TreeError};

/// Tolerated deviation of a per-lhs probability sum from 1 before
/// [`load_grammar`] records a warning.
pub const SUM_WARN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcfgError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate rule {rule}")]
    DuplicateRule { line: usize, rule: String },
    #[error("line {line}: probability {value} outside (0, 1]")]
    InvalidProbability { line: usize, value: f64 },
    #[error("grammar has no rules")]
    EmptyGrammar,
    #[error("no rule {lhs} -> {rhs} in grammar (node {path})")]
    NoRule {
        lhs: String,
        rhs: String,
        path: String,
    },
    #[error("no candidate parses given")]
    NoCandidates,
    #[error("probabilities for '{lhs}' sum to {sum:.4}; sampling needs each group within {tolerance} of 1")]
    GroupSumOutOfTolerance {
        lhs: String,
        sum: f64,
        tolerance: f64,
    },
    #[error("nonterminal '{symbol}' appears on a right-hand side but has no rules")]
    UndefinedNonterminal { symbol: String },
    #[error("rule {rule} mixes terminals and nonterminals; sampling cannot realize it as a tree")]
    UnsupportedRhs { rule: String },
    #[error("no derivation within the depth limit after {attempts} attempts")]
    Divergent { attempts: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// One grammar symbol: a nonterminal label or a terminal word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    NonTerminal(Token),
    Terminal(String),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::NonTerminal(t) => f.write_str(t.as_str()),
            Symbol::Terminal(w) => write!(f, "\"{w}\""),
        }
    }
}

/// A production `lhs -> rhs` with probability `P(rhs | lhs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub lhs: Token,
    pub rhs: Vec<Symbol>,
    pub prob: f64,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        write!(f, " [{}]", self.prob)
    }
}

/// A loaded grammar: rules in file order, indexed by left-hand side and by
/// the full `(lhs, rhs)` pair (which loading guarantees is unique).
#[derive(Debug, Clone)]
pub struct Grammar {
    rules: Vec<Rule>,
    start: Token,
    by_lhs: BTreeMap<Token, Vec<usize>>,
    by_pair: BTreeMap<(Token, Vec<Symbol>), usize>,
    warnings: Vec<String>,
}

impl Grammar {
    /// Build a grammar from rules (first rule's lhs is the start symbol),
    /// applying the same uniqueness checks and sum warnings as
    /// [`load_grammar`]. Line numbers in errors refer to rule positions.
    pub fn new(rules: Vec<Rule>) -> Result<Self, PcfgError> {
        Self::assemble(rules.into_iter().map(|r| (r, 0)).collect())
    }

    fn assemble(numbered: Vec<(Rule, usize)>) -> Result<Self, PcfgError> {
        if numbered.is_empty() {
            return Err(PcfgError::EmptyGrammar);
        }
        let mut rules = Vec::with_capacity(numbered.len());
        let mut by_lhs: BTreeMap<Token, Vec<usize>> = BTreeMap::new();
        let mut by_pair = BTreeMap::new();
        for (rule, line) in numbered {
            let idx = rules.len();
            if by_pair
                .insert((rule.lhs.clone(), rule.rhs.clone()), idx)
                .is_some()
            {
                return Err(PcfgError::DuplicateRule {
                    line,
                    rule: rule.to_string(),
                });
            }
            by_lhs.entry(rule.lhs.clone()).or_default().push(idx);
            rules.push(rule);
        }
        let start = rules[0].lhs.clone();

        // Warn once per left-hand side whose probabilities stray from 1,
        // in first-appearance order.
        let mut warnings = Vec::new();
        let mut seen: Vec<&Token> = Vec::new();
        for rule in &rules {
            if seen.contains(&&rule.lhs) {
                continue;
            }
            seen.push(&rule.lhs);
            let sum: f64 = by_lhs[&rule.lhs].iter().map(|&i| rules[i].prob).sum();
            if (sum - 1.0).abs() > SUM_WARN_TOLERANCE {
                warnings.push(format!(
                    "rule probabilities for '{}' sum to {sum:.4}, not 1",
                    rule.lhs
                ));
            }
        }

        Ok(Grammar {
            rules,
            start,
            by_lhs,
            by_pair,
            warnings,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> &Token {
        &self.start
    }

    /// Load-time warnings (per-lhs probability sums off 1).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Rules expanding `lhs`, in file order.
    pub fn rules_for(&self, lhs: &Token) -> impl Iterator<Item = &Rule> {
        self.by_lhs
            .get(lhs)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.rules[i])
    }

    /// Exact `(lhs, rhs)` lookup.
    pub fn rule_index(&self, lhs: &Token, rhs: &[Symbol]) -> Option<usize> {
        self.by_pair.get(&(lhs.clone(), rhs.to_vec())).copied()
    }
}

/// Strip an unquoted `#` comment from a line.
fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_symbol(token: &str, line: usize) -> Result<Symbol, PcfgError> {
    let syntax = |message: String| PcfgError::Syntax { line, message };
    if let Some(rest) = token.strip_prefix('"') {
        let word = rest
            .strip_suffix('"')
            .filter(|w| !w.is_empty() && !w.contains('"'))
            .ok_or_else(|| syntax(format!("malformed terminal {token}")))?;
        Ok(Symbol::Terminal(word.to_string()))
    } else if token.contains('"') {
        Err(syntax(format!("stray quote in symbol {token}")))
    } else {
        let t = Token::new(token)
            .map_err(|e| syntax(format!("bad nonterminal {token}: {e}")))?;
        Ok(Symbol::NonTerminal(t))
    }
}

/// Parse a grammar from text. Errors carry 1-based line numbers; per-lhs
/// probability sums off 1 become warnings on the returned grammar.
pub fn load_grammar(text: &str) -> Result<Grammar, PcfgError> {
    let mut numbered = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let syntax = |message: String| PcfgError::Syntax { line, message };
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (lhs_text, rest) = content
            .split_once("->")
            .ok_or_else(|| syntax("expected 'LHS -> symbols [p]'".into()))?;
        let lhs = Token::new(lhs_text.trim())
            .map_err(|e| syntax(format!("bad left-hand side: {e}")))?;

        let rest = rest.trim();
        let (rhs_text, prob_text) = rest
            .rsplit_once('[')
            .ok_or_else(|| syntax("missing [probability]".into()))?;
        let prob_text = prob_text
            .strip_suffix(']')
            .ok_or_else(|| syntax("missing ']' after probability".into()))?;
        let prob: f64 = prob_text
            .trim()
            .parse()
            .map_err(|_| syntax(format!("unreadable probability {prob_text:?}")))?;
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(PcfgError::InvalidProbability { line, value: prob });
        }

        let rhs: Vec<Symbol> = rhs_text
            .split_whitespace()
            .map(|tok| parse_symbol(tok, line))
            .collect::<Result<_, _>>()?;
        if rhs.is_empty() {
            return Err(syntax("empty right-hand side".into()));
        }
        let terminals = rhs
            .iter()
            .filter(|s| matches!(s, Symbol::Terminal(_)))
            .count();
        if terminals > 0 && rhs.len() > 1 {
            return Err(syntax(
                "right-hand side must be all nonterminals or one terminal".into(),
            ));
        }

        numbered.push((Rule { lhs, rhs, prob }, line));
    }
    Grammar::assemble(numbered)
}

/// A tree together with its derivation probability under a grammar.
#[derive(Debug, Clone)]
pub struct ScoredTree {
    pub tree: ParseTree,
    /// Natural log of the product of applied rule probabilities.
    pub log_prob: f64,
    /// Applied rules with multiplicities, in grammar order.
    pub rule_trace: Vec<(Rule, usize)>,
}

impl ScoredTree {
    /// The linear probability `exp(log_prob)`.
    pub fn prob(&self) -> f64 {
        self.log_prob.exp()
    }
}

fn node_rhs(t: &ParseTree) -> Vec<Symbol> {
    if let Some(w) = t.word() {
        vec![Symbol::Terminal(w.to_string())]
    } else {
        t.children()
            .iter()
            .map(|c| Symbol::NonTerminal(c.label().clone()))
            .collect()
    }
}

/// Score a tree as a derivation: every node must match a grammar rule
/// exactly (label vs lhs, children labels or leaf word vs rhs), and the
/// probability is the product of the matched rules' probabilities.
pub fn score_tree(grammar: &Grammar, tree: &ParseTree) -> Result<ScoredTree, PcfgError> {
    fn walk(
        g: &Grammar,
        t: &ParseTree,
        path: &mut String,
        log_prob: &mut f64,
        trace: &mut BTreeMap<usize, usize>,
    ) -> Result<(), PcfgError> {
        let rhs = node_rhs(t);
        let idx = g.rule_index(t.label(), &rhs).ok_or_else(|| {
            let rhs_text = if rhs.is_empty() {
                "(nothing: bare leaf)".to_string()
            } else {
                rhs.iter()
                    .map(Symbol::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            PcfgError::NoRule {
                lhs: t.label().to_string(),
                rhs: rhs_text,
                path: path.clone(),
            }
        })?;
        *log_prob += g.rules()[idx].prob.ln();
        *trace.entry(idx).or_insert(0) += 1;
        let len = path.len();
        for (i, c) in t.children().iter().enumerate() {
            path.push_str(&format!("/{}[{i}]", c.label()));
            walk(g, c, path, log_prob, trace)?;
            path.truncate(len);
        }
        Ok(())
    }

    let mut path = tree.label().to_string();
    let mut log_prob = 0.0;
    let mut trace = BTreeMap::new();
    walk(grammar, tree, &mut path, &mut log_prob, &mut trace)?;
    Ok(ScoredTree {
        tree: tree.clone(),
        log_prob,
        rule_trace: trace
            .into_iter()
            .map(|(idx, mult)| (grammar.rules()[idx].clone(), mult))
            .collect(),
    })
}

/// Score every candidate and return the most probable one with its 0-based
/// index; ties go to the earliest candidate. Any unscorable candidate is an
/// error.
pub fn best_parse(
    grammar: &Grammar,
    candidates: &[ParseTree],
) -> Result<(usize, ScoredTree), PcfgError> {
    let mut best: Option<(usize, ScoredTree)> = None;
    for (i, t) in candidates.iter().enumerate() {
        let scored = score_tree(grammar, t)?;
        let better = match &best {
            None => true,
            Some((_, b)) => scored.log_prob > b.log_prob,
        };
        if better {
            best = Some((i, scored));
        }
    }
    best.ok_or(PcfgError::NoCandidates)
}

/// Knobs for [`Sampler`]. `max_depth` bounds tree height in edges;
/// derivations that exceed it are rejected and redrawn, up to
/// `max_attempts` consecutive rejections per tree.
#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    pub max_depth: usize,
    pub max_attempts: usize,
    /// How far per-lhs probability sums may stray from 1 (they are
    /// renormalized internally either way).
    pub sum_tolerance: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            max_depth: 30,
            max_attempts: 100,
            sum_tolerance: 0.02,
        }
    }
}

/// Seeded top-down sampler over a grammar. One sampler yields a
/// reproducible stream of trees for a given `(grammar, seed, options)`.
#[derive(Debug)]
pub struct Sampler<'g> {
    grammar: &'g Grammar,
    /// Per-rule normalized probability, grouped as `by_lhs`.
    normalized: BTreeMap<Token, Vec<(usize, f64)>>,
    rng: ChaCha8Rng,
    options: SampleOptions,
}

struct TooDeep;

impl<'g> Sampler<'g> {
    pub fn new(
        grammar: &'g Grammar,
        seed: u64,
        options: SampleOptions,
    ) -> Result<Self, PcfgError> {
        let mut normalized = BTreeMap::new();
        for (lhs, indices) in &grammar.by_lhs {
            let sum: f64 = indices.iter().map(|&i| grammar.rules[i].prob).sum();
            if (sum - 1.0).abs() > options.sum_tolerance {
                return Err(PcfgError::GroupSumOutOfTolerance {
                    lhs: lhs.to_string(),
                    sum,
                    tolerance: options.sum_tolerance,
                });
            }
            let group = indices
                .iter()
                .map(|&i| (i, grammar.rules[i].prob / sum))
                .collect();
            normalized.insert(lhs.clone(), group);
        }
        for rule in &grammar.rules {
            let terminals = rule
                .rhs
                .iter()
                .filter(|s| matches!(s, Symbol::Terminal(_)))
                .count();
            if terminals > 0 && rule.rhs.len() > 1 {
                return Err(PcfgError::UnsupportedRhs {
                    rule: rule.to_string(),
                });
            }
            for sym in &rule.rhs {
                if let Symbol::NonTerminal(nt) = sym {
                    if !grammar.by_lhs.contains_key(nt) {
                        return Err(PcfgError::UndefinedNonterminal {
                            symbol: nt.to_string(),
                        });
                    }
                }
            }
        }
        Ok(Sampler {
            grammar,
            normalized,
            rng: ChaCha8Rng::seed_from_u64(seed),
            options,
        })
    }

    /// Draw the next tree. Depth-limit rejections consume randomness, so
    /// the stream stays reproducible even across rejected attempts.
    pub fn next_tree(&mut self) -> Result<ParseTree, PcfgError> {
        for _ in 0..self.options.max_attempts {
            match self.expand(&self.grammar.start.clone(), 0) {
                Ok(tree) => return Ok(tree),
                Err(TooDeep) => continue,
            }
        }
        Err(PcfgError::Divergent {
            attempts: self.options.max_attempts,
        })
    }

    fn expand(&mut self, lhs: &Token, depth: usize) -> Result<ParseTree, TooDeep> {
        let group = &self.normalized[lhs];
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut chosen = group[group.len() - 1].0;
        for &(idx, p) in group {
            acc += p;
            if u < acc {
                chosen = idx;
                break;
            }
        }
        let rule = &self.grammar.rules[chosen];
        if let [Symbol::Terminal(word)] = rule.rhs.as_slice() {
            return Ok(ParseTree::word_leaf(lhs.clone(), word.clone()));
        }
        if depth + 1 > self.options.max_depth {
            return Err(TooDeep);
        }
        let symbols: Vec<Token> = rule
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::NonTerminal(nt) => nt.clone(),
                // Sampler::new rejected mixed right-hand sides.
                Symbol::Terminal(_) => unreachable!("mixed rhs rejected at construction"),
            })
            .collect();
        let children = symbols
            .iter()
            .map(|nt| self.expand(nt, depth + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ParseTree::node(lhs.clone(), children))
    }
}

/// One-shot convenience: a single tree from `(grammar, seed)` with the
/// default attempt budget and sum tolerance.
pub fn sample_tree(grammar: &Grammar, seed: u64, max_depth: usize) -> Result<ParseTree, PcfgError> {
    Sampler::new(
        grammar,
        seed,
        SampleOptions {
            max_depth,
            ..SampleOptions::default()
        },
    )?
    .next_tree()
}
