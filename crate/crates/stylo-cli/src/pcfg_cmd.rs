//! `stylo pcfg`: score candidate parses against a grammar, pick the
//! most probable one, or sample fresh trees.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use stylo_core::pcfg::{best_parse, load_grammar, score_tree, Grammar, SampleOptions, Sampler};
use stylo_core::treebank::{parse_trees, ParseTree};

#[derive(Debug, Subcommand)]
pub enum PcfgCommand {
    /// Print the probability of each tree under the grammar.
    Score(ScoreArgs),
    /// Print the 1-based index and probability of the most probable tree.
    Best(ScoreArgs),
    /// Sample trees from the grammar into a file.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Grammar file, one rule per line: `LHS -> RHS [p]`.
    #[arg(long)]
    pub grammar: PathBuf,
    /// Bracketed trees to score.
    #[arg(long)]
    pub trees: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Grammar file, one rule per line: `LHS -> RHS [p]`.
    #[arg(long)]
    pub grammar: PathBuf,
    /// How many trees to draw.
    #[arg(long)]
    pub count: usize,
    /// RNG seed; equal seeds reproduce the same trees.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum tree height in edges before a draw is rejected.
    #[arg(long, default_value_t = 30)]
    pub max_depth: usize,
    /// File the sampled trees are written to, one per line.
    #[arg(long)]
    pub out: PathBuf,
}

fn read_grammar(path: &Path) -> Result<Grammar> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading grammar {}", path.display()))?;
    let grammar =
        load_grammar(&text).with_context(|| format!("parsing grammar {}", path.display()))?;
    for warning in grammar.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(grammar)
}

fn read_trees(path: &Path) -> Result<Vec<ParseTree>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading trees {}", path.display()))?;
    let trees = parse_trees(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(trees)
}

/// Render a probability in minimal scientific notation (`2.16e-6`, not
/// `2.1600000000000002e-6`): round the mantissa to 11 significant
/// decimals, then drop its trailing zeros.
pub fn format_prob(p: f64) -> String {
    let s = format!("{p:.11e}");
    match s.split_once('e') {
        Some((mantissa, exponent)) => {
            let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
            format!("{mantissa}e{exponent}")
        }
        None => s,
    }
}

pub fn run(command: PcfgCommand) -> Result<()> {
    match command {
        PcfgCommand::Score(args) => {
            let grammar = read_grammar(&args.grammar)?;
            let trees = read_trees(&args.trees)?;
            let mut lines = String::new();
            for (i, tree) in trees.iter().enumerate() {
                let scored = score_tree(&grammar, tree)
                    .with_context(|| format!("scoring tree {}", i + 1))?;
                lines.push_str(&format!("{}\t{}\n", i + 1, format_prob(scored.prob())));
            }
            print!("{lines}");
        }
        PcfgCommand::Best(args) => {
            let grammar = read_grammar(&args.grammar)?;
            let trees = read_trees(&args.trees)?;
            let (index, scored) = best_parse(&grammar, &trees)?;
            println!("{}\t{}", index + 1, format_prob(scored.prob()));
        }
        PcfgCommand::Sample(args) => {
            let grammar = read_grammar(&args.grammar)?;
            let options = SampleOptions {
                max_depth: args.max_depth,
                ..SampleOptions::default()
            };
            let mut sampler = Sampler::new(&grammar, args.seed, options)?;
            let mut out = String::new();
            for i in 0..args.count {
                let tree = sampler
                    .next_tree()
                    .with_context(|| format!("sampling tree {}", i + 1))?;
                out.push_str(&format!("{tree}\n"));
            }
            fs::write(&args.out, out)
                .with_context(|| format!("writing {}", args.out.display()))?;
            eprintln!("wrote {} trees to {}", args.count, args.out.display());
        }
    }
    Ok(())
}
