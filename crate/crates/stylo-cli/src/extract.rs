//! `stylo extract`: per-document feature-count artifacts and an
//! author-level summary table.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use stylo_core::corpus::Corpus;
use stylo_core::features::{extract, FeatureSpec};

use crate::manifest::{load_corpus, load_manifest};

/// Feature family selector shared by `extract` and `classify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    /// Truncated subtrees anchored at every sufficiently tall node.
    AllSubtrees,
    /// One truncated subtree per sentence, anchored at the root.
    Rooted,
    /// Label occurrence counts.
    Pos,
    /// Label occurrence counts keyed by depth level.
    PosByLevel,
}

impl FeatureKind {
    /// Combine the selector with its parameter flags into a spec;
    /// `what` names the command for error messages.
    pub fn into_spec(self, depth: Option<usize>, level: Option<usize>) -> Result<FeatureSpec> {
        match self {
            FeatureKind::AllSubtrees => {
                if level.is_some() {
                    bail!("--level does not apply to --feature all-subtrees (use --depth)");
                }
                let depth = depth.context("--feature all-subtrees requires --depth")?;
                Ok(FeatureSpec::AllSubtrees { depth })
            }
            FeatureKind::Rooted => {
                if depth.is_some() {
                    bail!("--depth does not apply to --feature rooted (use --level)");
                }
                let level = level.context("--feature rooted requires --level")?;
                Ok(FeatureSpec::RootedSubtrees { level })
            }
            FeatureKind::Pos | FeatureKind::PosByLevel => {
                if depth.is_some() || level.is_some() {
                    bail!("--depth/--level do not apply to this feature");
                }
                Ok(match self {
                    FeatureKind::Pos => FeatureSpec::PosCounts,
                    _ => FeatureSpec::PosByLevel,
                })
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Corpus manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Feature family to count.
    #[arg(long, value_enum)]
    pub feature: FeatureKind,
    /// Truncation depth for all-subtrees.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Truncation level for rooted subtrees.
    #[arg(long)]
    pub level: Option<usize>,
    /// Directory for the per-document count files.
    #[arg(long, default_value = "counts")]
    pub out_dir: PathBuf,
}

fn artifact_name(doc_id: &str) -> String {
    let safe: String = doc_id
        .chars()
        .map(|c| if c == '/' || c == '\\' { '_' } else { c })
        .collect();
    format!("{safe}.counts.txt")
}

/// One `<count>\t<key>` line per distinct key, keys in lexicographic
/// order.
fn render_counts(counts: &stylo_core::features::FeatureCounts) -> String {
    let mut out = String::new();
    for (key, count) in counts.iter() {
        out.push_str(&format!("{count}\t{key}\n"));
    }
    out
}

fn author_summary(corpus: &Corpus, spec: &FeatureSpec) -> String {
    let mut out = String::from("author\tdocs\tsentences\twords\tdistinct_subtrees\ttotal_subtrees\n");
    for class in corpus.classes() {
        let mut sentences = 0;
        let mut words = 0;
        let mut counts = stylo_core::features::FeatureCounts::new();
        for &j in &class.doc_indices {
            let doc = &corpus.documents()[j];
            sentences += doc.stats().sentence_count;
            words += doc.stats().word_count;
            counts.merge_from(&extract(doc.trees(), spec));
        }
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            class.label,
            class.size(),
            sentences,
            words,
            counts.distinct(),
            counts.total()
        ));
    }
    out
}

pub fn run(args: ExtractArgs) -> Result<()> {
    let spec = args.feature.into_spec(args.depth, args.level)?;
    let (manifest, base) = load_manifest(&args.manifest)?;
    let (corpus, _) = load_corpus(&manifest, &base)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for doc in corpus.documents() {
        let counts = extract(doc.trees(), &spec);
        let path = args.out_dir.join(artifact_name(doc.doc_id()));
        fs::write(&path, render_counts(&counts))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", author_summary(&corpus, &spec));
    eprintln!(
        "wrote {} count files to {}",
        corpus.len(),
        args.out_dir.display()
    );
    Ok(())
}
