//! `stylo classify`: vocabulary selection, projection, leave-one-out
//! sweep, and the CSV/JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use stylo_core::classifier::{sweep, AliasMap, ProjectionMode};
use stylo_core::corpus::{author_totals, build_matrix, top_n_union};
use stylo_core::features::FeatureSpec;
use stylo_core::reducer::DEFAULT_RANK_TOL;

use crate::extract::FeatureKind;
use crate::manifest::{load_corpus, load_manifest};
use crate::report::{self, Report, ReportRow, REPORT_DIMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LooMode {
    /// One projection from all columns, shared across held-out runs.
    Paper,
    /// Projection refit per held-out column.
    Strict,
    /// No projection; distances in the full column space.
    None,
}

impl LooMode {
    fn projection(self) -> ProjectionMode {
        match self {
            LooMode::Paper => ProjectionMode::Shared,
            LooMode::Strict => ProjectionMode::Refit,
            LooMode::None => ProjectionMode::None,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Corpus manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Feature family for the vocabulary.
    #[arg(long, value_enum)]
    pub feature: FeatureKind,
    /// Truncation depth(s) for all-subtrees; one report row per value.
    #[arg(long, value_delimiter = ',')]
    pub depth: Vec<usize>,
    /// Truncation level(s) for rooted subtrees; one report row per value.
    #[arg(long, value_delimiter = ',')]
    pub level: Vec<usize>,
    /// Per-author vocabulary size(s); one report row per value.
    #[arg(long, value_delimiter = ',', required = true)]
    pub top_n: Vec<usize>,
    /// Reduced dimensions to evaluate (subset of 2,3,4,5).
    #[arg(long, value_delimiter = ',', default_values_t = REPORT_DIMS)]
    pub dims: Vec<usize>,
    /// How leave-one-out handles the projection.
    #[arg(long, value_enum, default_value = "paper")]
    pub loo_mode: LooMode,
    /// Author equivalence, FROM=TO; repeatable.
    #[arg(long)]
    pub alias: Vec<String>,
    /// Relative singular-value cutoff for the projection rank.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    /// Output prefix; writes <prefix>.csv and <prefix>.json.
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
}

/// The (spec, param) pairs this invocation reports on, in flag order.
fn specs_of(args: &ClassifyArgs) -> Result<Vec<(FeatureSpec, Option<usize>)>> {
    match args.feature {
        FeatureKind::AllSubtrees => {
            if !args.level.is_empty() {
                bail!("--level does not apply to --feature all-subtrees (use --depth)");
            }
            if args.depth.is_empty() {
                bail!("--feature all-subtrees requires --depth");
            }
            Ok(args
                .depth
                .iter()
                .map(|&d| (FeatureSpec::AllSubtrees { depth: d }, Some(d)))
                .collect())
        }
        FeatureKind::Rooted => {
            if !args.depth.is_empty() {
                bail!("--depth does not apply to --feature rooted (use --level)");
            }
            if args.level.is_empty() {
                bail!("--feature rooted requires --level");
            }
            Ok(args
                .level
                .iter()
                .map(|&l| (FeatureSpec::RootedSubtrees { level: l }, Some(l)))
                .collect())
        }
        FeatureKind::Pos | FeatureKind::PosByLevel => {
            if !args.depth.is_empty() || !args.level.is_empty() {
                bail!("--depth/--level do not apply to this feature");
            }
            let spec = match args.feature {
                FeatureKind::Pos => FeatureSpec::PosCounts,
                _ => FeatureSpec::PosByLevel,
            };
            Ok(vec![(spec, None)])
        }
    }
}

fn parse_aliases(pairs: &[String]) -> Result<AliasMap> {
    let mut parsed = Vec::new();
    for raw in pairs {
        let (from, to) = raw
            .split_once('=')
            .with_context(|| format!("alias '{raw}' must look like FROM=TO"))?;
        if from.is_empty() || to.is_empty() {
            bail!("alias '{raw}' must look like FROM=TO");
        }
        parsed.push((from.to_string(), to.to_string()));
    }
    Ok(AliasMap::new(parsed)?)
}

fn push_unique(warnings: &mut Vec<String>, message: String) {
    if !warnings.contains(&message) {
        warnings.push(message);
    }
}

pub fn run(args: ClassifyArgs) -> Result<()> {
    let specs = specs_of(&args)?;
    let alias = parse_aliases(&args.alias)?;
    for &dim in &args.dims {
        if !REPORT_DIMS.contains(&dim) {
            bail!(
                "dimension {dim} has no report column; choose from {REPORT_DIMS:?}"
            );
        }
    }
    let mut dims: Vec<usize> = Vec::new();
    for &dim in &args.dims {
        if !dims.contains(&dim) {
            dims.push(dim);
        }
    }
    let mode = args.loo_mode.projection();

    let (manifest, base) = load_manifest(&args.manifest)?;
    let (corpus, _) = load_corpus(&manifest, &base)?;

    let mut global_warnings = Vec::new();
    if mode == ProjectionMode::None && !dims.is_empty() {
        push_unique(
            &mut global_warnings,
            "projection mode 'none': per-dimension columns left empty".to_string(),
        );
    }

    let mut rows = Vec::new();
    for (spec, param) in &specs {
        let totals = author_totals(&corpus, spec);
        for &top_n in &args.top_n {
            let vocabulary = top_n_union(&totals, top_n, spec)
                .with_context(|| format!("selecting top-{top_n} vocabulary for {spec}"))?;
            let matrix = build_matrix(&corpus, &vocabulary, true);
            let m = vocabulary.len();

            let mut usable = Vec::new();
            if mode != ProjectionMode::None {
                for &dim in &dims {
                    if dim >= m {
                        push_unique(
                            &mut global_warnings,
                            format!(
                                "skipping dimension {dim} for top_n {top_n}, {spec}: vocabulary has only {m} rows"
                            ),
                        );
                    } else {
                        usable.push(dim);
                    }
                }
            }

            let swept = sweep(&matrix, &usable, mode, args.rank_tol)
                .with_context(|| format!("classifying top_n {top_n}, {spec}"))?;

            let mut row_warnings = swept.full.warnings.clone();
            let mut errs = BTreeMap::new();
            let mut adj_errs = BTreeMap::new();
            for (ell, result) in &swept.per_ell {
                errs.insert(*ell, result.error_count);
                adj_errs.insert(*ell, result.adjusted_error_count(&alias));
                for w in &result.warnings {
                    push_unique(&mut row_warnings, w.clone());
                }
            }
            rows.push(ReportRow {
                top_n,
                feature: spec.name().to_string(),
                param: *param,
                vocab_size: m,
                err_full: swept.full.error_count,
                errs,
                adj_err_full: swept.full.adjusted_error_count(&alias),
                adj_errs,
                warnings: row_warnings,
            });
        }
    }

    let report = Report {
        rows,
        warnings: global_warnings,
    };
    let (csv_path, json_path) = report::write(&report, &args.out)?;
    eprintln!(
        "wrote {} rows to {} and {}",
        report.rows.len(),
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}
