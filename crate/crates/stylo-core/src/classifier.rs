//! Leave-one-out nearest-centroid classification.
//!
//! Each document column is held out in turn: its own class centroid is
//! recomputed from the remaining class members, every other class keeps its
//! centroid, and the document is assigned to the class whose centroid is
//! nearest in Euclidean distance (ties to the lowest class index).
//! Classification can run in the original column space or in a reduced
//! space — either one shared projection computed from all columns, or a
//! stricter variant that refits the projection for every held-out column so
//! the held-out document never influences the map it is judged by.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::corpus::{Class, ColumnMeta, TermDocMatrix};
use crate::reducer::{
    centroids, compute_projection, project, scatter_factors, ReducerError, DEFAULT_RANK_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("matrix has no documents")]
    NoDocuments,
    #[error("projected classification requires a target dimension")]
    EllRequired,
    #[error("unprojected classification takes no target dimension")]
    EllForbidden,
    #[error("dimension {ell} outside 1..={max} for this vocabulary")]
    DimOutOfRange { ell: usize, max: usize },
    #[error("per-dimension runs require a projection mode")]
    ProjectionRequired,
    #[error("alias '{author}' maps to itself")]
    AliasSelf { author: String },
    #[error("alias target '{via}' is itself aliased; only single-step aliases are allowed")]
    AliasChain { via: String },
    #[error("dimension reduction failed")]
    Reducer(#[from] ReducerError),
}

/// How distances are computed during leave-one-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Original column space; no dimension reduction.
    None,
    /// One projection computed from all columns, shared by every held-out
    /// run; note the held-out column contributes to the projection it is
    /// later judged against.
    Shared,
    /// Projection recomputed per held-out column from the remaining
    /// columns only.
    Refit,
}

#[derive(Debug, Clone, Copy)]
pub struct LooConfig {
    pub projection: ProjectionMode,
    /// Target dimension; required exactly when `projection` is not
    /// [`ProjectionMode::None`].
    pub ell: Option<usize>,
    pub rank_tol: f64,
}

impl LooConfig {
    /// Full-dimensional classification.
    pub fn full() -> Self {
        LooConfig {
            projection: ProjectionMode::None,
            ell: None,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }

    /// Classification in an `ell`-dimensional reduced space.
    pub fn reduced(mode: ProjectionMode, ell: usize) -> Self {
        LooConfig {
            projection: mode,
            ell: Some(ell),
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// One held-out document's outcome. Class fields index into
/// [`LooResult::classes`].
#[derive(Debug, Clone)]
pub struct Prediction {
    pub doc_id: String,
    pub true_class: usize,
    pub predicted_class: usize,
    /// Distance to each class centroid; infinite where the centroid is
    /// undefined (a singleton class judging its own member).
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LooResult {
    /// Class labels in first-appearance column order.
    pub classes: Vec<String>,
    /// One prediction per document, in column order.
    pub predictions: Vec<Prediction>,
    pub error_count: usize,
    /// `confusion[t][p]` counts documents of class t predicted as p.
    pub confusion: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl LooResult {
    /// Errors remaining after treating alias pairs as correct: a
    /// prediction also counts as correct when the true class aliases to
    /// the predicted one or vice versa.
    pub fn adjusted_error_count(&self, alias: &AliasMap) -> usize {
        self.predictions
            .iter()
            .filter(|p| {
                let truth = self.classes[p.true_class].as_str();
                let predicted = self.classes[p.predicted_class].as_str();
                let correct = p.true_class == p.predicted_class
                    || alias.get(truth) == Some(predicted)
                    || alias.get(predicted) == Some(truth);
                !correct
            })
            .count()
    }
}

/// Author equivalences applied when adjusting error counts: one-step,
/// acyclic `from → to` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasMap {
    pairs: BTreeMap<String, String>,
}

impl AliasMap {
    pub fn empty() -> Self {
        AliasMap::default()
    }

    pub fn new(
        pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ClassifierError> {
        let pairs: BTreeMap<String, String> = pairs.into_iter().collect();
        for (from, to) in &pairs {
            if from == to {
                return Err(ClassifierError::AliasSelf {
                    author: from.clone(),
                });
            }
            if pairs.contains_key(to) {
                return Err(ClassifierError::AliasChain { via: to.clone() });
            }
        }
        Ok(AliasMap { pairs })
    }

    pub fn get(&self, author: &str) -> Option<&str> {
        self.pairs.get(author).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

/// Index of the smallest distance; earlier indices win ties.
fn argmin(distances: &[f64]) -> usize {
    let mut best = 0;
    for (i, &d) in distances.iter().enumerate().skip(1) {
        if d < distances[best] {
            best = i;
        }
    }
    best
}

fn singleton_warning(label: &str) -> String {
    format!(
        "class '{label}' has a single document; its own held-out centroid is undefined and that document can never be assigned to it"
    )
}

/// Leave-one-out pass over a value matrix: one distance vector and
/// prediction per column. `classes` must partition the columns.
fn loo_pass(
    values: &DMatrix<f64>,
    classes: &[Class],
    col_meta: &[ColumnMeta],
    warnings: &mut Vec<String>,
) -> Vec<Prediction> {
    let d = values.nrows();
    let class_of: BTreeMap<usize, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.doc_indices.iter().map(move |&j| (j, i)))
        .collect();
    // Per-class column sums, accumulated in column order.
    let sums: Vec<DVector<f64>> = classes
        .iter()
        .map(|c| {
            let mut sum = DVector::<f64>::zeros(d);
            for &j in &c.doc_indices {
                sum += values.column(j);
            }
            sum
        })
        .collect();
    for class in classes {
        if class.size() == 1 {
            let w = singleton_warning(&class.label);
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
    }

    (0..values.ncols())
        .map(|j| {
            let truth = class_of[&j];
            let v = values.column(j);
            let distances: Vec<f64> = classes
                .iter()
                .enumerate()
                .map(|(i, class)| {
                    if i == truth {
                        if class.size() == 1 {
                            return f64::INFINITY;
                        }
                        // Held-out class: re-sum the remaining members in
                        // column order.
                        let mut sum = DVector::<f64>::zeros(d);
                        for &jj in &class.doc_indices {
                            if jj != j {
                                sum += values.column(jj);
                            }
                        }
                        let centroid = sum / (class.size() - 1) as f64;
                        (v - centroid).norm()
                    } else {
                        let centroid = &sums[i] / class.size() as f64;
                        (v - centroid).norm()
                    }
                })
                .collect();
            Prediction {
                doc_id: col_meta[j].doc_id.clone(),
                true_class: truth,
                predicted_class: argmin(&distances),
                distances,
            }
        })
        .collect()
}

fn push_unique(warnings: &mut Vec<String>, message: String) {
    if !warnings.contains(&message) {
        warnings.push(message);
    }
}

/// Classify every document by leave-one-out nearest centroid.
pub fn loo_classify(
    matrix: &TermDocMatrix,
    cfg: &LooConfig,
) -> Result<LooResult, ClassifierError> {
    let n = matrix.values.ncols();
    if n == 0 {
        return Err(ClassifierError::NoDocuments);
    }
    match (cfg.projection, cfg.ell) {
        (ProjectionMode::None, Some(_)) => return Err(ClassifierError::EllForbidden),
        (ProjectionMode::Shared | ProjectionMode::Refit, None) => {
            return Err(ClassifierError::EllRequired)
        }
        _ => {}
    }

    let classes = matrix.classes();
    let labels: Vec<String> = classes.iter().map(|c| c.label.clone()).collect();
    let mut warnings = Vec::new();

    let predictions = match cfg.projection {
        ProjectionMode::None => loo_pass(&matrix.values, &classes, &matrix.col_meta, &mut warnings),
        ProjectionMode::Shared => {
            let ell = cfg.ell.expect("validated above");
            let cen = centroids(matrix)?;
            let sf = scatter_factors(matrix, &cen);
            let proj = compute_projection(&sf.h_b, &sf.h_w, ell, cfg.rank_tol)?;
            for w in &proj.warnings {
                push_unique(&mut warnings, w.clone());
            }
            let reduced = project(matrix, &proj)?;
            loo_pass(&reduced.values, &classes, &reduced.col_meta, &mut warnings)
        }
        ProjectionMode::Refit => {
            refit_loo(matrix, &classes, cfg, &mut warnings)?
        }
    };

    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    let mut error_count = 0;
    for p in &predictions {
        confusion[p.true_class][p.predicted_class] += 1;
        if p.true_class != p.predicted_class {
            error_count += 1;
        }
    }
    Ok(LooResult {
        classes: labels,
        predictions,
        error_count,
        confusion,
        warnings,
    })
}

/// Leave-one-out where the projection itself is refit for each held-out
/// column from the remaining columns.
fn refit_loo(
    matrix: &TermDocMatrix,
    classes: &[Class],
    cfg: &LooConfig,
    warnings: &mut Vec<String>,
) -> Result<Vec<Prediction>, ClassifierError> {
    let ell = cfg.ell.expect("validated by caller");
    let (m, n) = matrix.values.shape();
    let mut predictions = Vec::with_capacity(n);
    for j in 0..n {
        let truth = classes
            .iter()
            .position(|c| c.doc_indices.contains(&j))
            .expect("classes partition the columns");

        // The matrix without column j.
        let keep: Vec<usize> = (0..n).filter(|&jj| jj != j).collect();
        let mut values = DMatrix::<f64>::zeros(m, n - 1);
        for (col, &jj) in keep.iter().enumerate() {
            values.set_column(col, &matrix.values.column(jj));
        }
        let reduced = TermDocMatrix {
            values,
            row_keys: None,
            col_meta: keep.iter().map(|&jj| matrix.col_meta[jj].clone()).collect(),
            normalized: matrix.normalized,
            zero_columns: vec![],
        };

        let cen = centroids(&reduced)?;
        let sf = scatter_factors(&reduced, &cen);
        let proj = compute_projection(&sf.h_b, &sf.h_w, ell, cfg.rank_tol)?;
        for w in &proj.warnings {
            push_unique(warnings, w.clone());
        }

        let projected = proj.g.transpose() * &reduced.values;
        let held_out = proj.g.transpose() * matrix.values.column(j);

        // Centroids per original class, from the projected remaining
        // columns (summed in column order).
        let distances: Vec<f64> = classes
            .iter()
            .map(|class| {
                let members: Vec<usize> = class
                    .doc_indices
                    .iter()
                    .filter(|&&jj| jj != j)
                    .map(|&jj| keep.iter().position(|&x| x == jj).expect("kept column"))
                    .collect();
                if members.is_empty() {
                    push_unique(warnings, singleton_warning(&class.label));
                    return f64::INFINITY;
                }
                let mut sum = DVector::<f64>::zeros(ell);
                for &col in &members {
                    sum += projected.column(col);
                }
                let centroid = sum / members.len() as f64;
                (&held_out - centroid).norm()
            })
            .collect();

        predictions.push(Prediction {
            doc_id: matrix.col_meta[j].doc_id.clone(),
            true_class: truth,
            predicted_class: argmin(&distances),
            distances,
        });
    }
    Ok(predictions)
}

/// One full-dimension run plus one reduced run per requested dimension.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Unprojected leave-one-out result.
    pub full: LooResult,
    /// `(ell, result)` pairs in the order requested.
    pub per_ell: Vec<(usize, LooResult)>,
}

/// Run leave-one-out at full dimension and at each dimension in `dims`
/// (each must lie in `1..=m-1`) under the given projection mode.
pub fn sweep(
    matrix: &TermDocMatrix,
    dims: &[usize],
    mode: ProjectionMode,
    rank_tol: f64,
) -> Result<SweepResult, ClassifierError> {
    if mode == ProjectionMode::None && !dims.is_empty() {
        return Err(ClassifierError::ProjectionRequired);
    }
    let m = matrix.values.nrows();
    for &ell in dims {
        if ell == 0 || ell >= m {
            return Err(ClassifierError::DimOutOfRange {
                ell,
                max: m.saturating_sub(1),
            });
        }
    }
    let full = loo_classify(
        matrix,
        &LooConfig {
            projection: ProjectionMode::None,
            ell: None,
            rank_tol,
        },
    )?;
    let mut per_ell = Vec::with_capacity(dims.len());
    for &ell in dims {
        let result = loo_classify(
            matrix,
            &LooConfig {
                projection: mode,
                ell: Some(ell),
                rank_tol,
            },
        )?;
        per_ell.push((ell, result));
    }
    Ok(SweepResult { full, per_ell })
}
