//! Scatter-matrix factors and the structure-preserving projection.
//!
//! Class structure in a term-by-document matrix is summarized by three
//! scatter matrices — within-class S_w, between-class S_b, and mixture
//! S_m — held here only through their thin factors (S_w = H_w·H_wᵀ and so
//! on), never materialized densely. The projection matrix G maps the
//! m-dimensional column space down to ℓ dimensions while preserving the
//! cluster structure: it is built from the singular value decomposition of
//! the stacked factor matrix K = [H_bᵀ; H_wᵀ], which is (k+n)×m, so the
//! whole computation stays linear in m.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::corpus::{Class, TermDocMatrix};

/// Default relative cutoff under which a singular value of K counts as
/// zero when determining its rank t.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Emitted when more projection columns are requested than K has
/// nontrivial singular values (ℓ > t).
pub const WARN_COLUMNS_EXCEED_RANK: &str = "Number of columns of G requested exceeds number of nontrivial singular values pairs of H_b^T and H_w^T";

/// Emitted after [`WARN_COLUMNS_EXCEED_RANK`] when ℓ also exceeds n; the
/// surplus columns are left zero.
pub const WARN_COLUMNS_EXCEED_N: &str = "And it exceeds the number of columns of G";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReducerError {
    #[error("matrix has no columns")]
    EmptyMatrix,
    #[error("factor matrices are all zero; no variation to preserve")]
    ZeroVariation,
    #[error("requested {requested} projection columns; must be between 1 and {max}")]
    InvalidColumnCount { requested: usize, max: usize },
    #[error("rank tolerance {value} is not positive")]
    InvalidRankTol { value: f64 },
    #[error("dimension mismatch: expected {expected} rows, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Per-class means and the overall mean of a matrix's columns.
#[derive(Debug, Clone)]
pub struct Centroids {
    /// Classes in first-appearance column order.
    pub classes: Vec<Class>,
    /// Mean column of each class, aligned with `classes`.
    pub per_class: Vec<DVector<f64>>,
    /// Mean of all columns.
    pub overall: DVector<f64>,
}

/// Column means per class and overall.
pub fn centroids(matrix: &TermDocMatrix) -> Result<Centroids, ReducerError> {
    let n = matrix.values.ncols();
    if n == 0 {
        return Err(ReducerError::EmptyMatrix);
    }
    let classes = matrix.classes();
    let per_class = classes
        .iter()
        .map(|class| {
            let mut sum = DVector::<f64>::zeros(matrix.values.nrows());
            for &j in &class.doc_indices {
                sum += matrix.values.column(j);
            }
            sum / class.size() as f64
        })
        .collect();
    let mut overall = DVector::<f64>::zeros(matrix.values.nrows());
    for j in 0..n {
        overall += matrix.values.column(j);
    }
    overall /= n as f64;
    Ok(Centroids {
        classes,
        per_class,
        overall,
    })
}

/// Thin factors of the three scatter matrices.
#[derive(Debug, Clone)]
pub struct ScatterFactors {
    /// m×n, columns grouped class by class: each document column minus its
    /// class centroid.
    pub h_w: DMatrix<f64>,
    /// m×k, column i = √n_i · (c⁽ⁱ⁾ − c).
    pub h_b: DMatrix<f64>,
    /// m×n in document order: each document column minus the overall
    /// centroid.
    pub h_m: DMatrix<f64>,
}

/// Build the scatter factors from a matrix and its centroids.
pub fn scatter_factors(matrix: &TermDocMatrix, cen: &Centroids) -> ScatterFactors {
    let m = matrix.values.nrows();
    let n = matrix.values.ncols();
    let k = cen.classes.len();

    let mut h_w = DMatrix::<f64>::zeros(m, n);
    let mut col = 0;
    for (class, centroid) in cen.classes.iter().zip(&cen.per_class) {
        for &j in &class.doc_indices {
            h_w.set_column(col, &(matrix.values.column(j) - centroid));
            col += 1;
        }
    }

    let mut h_b = DMatrix::<f64>::zeros(m, k);
    for (i, (class, centroid)) in cen.classes.iter().zip(&cen.per_class).enumerate() {
        let scale = (class.size() as f64).sqrt();
        h_b.set_column(i, &((centroid - &cen.overall) * scale));
    }

    let mut h_m = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        h_m.set_column(j, &(matrix.values.column(j) - &cen.overall));
    }

    ScatterFactors { h_w, h_b, h_m }
}

/// The m×ℓ projection together with the rank it was built from and any
/// padding warnings.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    pub g: DMatrix<f64>,
    /// Rank of the stacked factor matrix K.
    pub t: usize,
    pub warnings: Vec<String>,
}

/// Thin SVD with singular values (and their vectors) sorted descending.
/// Returns (U, σ, V) with `matrix ≈ U·diag(σ)·Vᵀ`.
fn sorted_thin_svd(matrix: DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = matrix.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).expect("finite singular values"));

    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let sigma_sorted = DVector::from_fn(order.len(), |i, _| sigma[order[i]]);
    let v_sorted = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)]);
    (u_sorted, sigma_sorted, v_sorted)
}

/// Symmetric eigendecomposition with eigenvalues (and vectors) sorted
/// descending.
fn sorted_symmetric_eigen(matrix: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values = DVector::from_fn(order.len(), |i, _| eig.eigenvalues[order[i]]);
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Compute the m×ℓ structure-preserving projection from the scatter
/// factors.
///
/// The stacked matrix K = [H_bᵀ; H_wᵀ] is decomposed as K = P·Σ·Qᵀ; its
/// rank t counts singular values above `rank_tol` times the largest. The
/// right factor W of the decomposition of P's first k rows (restricted to
/// t columns) rotates the scaled Q columns into discriminant order:
///
/// * ℓ ≤ t — G = Q(:,1:t)·diag(1/σ)·W(:,1:ℓ).
/// * ℓ > t — the first t columns are Q(:,1:t)·diag(1/σ)·W and a warning is
///   recorded; when ℓ ≤ n the remaining columns are the unscaled
///   Q(:,t+1:ℓ), otherwise a second warning is recorded and they stay
///   zero.
pub fn compute_projection(
    h_b: &DMatrix<f64>,
    h_w: &DMatrix<f64>,
    ell: usize,
    rank_tol: f64,
) -> Result<ProjectionMatrix, ReducerError> {
    let m = h_b.nrows();
    if h_w.nrows() != m {
        return Err(ReducerError::DimensionMismatch {
            expected: m,
            got: h_w.nrows(),
        });
    }
    let k = h_b.ncols();
    let n = h_w.ncols();
    if ell == 0 || ell > m {
        return Err(ReducerError::InvalidColumnCount {
            requested: ell,
            max: m,
        });
    }
    if !(rank_tol > 0.0) {
        return Err(ReducerError::InvalidRankTol { value: rank_tol });
    }

    // K = [H_bᵀ; H_wᵀ], (k+n)×m.
    let kmat = DMatrix::from_fn(k + n, m, |r, c| {
        if r < k {
            h_b[(c, r)]
        } else {
            h_w[(c, r - k)]
        }
    });
    if kmat.iter().all(|&x| x == 0.0) {
        return Err(ReducerError::ZeroVariation);
    }

    let (p, sigma, q) = sorted_thin_svd(kmat);
    let sigma_max = sigma[0];
    let t = sigma.iter().filter(|&&s| s > rank_tol * sigma_max).count();

    // Right factor of the decomposition of P's first k rows × first t
    // columns, as a full t×t orthogonal matrix (eigenvectors of P1ᵀP1 in
    // descending eigenvalue order).
    let p1 = p.view((0, 0), (k, t));
    let (_, w) = sorted_symmetric_eigen(p1.transpose() * p1);

    let mut scaled_q_t = q.columns(0, t).clone_owned();
    for j in 0..t {
        scaled_q_t.column_mut(j).scale_mut(1.0 / sigma[j]);
    }

    let mut warnings = Vec::new();
    let mut g = DMatrix::<f64>::zeros(m, ell);
    if ell <= t {
        g.copy_from(&(&scaled_q_t * w.columns(0, ell)));
    } else {
        warnings.push(WARN_COLUMNS_EXCEED_RANK.to_string());
        g.columns_mut(0, t).copy_from(&(&scaled_q_t * &w));
        if ell > n {
            warnings.push(WARN_COLUMNS_EXCEED_N.to_string());
        } else {
            g.columns_mut(t, ell - t).copy_from(&q.columns(t, ell - t));
        }
    }

    Ok(ProjectionMatrix { g, t, warnings })
}

/// Apply the projection: an ℓ×n matrix of Gᵀ·columns, with column
/// metadata preserved. The result's rows are projection coordinates, not
/// feature keys, and its columns are no longer normalized counts.
pub fn project(
    matrix: &TermDocMatrix,
    projection: &ProjectionMatrix,
) -> Result<TermDocMatrix, ReducerError> {
    if matrix.values.nrows() != projection.g.nrows() {
        return Err(ReducerError::DimensionMismatch {
            expected: projection.g.nrows(),
            got: matrix.values.nrows(),
        });
    }
    Ok(TermDocMatrix {
        values: projection.g.transpose() * &matrix.values,
        row_keys: None,
        col_meta: matrix.col_meta.clone(),
        normalized: false,
        zero_columns: matrix.zero_columns.clone(),
    })
}
