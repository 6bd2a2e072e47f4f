//! Oracles and generators for the acceptance suite. The numeric oracles
//! here deliberately take different computational routes than the library
//! (dense eigensolvers, recompute-from-scratch loops) so agreement is
//! evidence rather than tautology.

use std::path::{Path, PathBuf};
use std::process::Command;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use stylo_core::corpus::{ColumnMeta, TermDocMatrix};

pub fn stylo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stylo"))
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// A random unnormalized matrix with one class per entry of `class_sizes`,
/// columns grouped class by class. Class centers are `spread` apart so the
/// scatter structure is well-conditioned; unit noise is added per document.
pub fn random_instance(
    rng: &mut impl Rng,
    m: usize,
    class_sizes: &[usize],
    spread: f64,
) -> TermDocMatrix {
    let centers: Vec<Vec<f64>> = class_sizes
        .iter()
        .map(|_| (0..m).map(|_| rng.gen_range(-spread..spread)).collect())
        .collect();
    let n: usize = class_sizes.iter().sum();
    let mut values = DMatrix::<f64>::zeros(m, n);
    let mut col_meta = Vec::with_capacity(n);
    let mut j = 0;
    for (c, &size) in class_sizes.iter().enumerate() {
        for d in 0..size {
            for r in 0..m {
                values[(r, j)] = centers[c][r] + rng.gen_range(-1.0..1.0);
            }
            col_meta.push(ColumnMeta {
                doc_id: format!("c{c}-d{d}"),
                author: format!("c{c}"),
            });
            j += 1;
        }
    }
    TermDocMatrix {
        values,
        row_keys: None,
        col_meta,
        normalized: false,
        zero_columns: Vec::new(),
    }
}

/// Permute the columns (and their metadata) so classes interleave.
pub fn shuffle_columns(matrix: &mut TermDocMatrix, rng: &mut impl Rng) {
    let n = matrix.values.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let values = DMatrix::from_fn(matrix.values.nrows(), n, |r, c| {
        matrix.values[(r, order[c])]
    });
    let col_meta = order.iter().map(|&j| matrix.col_meta[j].clone()).collect();
    matrix.values = values;
    matrix.col_meta = col_meta;
}

/// The trace ratio tr((GᵀS_wG)⁻¹(GᵀS_bG)) with S_x = H_x·H_xᵀ.
pub fn trace_ratio(g: &DMatrix<f64>, h_b: &DMatrix<f64>, h_w: &DMatrix<f64>) -> f64 {
    let s_b = h_b * h_b.transpose();
    let s_w = h_w * h_w.transpose();
    let gw = g.transpose() * &s_w * g;
    let gb = g.transpose() * &s_b * g;
    (gw.try_inverse().expect("GᵀS_wG invertible") * gb).trace()
}

/// Sum of the `count` largest generalized eigenvalues of the pencil
/// (S_b, S_w), via Cholesky whitening and a dense symmetric eigensolver:
/// S_w = LLᵀ, then the eigenvalues of L⁻¹·S_b·L⁻ᵀ.
pub fn top_generalized_eigenvalue_sum(
    h_b: &DMatrix<f64>,
    h_w: &DMatrix<f64>,
    count: usize,
) -> f64 {
    let s_b = h_b * h_b.transpose();
    let s_w = h_w * h_w.transpose();
    let chol = s_w.cholesky().expect("S_w positive definite");
    let l = chol.l();
    let x = l.solve_lower_triangular(&s_b).expect("solve L X = S_b");
    let z = l
        .solve_lower_triangular(&x.transpose())
        .expect("solve L Z = Xᵀ");
    let sym = 0.5 * (&z + z.transpose());
    let mut values: Vec<f64> = nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    values.iter().take(count).sum()
}

/// Recompute-everything leave-one-out oracle: for every column, rebuild
/// every class centroid from scratch without that column, then take the
/// first strict distance minimum. Classes are re-derived here from the
/// column metadata. Returns (predicted class, distances) per column.
pub fn naive_loo(matrix: &TermDocMatrix) -> Vec<(usize, Vec<f64>)> {
    let values = &matrix.values;
    let mut labels: Vec<&str> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (j, meta) in matrix.col_meta.iter().enumerate() {
        match labels.iter().position(|&l| l == meta.author) {
            Some(i) => members[i].push(j),
            None => {
                labels.push(&meta.author);
                members.push(vec![j]);
            }
        }
    }

    (0..values.ncols())
        .map(|j| {
            let truth = members.iter().position(|m| m.contains(&j)).unwrap();
            let distances: Vec<f64> = members
                .iter()
                .enumerate()
                .map(|(i, docs)| {
                    let kept: Vec<usize> = docs
                        .iter()
                        .copied()
                        .filter(|&jj| !(i == truth && jj == j))
                        .collect();
                    if kept.is_empty() {
                        return f64::INFINITY;
                    }
                    let mut sum = DVector::<f64>::zeros(values.nrows());
                    for &jj in &kept {
                        sum += values.column(jj);
                    }
                    let centroid = sum / kept.len() as f64;
                    (values.column(j) - centroid).norm()
                })
                .collect();
            let mut best = 0;
            for (i, &d) in distances.iter().enumerate() {
                if d < distances[best] {
                    best = i;
                }
            }
            (best, distances)
        })
        .collect()
}
