//! Dense helpers on top of `nalgebra` for the small matrices used everywhere
//! (dimension at most a few dozen).

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let s = norm2(a);
    a.iter().map(|x| x / s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| x * t).collect()
}

/// Matrix with the given vectors as rows.
pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn columns_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().copied().collect())
        .collect()
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn mat_t_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)] * v[i]).sum())
        .collect()
}

pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Determinant of the square matrix whose rows are `rows`.
pub fn det_rows(rows: &[&[f64]]) -> f64 {
    let k = rows.len();
    det(&DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = det(m);
    if !d.is_finite() || d.abs() < 1e-300 {
        return Err(Error::Singular);
    }
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// Orthonormal basis (as columns of an `n x k` matrix) of the span of the
/// given `k` vectors in `R^n`.
pub fn orthonormal_columns(vectors: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    let k = vectors.len();
    if k == 0 || k > n {
        return Err(Error::Degenerate(alloc::format!(
            "cannot span a {k}-dimensional subspace of R^{n}"
        )));
    }
    let a = DMatrix::from_fn(n, k, |i, j| vectors[j][i]);
    let qr = a.qr();
    let r = qr.r();
    let scale = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    for j in 0..k {
        if r[(j, j)].abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::Degenerate("basis vectors are linearly dependent".into()));
        }
    }
    Ok(qr.q().columns(0, k).into_owned())
}

/// Numerical rank via singular values of the column-normalized matrix.
pub fn rank_normalized(vectors: &[Vec<f64>], n: usize, tol: f64) -> usize {
    let k = vectors.len();
    if k == 0 {
        return 0;
    }
    let a = DMatrix::from_fn(n, k, |i, j| {
        let s = norm2(&vectors[j]);
        if s > 0.0 {
            vectors[j][i] / s
        } else {
            0.0
        }
    });
    a.singular_values().iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (`k x (k-1)`, columns) of the hyperplane `u^⊥` in `R^k`,
/// built from the Householder reflection sending `u` to a multiple of `e_0`.
pub fn hyperplane_frame(u: &[f64]) -> DMatrix<f64> {
    let k = u.len();
    let u = normalized(u);
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = u.clone();
    v[0] += sign;
    let vv = dot(&v, &v);
    // H = I - 2 v v^T / v^T v; H e_0 = -sign u, columns 1.. span u^⊥.
    DMatrix::from_fn(k, k - 1, |i, j| {
        let col = j + 1;
        let id = if i == col { 1.0 } else { 0.0 };
        id - 2.0 * v[i] * v[col] / vv
    })
}

/// Vector orthogonal to the `d - 1` rows of `rows` in `R^d` (generalized cross
/// product via signed cofactors). Not normalized.
pub fn cofactor_normal(rows: &[Vec<f64>], d: usize) -> Vec<f64> {
    debug_assert_eq!(rows.len() + 1, d);
    if d == 1 {
        return vec![1.0];
    }
    let mut out = vec![0.0; d];
    let mut minor = DMatrix::<f64>::zeros(d - 1, d - 1);
    for (j, o) in out.iter_mut().enumerate() {
        for (r, row) in rows.iter().enumerate() {
            let mut c = 0;
            for (col, &x) in row.iter().enumerate() {
                if col != j {
                    minor[(r, c)] = x;
                    c += 1;
                }
            }
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *o = sign * det(&minor);
    }
    out
}

/// `M^{-1/2}` and `det M` for a symmetric positive definite matrix.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let k = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if eig.eigenvalues.iter().any(|&l| !(l > 1e-14 * max.max(1e-300))) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0 / eig.eigenvalues[i].sqrt()
        } else {
            0.0
        }
    });
    let det = eig.eigenvalues.iter().product();
    Ok((&eig.eigenvectors * d * eig.eigenvectors.transpose(), det))
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Volume of the Euclidean unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_k = 2π/k V_{k-2}
    let mut v = [1.0, 2.0];
    if k < 2 {
        return v[k];
    }
    let mut out = 0.0;
    for d in 2..=k {
        out = 2.0 * core::f64::consts::PI / d as f64 * v[d % 2];
        v[d % 2] = out;
    }
    out
}

/// Advance `idx` (strictly increasing, values `< n`) to the next k-subset in
/// lexicographic order. Returns `false` after the last subset.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
