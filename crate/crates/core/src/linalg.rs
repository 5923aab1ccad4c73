//! Dense tables and small eigenvalue problems.
//!
//! Every matrix in this crate is at most a few dozen rows, so everything is
//! dense and eigenproblems go through `nalgebra`'s symmetric solver. Results
//! are re-checked against the eigen equation before they are handed out.

use std::ops::{Index, IndexMut};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Matrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex<f64>>;

/// Acceptance threshold for ‖Av − λv‖ relative to max(1, ‖A‖).
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("eigen decomposition residual {residual:.3e} exceeds {EIGEN_RESIDUAL_TOL:.0e}")]
    EigenResidual { residual: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// Three-index table `t[(i, j, k)]` over a frame of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    t[(i, j, k)] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Entries with `|value| > tol`, in lexicographic index order.
    pub fn nonzero(&self, tol: f64) -> Vec<((usize, usize, usize), f64)> {
        let d = self.dim;
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self[(i, j, k)];
                    if v.abs() > tol {
                        out.push(((i, j, k), v));
                    }
                }
            }
        }
        out
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.dim + j) * self.dim + k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.dim + j) * self.dim + k]
    }
}

/// Four-index table `t[(i, j, l, k)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, j, l, k): (usize, usize, usize, usize)) -> &f64 {
        let d = self.dim;
        &self.data[((i * d + j) * d + l) * d + k]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, l, k): (usize, usize, usize, usize)) -> &mut f64 {
        let d = self.dim;
        &mut self.data[((i * d + j) * d + l) * d + k]
    }
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> Option<(f64, DVector<f64>)> {
        self.values
            .first()
            .map(|&v| (v, self.vectors.column(0).into_owned()))
    }

    pub fn max(&self) -> Option<(f64, DVector<f64>)> {
        let n = self.values.len();
        self.values
            .last()
            .map(|&v| (v, self.vectors.column(n - 1).into_owned()))
    }

    /// Eigenpair of largest absolute eigenvalue.
    pub fn max_abs(&self) -> Option<(f64, DVector<f64>)> {
        let (lo, hi) = (self.min()?, self.max()?);
        Some(if lo.0.abs() > hi.0.abs() { lo } else { hi })
    }
}

/// Symmetric eigendecomposition of the symmetric part of `a`.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let scale = sym.norm().max(1.0);
    let mut worst: f64 = 0.0;
    for (c, &lambda) in values.iter().enumerate() {
        let v = vectors.column(c);
        let r = &sym * v - v * lambda;
        worst = worst.max(r.norm() / scale);
    }
    if worst > EIGEN_RESIDUAL_TOL {
        return Err(LinalgError::EigenResidual { residual: worst });
    }
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues (ascending) of a Hermitian matrix.
///
/// Goes through the real symmetric embedding `[[A, -B], [B, A]]` of
/// `A + iB`, whose spectrum is that of the Hermitian matrix with every
/// eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: h.ncols(),
        });
    }
    let real = Matrix::from_fn(2 * n, 2 * n, |r, c| {
        let (ri, ci) = (r % n, c % n);
        let z = h[(ri, ci)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = sym_eigen(&real)?;
    Ok(eig.values.iter().step_by(2).copied().collect())
}

/// Largest singular value of `m` with its left and right singular vectors.
///
/// Computed from the eigenproblem of `mᵀm`; the matrices here are tiny.
pub fn top_singular(m: &Matrix) -> Result<(f64, DVector<f64>, DVector<f64>), LinalgError> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok((0.0, DVector::zeros(rows), DVector::zeros(cols)));
    }
    let gram = m.transpose() * m;
    let (lambda, right) = sym_eigen(&gram)?.max().expect("non-empty");
    let sigma = lambda.max(0.0).sqrt();
    let left = if sigma > 0.0 {
        (m * &right) / sigma
    } else {
        let mut e = DVector::zeros(rows);
        e[0] = 1.0;
        e
    };
    Ok((sigma, left, right))
}

/// Incrementally maintained orthonormal basis of a subspace of ℝᵈ.
#[derive(Debug, Clone, Default)]
pub struct Span {
    basis: Vec<DVector<f64>>,
}

impl Span {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Adds `v` if its component orthogonal to the span exceeds `tol`
    /// (relative to ‖v‖). Returns whether the span grew.
    pub fn insert(&mut self, v: &DVector<f64>, tol: f64) -> bool {
        let norm = v.norm();
        if norm <= tol {
            return false;
        }
        let mut r = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &self.basis {
                let p = b.dot(&r);
                r -= b * p;
            }
        }
        let rn = r.norm();
        if rn <= tol * norm.max(1.0) {
            return false;
        }
        self.basis.push(r / rn);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_eigen_sorts_and_satisfies_equation() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let e = sym_eigen(&a).unwrap();
        let expected = [-1.0, 1.0, 3.0];
        for (v, x) in e.values.iter().zip(expected) {
            assert!((v - x).abs() < 1e-12);
        }
        let (lambda, v) = e.max_abs().unwrap();
        assert!((lambda - 3.0).abs() < 1e-12);
        assert!((&a * &v - &v * lambda).norm() < 1e-12);
    }

    #[test]
    fn empty_matrix_has_no_eigenvalues() {
        let e = sym_eigen(&Matrix::zeros(0, 0)).unwrap();
        assert!(e.values.is_empty());
        assert!(e.min().is_none());
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            sym_eigen(&Matrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn hermitian_pauli_y() {
        let i = Complex::new(0.0, 1.0);
        let z = Complex::new(0.0, 0.0);
        let h = CMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_singular_of_rank_one() {
        let m = Matrix::from_row_slice(2, 3, &[0.0, 3.0, 0.0, 0.0, 4.0, 0.0]);
        let (s, u, v) = top_singular(&m).unwrap();
        assert!((s - 5.0).abs() < 1e-12);
        assert!((u.transpose() * &m * &v)[0].abs() - 5.0 < 1e-12);
    }

    #[test]
    fn span_rejects_dependent_vectors() {
        let mut s = Span::new();
        assert!(s.insert(&DVector::from_vec(vec![1.0, 1.0, 0.0]), 1e-9));
        assert!(!s.insert(&DVector::from_vec(vec![2.0, 2.0, 0.0]), 1e-9));
        assert!(s.insert(&DVector::from_vec(vec![1.0, 0.0, 0.0]), 1e-9));
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn tensor_indexing_is_row_major() {
        let t = Tensor3::from_fn(2, |i, j, k| (4 * i + 2 * j + k) as f64);
        assert_eq!(t[(1, 0, 1)], 5.0);
        assert_eq!(t.nonzero(0.5).len(), 7);
    }
}
