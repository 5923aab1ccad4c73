//! Finite-dimensional Lie algebras in a labeled frame, adapted splittings
//! and the vertically scaled frame metric.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{Diagnostic, WorstResidual};
use crate::linalg::{Span, Tensor3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("frame labels must be distinct and non-empty (offending label {0:?})")]
    BadLabel(String),
    #[error("unknown frame label {0:?}")]
    UnknownLabel(String),
    #[error("structure constants are not antisymmetric: c[{i}][{j}][{k}] + c[{j}][{i}][{k}] = {residual:.3e}")]
    NotAntisymmetric {
        i: usize,
        j: usize,
        k: usize,
        residual: f64,
    },
    #[error("bracket [{left}, {right}] is given twice with inconsistent values")]
    ConflictingBracket { left: String, right: String },
    #[error("change of basis matrix is singular")]
    SingularBasis,
    #[error("splitting: {0}")]
    Splitting(String),
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
}

/// Structure constants `c[(i, j, k)]`: the `E_k` coefficient of `[E_i, E_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraSpec {
    labels: Vec<String>,
    c: Tensor3,
}

impl LieAlgebraSpec {
    /// Validated constructor. Rejects duplicate labels and tables that are
    /// not antisymmetric within `1e-12`.
    pub fn new(labels: Vec<String>, c: Tensor3) -> Result<Self, LieError> {
        let alg = Self::from_raw(labels, c)?;
        let d = alg.dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let r = alg.c[(i, j, k)] + alg.c[(j, i, k)];
                    if r.abs() > 1e-12 {
                        return Err(LieError::NotAntisymmetric {
                            i,
                            j,
                            k,
                            residual: r,
                        });
                    }
                }
            }
        }
        Ok(alg)
    }

    /// Shape checks only. Used to feed deliberately broken tables to the
    /// validators.
    pub fn from_raw(labels: Vec<String>, c: Tensor3) -> Result<Self, LieError> {
        if labels.len() != c.dim() {
            return Err(LieError::DimensionMismatch {
                expected: c.dim(),
                got: labels.len(),
            });
        }
        for (n, l) in labels.iter().enumerate() {
            if l.is_empty() || labels[..n].contains(l) {
                return Err(LieError::BadLabel(l.clone()));
            }
        }
        Ok(Self { labels, c })
    }

    /// Builds the table from a list of brackets `[left, right] = Σ coeff·label`.
    /// Unlisted pairs are zero; the antisymmetric partner is filled in.
    pub fn from_brackets<S: AsRef<str>>(
        labels: &[S],
        brackets: &[(S, S, Vec<(S, f64)>)],
    ) -> Result<Self, LieError> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let d = labels.len();
        let idx = |s: &str| -> Result<usize, LieError> {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| LieError::UnknownLabel(s.to_string()))
        };
        let mut c = Tensor3::zeros(d);
        let mut seen = vec![false; d * d];
        for (left, right, result) in brackets {
            let (i, j) = (idx(left.as_ref())?, idx(right.as_ref())?);
            let mut row = vec![0.0; d];
            for (label, coeff) in result {
                row[idx(label.as_ref())?] += *coeff;
            }
            let conflict = |slot: usize, sign: f64| {
                seen[slot]
                    && (0..d).any(|k| (c[(slot / d, slot % d, k)] - sign * row[k]).abs() > 1e-12)
            };
            if (i == j && row.iter().any(|x| *x != 0.0))
                || conflict(i * d + j, 1.0)
                || conflict(j * d + i, -1.0)
            {
                return Err(LieError::ConflictingBracket {
                    left: labels[i].clone(),
                    right: labels[j].clone(),
                });
            }
            for (k, v) in row.iter().enumerate() {
                c[(i, j, k)] = *v;
                c[(j, i, k)] = -*v;
            }
            seen[i * d + j] = true;
            seen[j * d + i] = true;
        }
        Self::new(labels, c)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn constants(&self) -> &Tensor3 {
        &self.c
    }

    /// `c[(i, j, k)]`.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i, j, k)]
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>, LieError> {
        let d = self.dim();
        for x in [u, v] {
            if x.len() != d {
                return Err(LieError::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        let mut out = vec![0.0; d];
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = u[i] * v[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.c[(i, j, k)];
                }
            }
        }
        Ok(out)
    }

    /// Re-expresses the algebra in a new frame. Row `a` of `rows` holds the
    /// coordinates of the new basis vector `a` in the current frame.
    pub fn change_basis(&self, labels: Vec<String>, rows: &DMatrix<f64>) -> Result<Self, LieError> {
        let d = self.dim();
        if rows.shape() != (d, d) {
            return Err(LieError::DimensionMismatch {
                expected: d,
                got: rows.nrows(),
            });
        }
        let inv = rows.clone().try_inverse().ok_or(LieError::SingularBasis)?;
        let mut c = Tensor3::zeros(d);
        for a in 0..d {
            for b in 0..d {
                let u: Vec<f64> = rows.row(a).iter().copied().collect();
                let v: Vec<f64> = rows.row(b).iter().copied().collect();
                let br = DVector::from_vec(self.bracket(&u, &v)?);
                // old_k = Σ_c inv[k][c] new_c
                let coords = inv.transpose() * br;
                for k in 0..d {
                    c[(a, b, k)] = coords[k];
                }
            }
        }
        // clean up rounding noise so rational tables stay exact-looking
        let c = Tensor3::from_fn(d, |i, j, k| {
            let x = 0.5 * (c[(i, j, k)] - c[(j, i, k)]);
            if x.abs() < 1e-14 {
                0.0
            } else {
                x
            }
        });
        Self::new(labels, c)
    }

    pub fn unit(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[i] = 1.0;
        e
    }
}

/// Worst violation of `c[i][j][k] = −c[j][i][k]`.
pub fn check_antisymmetry(alg: &LieAlgebraSpec, tol: f64) -> Diagnostic {
    let d = alg.dim();
    let mut w = WorstResidual::new("antisymmetry", tol);
    for i in 0..d {
        for j in i..d {
            for k in 0..d {
                w.observe(alg.c(i, j, k) + alg.c(j, i, k), || {
                    format!("([{}, {}], {})", alg.label(i), alg.label(j), alg.label(k))
                });
            }
        }
    }
    w.finish()
}

/// Jacobi identity residual
/// `Σ_s c[i][j][s]c[s][l][k] + c[j][l][s]c[s][i][k] + c[l][i][s]c[s][j][k]`.
pub fn check_jacobi(alg: &LieAlgebraSpec, tol: f64) -> Diagnostic {
    let d = alg.dim();
    let mut w = WorstResidual::new("jacobi", tol);
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                for k in 0..d {
                    let r: f64 = (0..d)
                        .map(|s| {
                            alg.c(i, j, s) * alg.c(s, l, k)
                                + alg.c(j, l, s) * alg.c(s, i, k)
                                + alg.c(l, i, s) * alg.c(s, j, k)
                        })
                        .sum();
                    w.observe(r, || {
                        format!(
                            "({}, {}, {}; {})",
                            alg.label(i),
                            alg.label(j),
                            alg.label(l),
                            alg.label(k)
                        )
                    });
                }
            }
        }
    }
    w.finish()
}

/// Trace-free adjoint maps: `Σ_j c[i][j][j] = 0` for every `i`.
pub fn check_unimodular(alg: &LieAlgebraSpec, tol: f64) -> Diagnostic {
    let d = alg.dim();
    let mut w = WorstResidual::new("unimodular", tol);
    for i in 0..d {
        let tr: f64 = (0..d).map(|j| alg.c(i, j, j)).sum();
        w.observe(tr, || format!("tr ad({})", alg.label(i)));
    }
    w.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BracketGenerating {
    /// Smallest `r` with `H_r = g`, where `H_1 = H` and `H_{k+1} = H_k + [H, H_k]`.
    Step { step: usize },
    /// The flag stabilized at a proper subspace of this dimension.
    NotGenerating { dimension: usize },
}

impl BracketGenerating {
    pub fn step(self) -> Option<usize> {
        match self {
            BracketGenerating::Step { step } => Some(step),
            BracketGenerating::NotGenerating { .. } => None,
        }
    }
}

/// Flag of iterated brackets generated by arbitrary vectors.
pub fn generated_flag(
    alg: &LieAlgebraSpec,
    generators: &[Vec<f64>],
    tol: f64,
) -> Result<BracketGenerating, LieError> {
    let d = alg.dim();
    let mut span = Span::new();
    for g in generators {
        if g.len() != d {
            return Err(LieError::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }
        span.insert(&DVector::from_column_slice(g), tol);
    }
    let mut step = 1;
    loop {
        if span.dim() == d {
            return Ok(BracketGenerating::Step { step });
        }
        let current: Vec<Vec<f64>> = span
            .vectors()
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect();
        let mut grew = false;
        for g in generators {
            for v in &current {
                let b = alg.bracket(g, v)?;
                grew |= span.insert(&DVector::from_vec(b), tol);
            }
        }
        if !grew {
            return Ok(BracketGenerating::NotGenerating {
                dimension: span.dim(),
            });
        }
        step += 1;
    }
}

pub fn bracket_generating_step(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    tol: f64,
) -> BracketGenerating {
    let gens: Vec<Vec<f64>> = split.horizontal().iter().map(|&i| alg.unit(i)).collect();
    generated_flag(alg, &gens, tol).expect("splitting was validated against this algebra")
}

/// Partition of the frame into horizontal and vertical indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptedSplitting {
    h: Vec<usize>,
    v: Vec<usize>,
}

impl AdaptedSplitting {
    pub fn new(dim: usize, mut h: Vec<usize>, mut v: Vec<usize>) -> Result<Self, LieError> {
        h.sort_unstable();
        v.sort_unstable();
        if h.is_empty() {
            return Err(LieError::Splitting("horizontal part is empty".into()));
        }
        let mut all: Vec<usize> = h.iter().chain(&v).copied().collect();
        all.sort_unstable();
        if all != (0..dim).collect::<Vec<_>>() {
            return Err(LieError::Splitting(format!(
                "horizontal {h:?} and vertical {v:?} must partition 0..{dim}"
            )));
        }
        Ok(Self { h, v })
    }

    pub fn from_labels<S: AsRef<str>>(
        alg: &LieAlgebraSpec,
        horizontal: &[S],
        vertical: &[S],
    ) -> Result<Self, LieError> {
        let find = |s: &S| {
            alg.index_of(s.as_ref())
                .ok_or_else(|| LieError::UnknownLabel(s.as_ref().to_string()))
        };
        let h = horizontal.iter().map(find).collect::<Result<Vec<_>, _>>()?;
        let v = vertical.iter().map(find).collect::<Result<Vec<_>, _>>()?;
        Self::new(alg.dim(), h, v)
    }

    pub fn horizontal(&self) -> &[usize] {
        &self.h
    }

    pub fn vertical(&self) -> &[usize] {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn m(&self) -> usize {
        self.v.len()
    }

    pub fn dim(&self) -> usize {
        self.h.len() + self.v.len()
    }

    pub fn is_horizontal(&self, a: usize) -> bool {
        self.h.binary_search(&a).is_ok()
    }

    pub fn is_vertical(&self, a: usize) -> bool {
        self.v.binary_search(&a).is_ok()
    }
}

/// Frame metric `⟨E_i, E_j⟩ = δ_ij` on H and `δ_ij / ε` on V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    epsilon: f64,
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self { epsilon: 1.0 }
    }
}

impl MetricSpec {
    pub fn new(epsilon: f64) -> Result<Self, LieError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(LieError::BadEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `⟨E_a, E_a⟩`.
    pub fn weight(&self, split: &AdaptedSplitting, a: usize) -> f64 {
        if split.is_vertical(a) {
            1.0 / self.epsilon
        } else {
            1.0
        }
    }

    pub fn weights(&self, split: &AdaptedSplitting) -> Vec<f64> {
        (0..split.dim()).map(|a| self.weight(split, a)).collect()
    }
}

/// Built-in algebras.
pub mod builtin {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// su(2) with `[X, Y] = Z`, `[Y, Z] = X`, `[Z, X] = Y`.
    pub fn su2() -> LieAlgebraSpec {
        LieAlgebraSpec::from_brackets(
            &["X", "Y", "Z"],
            &[
                ("X", "Y", vec![("Z", 1.0)]),
                ("Y", "Z", vec![("X", 1.0)]),
                ("Z", "X", vec![("Y", 1.0)]),
            ],
        )
        .expect("su(2) table is valid")
    }

    /// su(2) ⊕ su(2) in the product frame `X1, Y1, Z1, X2, Y2, Z2`.
    pub fn su2_sum() -> LieAlgebraSpec {
        let one = su2();
        let mut c = Tensor3::zeros(6);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[(i, j, k)] = one.c(i, j, k);
                    c[(i + 3, j + 3, k + 3)] = one.c(i, j, k);
                }
            }
        }
        LieAlgebraSpec::new(labels(&["X1", "Y1", "Z1", "X2", "Y2", "Z2"]), c).expect("valid")
    }

    /// Rows: coordinates of `Xc, Ym, Zm, Xp, Yp, Zp` in the product frame,
    /// where `X± = X1 ± X2` (same for Y, Z) and `Xc = X- + c·X+`.
    pub fn su2xsu2_frame_rows(c: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            6,
            6,
            &[
                1.0 + c,
                0.0,
                0.0,
                c - 1.0,
                0.0,
                0.0, //
                0.0,
                1.0,
                0.0,
                0.0,
                -1.0,
                0.0, //
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                -1.0, //
                1.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0, //
                0.0,
                1.0,
                0.0,
                0.0,
                1.0,
                0.0, //
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                1.0,
            ],
        )
    }

    /// su(2) ⊕ su(2) in the frame `Xc, Ym, Zm, Xp, Yp, Zp`.
    pub fn su2xsu2(c: f64) -> LieAlgebraSpec {
        su2_sum()
            .change_basis(
                labels(&["Xc", "Ym", "Zm", "Xp", "Yp", "Zp"]),
                &su2xsu2_frame_rows(c),
            )
            .expect("frame is invertible for every real c")
    }

    /// Index pairs `(i, j)` (1-based, i < j) of `B^{ij} = e_i e_jᵀ − e_j e_iᵀ`
    /// in the order `X1..X4, Z1, Z2`.
    pub const SO4_PAIRS: [(usize, usize); 6] = [(1, 2), (1, 4), (2, 4), (3, 4), (1, 3), (2, 3)];

    pub fn so4_matrix(i: usize, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4, 4);
        m[(i - 1, j - 1)] = 1.0;
        m[(j - 1, i - 1)] = -1.0;
        m
    }

    /// so(4) in the frame `X1 = B¹², X2 = B¹⁴, X3 = B²⁴, X4 = B³⁴,
    /// Z1 = B¹³, Z2 = B²³`, orthonormal for `−½ tr(AB)`.
    pub fn so4() -> LieAlgebraSpec {
        let mats: Vec<_> = SO4_PAIRS.iter().map(|&(i, j)| so4_matrix(i, j)).collect();
        let c = Tensor3::from_fn(6, |a, b, k| {
            let br = &mats[a] * &mats[b] - &mats[b] * &mats[a];
            let (i, j) = SO4_PAIRS[k];
            br[(i - 1, j - 1)]
        });
        LieAlgebraSpec::new(labels(&["X1", "X2", "X3", "X4", "Z1", "Z2"]), c).expect("valid")
    }

    /// Two-dimensional algebra `[e1, e2] = e2`; not unimodular.
    pub fn affine_line() -> LieAlgebraSpec {
        LieAlgebraSpec::from_brackets(&["e1", "e2"], &[("e1", "e2", vec![("e2", 1.0)])])
            .expect("valid")
    }
}
