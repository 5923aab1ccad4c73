//! Structure tensors of an adapted connection and the standing assumptions.
//!
//! All tables are constant in a left-invariant frame, so every Lie
//! derivative below has been reduced to structure constants by hand.

use nalgebra::DMatrix;

use crate::connections::{torsion, torsion_derivative, ConnectionTable, CurvatureTable};
use crate::diagnostic::{Diagnostic, WorstResidual};
use crate::lie::{AdaptedSplitting, LieAlgebraSpec, MetricSpec};
use crate::linalg::{Matrix, Tensor3, Tensor4};

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryTensors {
    /// `𝓡[(i, j, k)] = c[i][j][k]` for horizontal `i, j` and vertical `k`, zero elsewhere.
    pub curv_h: Tensor3,
    /// `𝓡̄[(k, l, a)] = c[k][l][a]` for vertical `k, l` and horizontal `a`, zero elsewhere.
    pub cocurv: Tensor3,
    pub torsion: Tensor3,
    /// `(∇_{E_i} T)(E_a, E_b)`, `E_l` coefficient at `(i, a, b, l)`.
    pub torsion_derivative: Tensor4,
    /// `ric[(a, b)] = Ric(e^a)(E_b)`.
    pub ric: Matrix,
    /// `b_map[(x, y)]` is the `E_y` component of `B(E_x)`.
    pub b_map: Matrix,
    /// Horizontal `n×n` Gram matrix of `S`, indexed by positions in `split.horizontal()`.
    pub s_gram: Matrix,
    /// `w_form[(a, b)] = ⟨𝒲(e^a), e^b⟩_{g*}`.
    pub w_form: Matrix,
}

/// Tensors `𝓡`, `𝓡̄`, `T`, `∇T`, `Ric`, `B`, `S` and `𝒲` for the connection `conn`.
pub fn structure_tensors(
    alg: &LieAlgebraSpec,
    metric: &MetricSpec,
    split: &AdaptedSplitting,
    conn: &ConnectionTable,
    curvature: &CurvatureTable,
) -> GeometryTensors {
    let d = alg.dim();
    let eps = metric.epsilon();
    let w = metric.weights(split);
    let hs = split.horizontal();
    let vs = split.vertical();
    let h = |a: usize| split.is_horizontal(a);
    let v = |a: usize| split.is_vertical(a);

    let curv_h = Tensor3::from_fn(d, |i, j, k| {
        if h(i) && h(j) && v(k) {
            alg.c(i, j, k)
        } else {
            0.0
        }
    });
    let cocurv = Tensor3::from_fn(d, |k, l, a| {
        if v(k) && v(l) && h(a) {
            alg.c(k, l, a)
        } else {
            0.0
        }
    });

    let t = torsion(alg, conn);
    let dt = torsion_derivative(conn, &t);
    let t = t.t;
    let r = &curvature.r;

    let ric = Matrix::from_fn(d, d, |a, b| hs.iter().map(|&i| r[(b, i, i, a)]).sum());

    let b_map = Matrix::from_fn(d, d, |x, y| {
        hs.iter()
            .map(|&i| dt[(i, i, x, y)] - (0..d).map(|s| t[(i, x, s)] * t[(i, s, y)]).sum::<f64>())
            .sum()
    });

    let n = hs.len();
    let s_gram = DMatrix::from_fn(n, n, |p, q| {
        let (a, b) = (hs[p], hs[q]);
        let mut acc = 0.0;
        for &i in hs {
            for &k in vs {
                acc += w[k] * t[(i, a, k)] * t[(i, b, k)];
            }
        }
        acc
    });

    let w_form = Matrix::from_fn(d, d, |a, b| {
        let mut acc = 0.0;
        for &i in hs {
            for &k in vs {
                acc += t[(i, k, a)] * t[(i, k, b)];
            }
        }
        if v(b) {
            acc -= b_map[(b, a)];
        }
        eps * acc
    });

    GeometryTensors {
        curv_h,
        cocurv,
        torsion: t,
        torsion_derivative: dt,
        ric,
        b_map,
        s_gram,
        w_form,
    }
}

/// `⟨pr_H[Z, X], Y⟩ + ⟨X, pr_H[Z, Y]⟩ = 0` for vertical `Z` and horizontal `X, Y`.
pub fn check_assumption_a(alg: &LieAlgebraSpec, split: &AdaptedSplitting, tol: f64) -> Diagnostic {
    let mut w = WorstResidual::new("assumption A (metric preserving complement)", tol);
    for &z in split.vertical() {
        for &a in split.horizontal() {
            for &b in split.horizontal().iter().filter(|&&b| b >= a) {
                w.observe(alg.c(z, a, b) + alg.c(z, b, a), || {
                    format!("({}; {}, {})", alg.label(z), alg.label(a), alg.label(b))
                });
            }
        }
    }
    w.finish()
}

/// `tr_H ⟨𝓡̄(Z, 𝓡(X, ·)), ·⟩ = 0` for horizontal `X` and orthonormal vertical `Z`.
pub fn check_assumption_b(
    alg: &LieAlgebraSpec,
    metric: &MetricSpec,
    split: &AdaptedSplitting,
    tensors: &GeometryTensors,
    tol: f64,
) -> Diagnostic {
    let scale = metric.epsilon().sqrt();
    let mut w = WorstResidual::new("assumption B (curvature/cocurvature trace)", tol);
    for &i in split.horizontal() {
        for &k in split.vertical() {
            let mut acc = 0.0;
            for &j in split.horizontal() {
                for &l in split.vertical() {
                    acc += tensors.curv_h[(i, j, l)] * tensors.cocurv[(k, l, j)];
                }
            }
            w.observe(scale * acc, || {
                format!("({}; {})", alg.label(i), alg.label(k))
            });
        }
    }
    w.finish()
}

/// `Σ_k ⟨[X, Z_k], Z_k⟩ = 0` for horizontal `X`, `Z_k` orthonormal in `V`.
pub fn check_assumption_c(alg: &LieAlgebraSpec, split: &AdaptedSplitting, tol: f64) -> Diagnostic {
    let mut w = WorstResidual::new("assumption C (vertical trace of L_X g)", tol);
    for &i in split.horizontal() {
        let r: f64 = split.vertical().iter().map(|&k| alg.c(i, k, k)).sum();
        w.observe(r, || alg.label(i).to_string());
    }
    w.finish()
}

/// `(ℒ_X g)(Z, Z') = −⟨[X, Z], Z'⟩ − ⟨Z, [X, Z']⟩ = 0` for horizontal `X` and vertical `Z, Z'`.
pub fn check_totally_geodesic(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    tol: f64,
) -> Diagnostic {
    let mut w = WorstResidual::new("totally geodesic foliation", tol);
    for &i in split.horizontal() {
        for &k in split.vertical() {
            for &l in split.vertical().iter().filter(|&&l| l >= k) {
                w.observe(-alg.c(i, k, l) - alg.c(i, l, k), || {
                    format!("({}; {}, {})", alg.label(i), alg.label(k), alg.label(l))
                });
            }
        }
    }
    w.finish()
}

/// `tr_H (∇_× T)(×, E_b) = 0` for every frame vector `E_b`.
pub fn check_yang_mills(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    tensors: &GeometryTensors,
    tol: f64,
) -> Diagnostic {
    let d = alg.dim();
    let dt = &tensors.torsion_derivative;
    let mut w = WorstResidual::new("Yang-Mills condition", tol);
    for b in 0..d {
        for l in 0..d {
            let r: f64 = split.horizontal().iter().map(|&i| dt[(i, i, b, l)]).sum();
            w.observe(r, || format!("({}; {})", alg.label(b), alg.label(l)));
        }
    }
    w.finish()
}

/// `pr_H [V, V] = 0`.
pub fn check_v_integrable(alg: &LieAlgebraSpec, split: &AdaptedSplitting, tol: f64) -> Diagnostic {
    let mut w = WorstResidual::new("vertical integrability", tol);
    for &k in split.vertical() {
        for &l in split.vertical().iter().filter(|&&l| l > k) {
            for &a in split.horizontal() {
                w.observe(alg.c(k, l, a), || {
                    format!("([{}, {}]; {})", alg.label(k), alg.label(l), alg.label(a))
                });
            }
        }
    }
    w.finish()
}

/// Structural identities of the torsion, `B` and `Ric` that hold whenever
/// assumptions A and B do.
pub fn torsion_lemma(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    tensors: &GeometryTensors,
    tol: f64,
) -> Vec<Diagnostic> {
    let d = alg.dim();
    let t = &tensors.torsion;
    let hs = split.horizontal();
    let vs = split.vertical();
    let lab = |i: usize| alg.label(i);

    let mut ii = WorstResidual::new("torsion: pr_H T(H, ·) = 0", tol);
    for &i in hs {
        for j in 0..d {
            for &a in hs {
                ii.observe(t[(i, j, a)], || {
                    format!("(T({}, {}); {})", lab(i), lab(j), lab(a))
                });
            }
        }
    }

    let mut iii = WorstResidual::new("torsion: T(X, Y) = -R(X, Y) on H", tol);
    for &i in hs {
        for &j in hs {
            for k in 0..d {
                iii.observe(t[(i, j, k)] + tensors.curv_h[(i, j, k)], || {
                    format!("(T({}, {}); {})", lab(i), lab(j), lab(k))
                });
            }
        }
    }

    let mut iv = WorstResidual::new("torsion: pr_H T(Z, Z') = -cocurvature on V", tol);
    for &k in vs {
        for &l in vs {
            for &a in hs {
                iv.observe(t[(k, l, a)] + tensors.cocurv[(k, l, a)], || {
                    format!("(T({}, {}); {})", lab(k), lab(l), lab(a))
                });
            }
        }
    }

    let mut v = WorstResidual::new("B takes values in V", tol);
    for x in 0..d {
        for &a in hs {
            v.observe(tensors.b_map[(x, a)], || {
                format!("(B({}); {})", lab(x), lab(a))
            });
        }
    }

    let mut vi = WorstResidual::new("torsion: tr T(X, ·) = 0 on H", tol);
    for &i in hs {
        let r: f64 = (0..d).map(|a| t[(i, a, a)]).sum();
        vi.observe(r, || lab(i).to_string());
    }

    let mut ric_v = WorstResidual::new("Ric vanishes on vertical vectors", tol);
    for a in 0..d {
        for &b in vs {
            ric_v.observe(tensors.ric[(a, b)], || {
                format!("Ric({}, {})", lab(a), lab(b))
            });
        }
    }
    let mut ric_s = WorstResidual::new("Ric symmetric on H", tol);
    for &a in hs {
        for &b in hs.iter().filter(|&&b| b > a) {
            ric_s.observe(tensors.ric[(a, b)] - tensors.ric[(b, a)], || {
                format!("Ric({}, {})", lab(a), lab(b))
            });
        }
    }

    vec![
        ii.finish(),
        iii.finish(),
        iv.finish(),
        v.finish(),
        vi.finish(),
        ric_v.finish(),
        ric_s.finish(),
    ]
}
