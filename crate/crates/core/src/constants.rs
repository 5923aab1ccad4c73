//! Tightest admissible curvature constants.
//!
//! Each constant is the extremal value of a quadratic form over covectors,
//! computed as an eigenvalue or singular value of a small Gram matrix. The
//! extremizing covector is kept and the defining form is re-evaluated at it
//! directly from the tensors, so a wrong Gram matrix cannot go unnoticed.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryTensors;
use crate::lie::{AdaptedSplitting, MetricSpec};
use crate::linalg::{sym_eigen, top_singular, LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("horizontal Ricci block is not symmetric: residual {residual:.3e} at ({row}, {col})")]
    RicciNotSymmetric {
        residual: f64,
        row: usize,
        col: usize,
    },
    #[error("rho2 = {rho2:.3e} vanishes: H + [H, H] does not span the algebra")]
    NotStepTwo { rho2: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Extremal value of one constant together with the covector attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    /// Extremizing covector in dual-frame coordinates `α_a = α(E_a)`.
    pub witness: Vec<f64>,
    /// The defining ratio recomputed from the tensors at `witness`.
    pub reevaluated: f64,
}

impl Extremum {
    pub fn tightness_residual(&self) -> f64 {
        (self.value - self.reevaluated).abs()
    }
}

/// Block norms of the symmetrized `𝒲` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WBlocks {
    pub horizontal: f64,
    pub mixed: f64,
    pub vertical: f64,
    /// Largest entry of the antisymmetric part; invisible to `⟨𝒲α, α⟩`.
    pub antisymmetric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub rho1: Extremum,
    pub rho2: Option<Extremum>,
    pub kappa1: Extremum,
    pub kappa2: Option<Extremum>,
    pub kappa3: Option<Extremum>,
    pub w_blocks: WBlocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConstants {
    pub rho1: f64,
    pub rho2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub n: usize,
    pub m: usize,
    pub feasible_kappa3: bool,
    /// Absent for constants supplied by hand.
    pub extraction: Option<Extraction>,
}

impl GapConstants {
    /// Constants that did not come from a frame computation.
    pub fn manual(
        rho1: f64,
        rho2: f64,
        kappa1: f64,
        kappa2: f64,
        kappa3: f64,
        n: usize,
        m: usize,
    ) -> Self {
        Self {
            rho1,
            rho2,
            kappa1,
            kappa2,
            kappa3,
            n,
            m,
            feasible_kappa3: true,
            extraction: None,
        }
    }

    pub fn as_tuple(&self) -> (f64, f64, f64, f64, f64) {
        (self.rho1, self.rho2, self.kappa1, self.kappa2, self.kappa3)
    }
}

/// Direct evaluations of the quadratic forms bounded by the constants.
///
/// Covectors are given by their values on the frame. These never go through
/// the Gram matrices used for extraction.
pub mod forms {
    use super::*;

    pub fn norm_h_sq(split: &AdaptedSplitting, alpha: &[f64]) -> f64 {
        split
            .horizontal()
            .iter()
            .map(|&a| alpha[a] * alpha[a])
            .sum()
    }

    /// `|α|²_{g_V*}`: the dual of `g_V = E_k ↦ 1/ε` is `ε`.
    pub fn norm_v_sq(metric: &MetricSpec, split: &AdaptedSplitting, alpha: &[f64]) -> f64 {
        metric.epsilon()
            * split
                .vertical()
                .iter()
                .map(|&k| alpha[k] * alpha[k])
                .sum::<f64>()
    }

    /// `⟨Ric(α), α⟩_{g_H*}`.
    pub fn ric(t: &GeometryTensors, split: &AdaptedSplitting, alpha: &[f64]) -> f64 {
        let d = alpha.len();
        split
            .horizontal()
            .iter()
            .map(|&b| (0..d).map(|a| alpha[a] * t.ric[(a, b)]).sum::<f64>() * alpha[b])
            .sum()
    }

    /// `|ι_T α|²_{g_H*⊗g_H*} = Σ_{i,j∈H} α(T(E_i, E_j))²`.
    pub fn torsion(t: &GeometryTensors, split: &AdaptedSplitting, alpha: &[f64]) -> f64 {
        let d = alpha.len();
        let mut acc = 0.0;
        for &i in split.horizontal() {
            for &j in split.horizontal() {
                let v: f64 = (0..d).map(|k| alpha[k] * t.torsion[(i, j, k)]).sum();
                acc += v * v;
            }
        }
        acc
    }

    /// `|S(α)|²_{g_H*⊗g_V*}` with `S(α)(v, w) = ⟨w, T(pr_H v, ♯^H α)⟩_g`,
    /// summed over the orthonormal vertical frame `Z_k = √ε E_k`.
    pub fn s(
        t: &GeometryTensors,
        metric: &MetricSpec,
        split: &AdaptedSplitting,
        alpha: &[f64],
    ) -> f64 {
        let eps = metric.epsilon();
        let mut acc = 0.0;
        for &i in split.horizontal() {
            for &k in split.vertical() {
                // ⟨√ε E_k, T(E_i, ♯α)⟩_g = √ε · (1/ε) · T-coefficient
                let coeff: f64 = split
                    .horizontal()
                    .iter()
                    .map(|&a| alpha[a] * t.torsion[(i, a, k)])
                    .sum();
                let val = eps.sqrt() / eps * coeff;
                acc += val * val;
            }
        }
        acc
    }

    /// `⟨ι_B α, α⟩_{g_H*} = Σ_{a∈H} α(B(E_a)) α(E_a)`.
    pub fn b(t: &GeometryTensors, split: &AdaptedSplitting, alpha: &[f64]) -> f64 {
        let d = alpha.len();
        split
            .horizontal()
            .iter()
            .map(|&a| (0..d).map(|y| alpha[y] * t.b_map[(a, y)]).sum::<f64>() * alpha[a])
            .sum()
    }

    /// `⟨𝒲(α), β⟩_{g*}` from its two defining terms, over `Z_k = √ε E_k`.
    pub fn w(
        t: &GeometryTensors,
        metric: &MetricSpec,
        split: &AdaptedSplitting,
        alpha: &[f64],
        beta: &[f64],
    ) -> f64 {
        let d = alpha.len();
        let eps = metric.epsilon();
        let on = |x: &[f64], v: &dyn Fn(usize) -> f64| (0..d).map(|s| x[s] * v(s)).sum::<f64>();
        let mut first = 0.0;
        for &i in split.horizontal() {
            for &k in split.vertical() {
                let tz = |s: usize| eps.sqrt() * t.torsion[(i, k, s)];
                first += on(alpha, &tz) * on(beta, &tz);
            }
        }
        let mut second = 0.0;
        for &k in split.vertical() {
            let bz = |s: usize| eps.sqrt() * t.b_map[(k, s)];
            second += on(alpha, &bz) * eps.sqrt() * beta[k];
        }
        first - second
    }
}

/// `Q[k][l] = (1/ε) Σ_{i,j∈H} T[i][j][k] T[i][j][l]` on vertical indices;
/// its smallest eigenvalue is `ρ₂`.
pub fn torsion_gram(
    tensors: &GeometryTensors,
    metric: &MetricSpec,
    split: &AdaptedSplitting,
) -> Matrix {
    let vs = split.vertical();
    let hs = split.horizontal();
    let t = &tensors.torsion;
    Matrix::from_fn(vs.len(), vs.len(), |p, q| {
        let (k, l) = (vs[p], vs[q]);
        let mut acc = 0.0;
        for &i in hs {
            for &j in hs {
                acc += t[(i, j, k)] * t[(i, j, l)];
            }
        }
        acc / metric.epsilon()
    })
}

fn embed(d: usize, idx: &[usize], v: &DVector<f64>, scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (p, &a) in idx.iter().enumerate() {
        out[a] = v[p] * scale;
    }
    out
}

/// Extracts `(ρ₁, ρ₂, κ₁, κ₂, κ₃)` as extremal values over the frame.
///
/// With `m = 0` the vertical constants are zero and `ρ₂` is not required to
/// be positive; only the Riemannian variant consumes such constants.
pub fn extract_constants(
    tensors: &GeometryTensors,
    metric: &MetricSpec,
    split: &AdaptedSplitting,
    tol: f64,
) -> Result<GapConstants, ConstantsError> {
    let d = split.dim();
    let eps = metric.epsilon();
    let hs = split.horizontal();
    let vs = split.vertical();
    let (n, m) = (hs.len(), vs.len());

    let mut worst = (0.0, 0, 0);
    for (p, &a) in hs.iter().enumerate() {
        for &b in &hs[p + 1..] {
            let r = (tensors.ric[(a, b)] - tensors.ric[(b, a)]).abs();
            if r > worst.0 {
                worst = (r, a, b);
            }
        }
    }
    if worst.0 > tol {
        return Err(ConstantsError::RicciNotSymmetric {
            residual: worst.0,
            row: worst.1,
            col: worst.2,
        });
    }

    let ric_h = Matrix::from_fn(n, n, |p, q| tensors.ric[(hs[p], hs[q])]);
    let (rho1, v) = sym_eigen(&ric_h)?.min().expect("n >= 1");
    let alpha = embed(d, hs, &v, 1.0);
    let rho1_ext = Extremum {
        value: rho1,
        reevaluated: forms::ric(tensors, split, &alpha) / forms::norm_h_sq(split, &alpha),
        witness: alpha,
    };

    let (kappa1, v) = sym_eigen(&tensors.s_gram)?.max().expect("n >= 1");
    let kappa1 = kappa1.max(0.0);
    let alpha = embed(d, hs, &v, 1.0);
    let kappa1_ext = Extremum {
        value: kappa1,
        reevaluated: forms::s(tensors, metric, split, &alpha) / forms::norm_h_sq(split, &alpha),
        witness: alpha,
    };

    let sym_w = (&tensors.w_form + tensors.w_form.transpose()) * 0.5;
    let anti = (&tensors.w_form - tensors.w_form.transpose()) * 0.5;
    let block_max = |rows: &[usize], cols: &[usize]| {
        rows.iter()
            .flat_map(|&a| cols.iter().map(move |&b| (a, b)))
            .fold(0.0_f64, |acc, (a, b)| acc.max(sym_w[(a, b)].abs()))
    };
    let w_blocks = WBlocks {
        horizontal: block_max(hs, hs),
        mixed: block_max(hs, vs),
        vertical: block_max(vs, vs),
        antisymmetric: anti.abs().max(),
    };
    let feasible_kappa3 = w_blocks.horizontal <= tol && w_blocks.mixed <= tol;

    if m == 0 {
        return Ok(GapConstants {
            rho1,
            rho2: 0.0,
            kappa1,
            kappa2: 0.0,
            kappa3: 0.0,
            n,
            m,
            feasible_kappa3,
            extraction: Some(Extraction {
                rho1: rho1_ext,
                rho2: None,
                kappa1: kappa1_ext,
                kappa2: None,
                kappa3: None,
                w_blocks,
            }),
        });
    }

    let scale_v = 1.0 / eps.sqrt();
    let (rho2, v) = sym_eigen(&torsion_gram(tensors, metric, split))?
        .min()
        .expect("m >= 1");
    let rho2 = rho2.max(0.0);
    if rho2 <= tol {
        return Err(ConstantsError::NotStepTwo { rho2 });
    }
    let alpha = embed(d, vs, &v, scale_v);
    let rho2_ext = Extremum {
        value: rho2,
        reevaluated: forms::torsion(tensors, split, &alpha)
            / forms::norm_v_sq(metric, split, &alpha),
        witness: alpha,
    };

    // M[k][a] = ⟨B(E_a), Z_k⟩_g with Z_k = √ε E_k
    let bm = Matrix::from_fn(m, n, |p, q| tensors.b_map[(hs[q], vs[p])] * scale_v);
    let (sigma, left, right) = top_singular(&bm)?;
    let kappa2 = 0.5 * sigma;
    let mut alpha = embed(d, vs, &left, scale_v);
    for (q, &a) in hs.iter().enumerate() {
        alpha[a] = right[q];
    }
    let kappa2_ext = Extremum {
        value: kappa2,
        reevaluated: forms::b(tensors, split, &alpha).abs()
            / (2.0
                * (forms::norm_v_sq(metric, split, &alpha) * forms::norm_h_sq(split, &alpha))
                    .sqrt()),
        witness: alpha,
    };

    let wvv = Matrix::from_fn(m, m, |p, q| sym_w[(vs[p], vs[q])]);
    let (lambda, v) = sym_eigen(&wvv)?.max_abs().expect("m >= 1");
    let kappa3 = lambda.abs() / eps;
    let alpha = embed(d, vs, &v, scale_v);
    let kappa3_ext = Extremum {
        value: kappa3,
        reevaluated: forms::w(tensors, metric, split, &alpha, &alpha).abs()
            / forms::norm_v_sq(metric, split, &alpha),
        witness: alpha,
    };

    Ok(GapConstants {
        rho1,
        rho2,
        kappa1,
        kappa2,
        kappa3,
        n,
        m,
        feasible_kappa3,
        extraction: Some(Extraction {
            rho1: rho1_ext,
            rho2: Some(rho2_ext),
            kappa1: kappa1_ext,
            kappa2: Some(kappa2_ext),
            kappa3: Some(kappa3_ext),
            w_blocks,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{build_connection, curvature, VerticalStrategy};
    use crate::geometry::structure_tensors;
    use crate::lie::builtin::*;
    use crate::lie::LieAlgebraSpec;

    const TOL: f64 = 1e-9;

    fn constants(
        alg: &LieAlgebraSpec,
        split: &AdaptedSplitting,
        metric: &MetricSpec,
        strategy: VerticalStrategy,
    ) -> Result<GapConstants, ConstantsError> {
        let conn = build_connection(alg, metric, split, &strategy, TOL).unwrap();
        let r = curvature(alg, &conn);
        extract_constants(
            &structure_tensors(alg, metric, split, &conn, &r),
            metric,
            split,
            TOL,
        )
    }

    fn close(got: (f64, f64, f64, f64, f64), want: (f64, f64, f64, f64, f64)) -> bool {
        let g = [got.0, got.1, got.2, got.3, got.4];
        let w = [want.0, want.1, want.2, want.3, want.4];
        g.iter().zip(w).all(|(a, b)| (a - b).abs() < 1e-9)
    }

    #[test]
    fn so4_constants() {
        let s = AdaptedSplitting::new(6, vec![0, 1, 2, 3], vec![4, 5]).unwrap();
        let k = constants(&so4(), &s, &MetricSpec::default(), VerticalStrategy::Bott).unwrap();
        assert!(
            close(k.as_tuple(), (0.5, 2.0, 2.0, 0.0, 0.0)),
            "{:?}",
            k.as_tuple()
        );
        assert!(k.feasible_kappa3);
        assert_eq!((k.n, k.m), (4, 2));
    }

    #[test]
    fn su2xsu2_constants() {
        for c in [0.0, 0.05, 0.3, -0.2] {
            let s = AdaptedSplitting::new(6, vec![0, 1, 2], vec![3, 4, 5]).unwrap();
            let k = constants(
                &su2xsu2(c),
                &s,
                &MetricSpec::default(),
                VerticalStrategy::FrameFlat,
            )
            .unwrap();
            assert!(
                close(k.as_tuple(), (2.0, 2.0, 2.0, c.abs(), 2.0 * c * c)),
                "c = {c}: {:?}",
                k.as_tuple()
            );
            assert!(k.feasible_kappa3);
        }
    }

    #[test]
    fn hopf_constants() {
        let s = AdaptedSplitting::new(3, vec![0, 1], vec![2]).unwrap();
        let k = constants(&su2(), &s, &MetricSpec::default(), VerticalStrategy::Bott).unwrap();
        assert!(
            close(k.as_tuple(), (1.0, 2.0, 1.0, 0.0, 0.0)),
            "{:?}",
            k.as_tuple()
        );
    }

    #[test]
    fn riemannian_constants_skip_vertical() {
        let s = AdaptedSplitting::new(3, vec![0, 1, 2], vec![]).unwrap();
        let k = constants(&su2(), &s, &MetricSpec::default(), VerticalStrategy::Bott).unwrap();
        assert!((k.rho1 - 0.5).abs() < 1e-12);
        assert_eq!((k.rho2, k.kappa2, k.kappa3, k.m), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn not_step_two_is_reported() {
        // H = {X1, X2, X3} spans a subalgebra isomorphic to so(3)
        let s = AdaptedSplitting::new(6, vec![0, 1, 2], vec![3, 4, 5]).unwrap();
        let err = constants(
            &so4(),
            &s,
            &MetricSpec::default(),
            VerticalStrategy::FrameFlat,
        )
        .unwrap_err();
        assert!(matches!(err, ConstantsError::NotStepTwo { .. }));
    }

    #[test]
    fn vertical_scaling_follows_weights() {
        let eps = 4.0;
        let s = AdaptedSplitting::new(6, vec![0, 1, 2], vec![3, 4, 5]).unwrap();
        let c = 0.1;
        let k = constants(
            &su2xsu2(c),
            &s,
            &MetricSpec::new(eps).unwrap(),
            VerticalStrategy::FrameFlat,
        )
        .unwrap();
        let want = (2.0, 2.0 / eps, 2.0 / eps, c / eps.sqrt(), 2.0 * c * c);
        assert!(close(k.as_tuple(), want), "{:?}", k.as_tuple());
    }

    #[test]
    fn extremizers_reproduce_values() {
        let s = AdaptedSplitting::new(6, vec![0, 1, 2], vec![3, 4, 5]).unwrap();
        for eps in [0.5, 1.0, 3.0] {
            let k = constants(
                &su2xsu2(0.3),
                &s,
                &MetricSpec::new(eps).unwrap(),
                VerticalStrategy::FrameFlat,
            )
            .unwrap();
            let e = k.extraction.unwrap();
            for x in [Some(e.rho1), e.rho2, Some(e.kappa1), e.kappa2, e.kappa3]
                .into_iter()
                .flatten()
            {
                assert!(x.tightness_residual() < 1e-9, "eps = {eps}: {x:?}");
            }
        }
    }
}
