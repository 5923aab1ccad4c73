//! Left-invariant connections in frame components.
//!
//! `gamma[(i, j, k)]` is the `E_k` coefficient of `∇_{E_i} E_j`. Because the
//! frame is left-invariant, covariant derivatives of frame fields have
//! constant coefficients and torsion and curvature reduce to algebra in the
//! structure constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{Diagnostic, WorstResidual};
use crate::lie::{AdaptedSplitting, LieAlgebraSpec, MetricSpec};
use crate::linalg::{Tensor3, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    LeviCivita,
    BottVertical,
    FrameFlat,
    UserSupplied,
}

/// Choice of the connection on the vertical bundle.
#[derive(Debug, Clone, PartialEq)]
pub enum VerticalStrategy {
    /// `pr_V ∇^g_{pr_V X} pr_V Y + pr_V [pr_H X, pr_V Y]`.
    Bott,
    /// The vertical frame vectors are parallel.
    FrameFlat,
    /// Explicit `Γ^V[(i, j, k)]` for vertical `j, k`; all other entries must
    /// be zero.
    UserSupplied(Tensor3),
}

impl VerticalStrategy {
    pub fn kind(&self) -> ConnectionKind {
        match self {
            VerticalStrategy::Bott => ConnectionKind::BottVertical,
            VerticalStrategy::FrameFlat => ConnectionKind::FrameFlat,
            VerticalStrategy::UserSupplied(_) => ConnectionKind::UserSupplied,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error(
        "vertical connection is not compatible with g_V: residual {residual:.3e} at \
         (∇_{along} {field}, {target})"
    )]
    IncompatibleVerticalConnection {
        along: String,
        field: String,
        target: String,
        residual: f64,
    },
    #[error("user-supplied vertical table has a nonzero entry outside the vertical block at ({0}, {1}, {2})")]
    UserTableOutsideVertical(String, String, String),
    #[error("user-supplied vertical table has dimension {got}, expected {expected}")]
    UserTableDimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    pub gamma: Tensor3,
    pub kind: ConnectionKind,
    /// `w_k Γ[i][j][k] + w_j Γ[i][k][j] = 0` over all triples.
    pub compatibility: Diagnostic,
}

impl ConnectionTable {
    pub fn metric_compatible(&self) -> bool {
        self.compatibility.passed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorsionTable {
    /// `E_k` coefficient of `T(E_i, E_j)`.
    pub t: Tensor3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTable {
    /// `E_k` coefficient of `R(E_i, E_j) E_l`, indexed `(i, j, l, k)`.
    pub r: Tensor4,
}

fn compatibility(alg: &LieAlgebraSpec, gamma: &Tensor3, weights: &[f64], tol: f64) -> Diagnostic {
    let d = alg.dim();
    let mut w = WorstResidual::new("metric compatibility", tol);
    for i in 0..d {
        for j in 0..d {
            for k in j..d {
                let r = weights[k] * gamma[(i, j, k)] + weights[j] * gamma[(i, k, j)];
                w.observe(r, || {
                    format!("(∇_{} {}, {})", alg.label(i), alg.label(j), alg.label(k))
                });
            }
        }
    }
    w.finish()
}

/// Koszul formula for a left-invariant metric that is diagonal in the frame:
/// `2 w_k Γ[i][j][k] = w_k c[i][j][k] − w_i c[j][k][i] + w_j c[k][i][j]`.
pub fn levi_civita(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    metric: &MetricSpec,
) -> ConnectionTable {
    levi_civita_with_tol(alg, split, metric, crate::DEFAULT_TOL)
}

pub fn levi_civita_with_tol(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    metric: &MetricSpec,
    tol: f64,
) -> ConnectionTable {
    let w = metric.weights(split);
    let gamma = Tensor3::from_fn(alg.dim(), |i, j, k| {
        0.5 * (alg.c(i, j, k) - w[i] / w[k] * alg.c(j, k, i) + w[j] / w[k] * alg.c(k, i, j))
    });
    let compatibility = compatibility(alg, &gamma, &w, tol);
    ConnectionTable {
        gamma,
        kind: ConnectionKind::LeviCivita,
        compatibility,
    }
}

/// Adapted connection
/// `∇_X Y = pr_H ∇^g_{pr_H X} pr_H Y + pr_H [pr_V X, pr_H Y] + ∇^V_X pr_V Y`.
///
/// The vertical block must be compatible with `g_V`; otherwise the choice is
/// rejected. Failures in the horizontal block (a complement that is not
/// metric preserving) are only recorded in `compatibility`.
pub fn build_connection(
    alg: &LieAlgebraSpec,
    metric: &MetricSpec,
    split: &AdaptedSplitting,
    strategy: &VerticalStrategy,
    tol: f64,
) -> Result<ConnectionTable, ConnectionError> {
    let d = alg.dim();
    let lc = levi_civita_with_tol(alg, split, metric, tol).gamma;
    let h = |a: usize| split.is_horizontal(a);
    let v = |a: usize| split.is_vertical(a);

    if let VerticalStrategy::UserSupplied(table) = strategy {
        if table.dim() != d {
            return Err(ConnectionError::UserTableDimension {
                expected: d,
                got: table.dim(),
            });
        }
        if let Some(((i, j, k), _)) = table
            .nonzero(0.0)
            .into_iter()
            .find(|((_, j, k), _)| !(v(*j) && v(*k)))
        {
            return Err(ConnectionError::UserTableOutsideVertical(
                alg.label(i).into(),
                alg.label(j).into(),
                alg.label(k).into(),
            ));
        }
    }

    let gamma = Tensor3::from_fn(d, |i, j, k| {
        if h(j) && h(k) {
            if h(i) {
                lc[(i, j, k)]
            } else {
                alg.c(i, j, k)
            }
        } else if v(j) && v(k) {
            match strategy {
                VerticalStrategy::Bott if v(i) => lc[(i, j, k)],
                VerticalStrategy::Bott => alg.c(i, j, k),
                VerticalStrategy::FrameFlat => 0.0,
                VerticalStrategy::UserSupplied(t) => t[(i, j, k)],
            }
        } else {
            0.0
        }
    });

    let w = metric.weights(split);
    let mut worst: Option<((usize, usize, usize), f64)> = None;
    for i in 0..d {
        for &j in split.vertical() {
            for &k in split.vertical().iter().filter(|&&k| k >= j) {
                let r = (w[k] * gamma[(i, j, k)] + w[j] * gamma[(i, k, j)]).abs();
                if worst.is_none_or(|(_, x)| r > x) {
                    worst = Some(((i, j, k), r));
                }
            }
        }
    }
    if let Some(((i, j, k), residual)) = worst.filter(|(_, r)| *r > tol) {
        return Err(ConnectionError::IncompatibleVerticalConnection {
            along: alg.label(i).into(),
            field: alg.label(j).into(),
            target: alg.label(k).into(),
            residual,
        });
    }
    let compatibility = compatibility(alg, &gamma, &w, tol);
    Ok(ConnectionTable {
        gamma,
        kind: strategy.kind(),
        compatibility,
    })
}

/// `T[i][j][k] = Γ[i][j][k] − Γ[j][i][k] − c[i][j][k]`.
pub fn torsion(alg: &LieAlgebraSpec, conn: &ConnectionTable) -> TorsionTable {
    let g = &conn.gamma;
    TorsionTable {
        t: Tensor3::from_fn(alg.dim(), |i, j, k| {
            g[(i, j, k)] - g[(j, i, k)] - alg.c(i, j, k)
        }),
    }
}

/// `R(E_i, E_j) = Γ_i Γ_j − Γ_j Γ_i − Σ_s c[i][j][s] Γ_s` as matrices on the
/// field index.
pub fn curvature(alg: &LieAlgebraSpec, conn: &ConnectionTable) -> CurvatureTable {
    let d = alg.dim();
    let g = &conn.gamma;
    let mut r = Tensor4::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                for k in 0..d {
                    let mut acc = 0.0;
                    for s in 0..d {
                        acc += g[(j, l, s)] * g[(i, s, k)]
                            - g[(i, l, s)] * g[(j, s, k)]
                            - alg.c(i, j, s) * g[(s, l, k)];
                    }
                    r[(i, j, l, k)] = acc;
                }
            }
        }
    }
    CurvatureTable { r }
}

/// `(∇_{E_i} T)(E_a, E_b)`, indexed `(i, a, b, l)` for the `E_l` coefficient.
pub fn torsion_derivative(conn: &ConnectionTable, t: &TorsionTable) -> Tensor4 {
    let g = &conn.gamma;
    let t = &t.t;
    let d = t.dim();
    let mut out = Tensor4::zeros(d);
    for i in 0..d {
        for a in 0..d {
            for b in 0..d {
                for l in 0..d {
                    let mut acc = 0.0;
                    for s in 0..d {
                        acc += t[(a, b, s)] * g[(i, s, l)]
                            - g[(i, a, s)] * t[(s, b, l)]
                            - g[(i, b, s)] * t[(a, s, l)];
                    }
                    out[(i, a, b, l)] = acc;
                }
            }
        }
    }
    out
}

/// First Bianchi identity with torsion:
/// `𝔖 R(X, Y)Z = 𝔖 [(∇_X T)(Y, Z) + T(T(X, Y), Z)]`, cyclic over `(X, Y, Z)`.
pub fn first_bianchi(alg: &LieAlgebraSpec, conn: &ConnectionTable, tol: f64) -> Diagnostic {
    let d = alg.dim();
    let t = torsion(alg, conn);
    let r = curvature(alg, conn);
    let dt = torsion_derivative(conn, &t);
    let tt = &t.t;
    let mut w = WorstResidual::new("first Bianchi identity", tol);
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                for k in 0..d {
                    let mut lhs = 0.0;
                    let mut rhs = 0.0;
                    for (p, q, s) in [(x, y, z), (y, z, x), (z, x, y)] {
                        lhs += r.r[(p, q, s, k)];
                        rhs += dt[(p, q, s, k)];
                        for u in 0..d {
                            rhs += tt[(p, q, u)] * tt[(u, s, k)];
                        }
                    }
                    w.observe(lhs - rhs, || {
                        format!(
                            "({}, {}, {}; {})",
                            alg.label(x),
                            alg.label(y),
                            alg.label(z),
                            alg.label(k)
                        )
                    });
                }
            }
        }
    }
    w.finish()
}

/// `⟨R(E_i, E_j) v, v⟩_g = 0`, i.e. `w_k R[i][j][l][k] = −w_l R[i][j][k][l]`.
pub fn curvature_skew(
    alg: &LieAlgebraSpec,
    split: &AdaptedSplitting,
    metric: &MetricSpec,
    r: &CurvatureTable,
    tol: f64,
) -> Diagnostic {
    let d = alg.dim();
    let w8 = metric.weights(split);
    let mut w = WorstResidual::new("curvature skew-symmetry", tol);
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                for k in l..d {
                    let res = w8[k] * r.r[(i, j, l, k)] + w8[l] * r.r[(i, j, k, l)];
                    w.observe(res, || {
                        format!(
                            "(R({}, {}) {}, {})",
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::builtin::*;

    const TOL: f64 = 1e-9;

    fn so4_setup() -> (LieAlgebraSpec, AdaptedSplitting) {
        let a = so4();
        let s = AdaptedSplitting::new(6, vec![0, 1, 2, 3], vec![4, 5]).unwrap();
        (a, s)
    }

    fn su2xsu2_setup(c: f64) -> (LieAlgebraSpec, AdaptedSplitting) {
        (
            su2xsu2(c),
            AdaptedSplitting::new(6, vec![0, 1, 2], vec![3, 4, 5]).unwrap(),
        )
    }

    #[test]
    fn abelian_is_flat() {
        let a = LieAlgebraSpec::new(vec!["a".into(), "b".into()], Tensor3::zeros(2)).unwrap();
        let s = AdaptedSplitting::new(2, vec![0], vec![1]).unwrap();
        let lc = levi_civita(&a, &s, &MetricSpec::default());
        assert_eq!(lc.gamma.max_abs(), 0.0);
        assert_eq!(curvature(&a, &lc).r.max_abs(), 0.0);
    }

    #[test]
    fn so4_levi_civita_is_half_bracket() {
        let (a, s) = so4_setup();
        let lc = levi_civita(&a, &s, &MetricSpec::default());
        assert_eq!(lc.gamma[(0, 1, 2)], -0.5);
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    assert!((lc.gamma[(i, j, k)] - 0.5 * a.c(i, j, k)).abs() < 1e-15);
                }
            }
        }
        assert!(torsion(&a, &lc).t.max_abs() < 1e-12);
        assert!(lc.metric_compatible());
    }

    #[test]
    fn su2_levi_civita_and_sectional_curvature() {
        let a = su2();
        let s = AdaptedSplitting::new(3, vec![0, 1, 2], vec![]).unwrap();
        let lc = levi_civita(&a, &s, &MetricSpec::default());
        assert_eq!(lc.gamma[(0, 1, 2)], 0.5);
        assert!(torsion(&a, &lc).t.max_abs() < 1e-12);
        // bi-invariant oracle: ⟨R(X,Y)Y,X⟩ = ¼|[X,Y]|²
        let r = curvature(&a, &lc);
        let bracket = a.bracket(&a.unit(0), &a.unit(1)).unwrap();
        let oracle = 0.25 * bracket.iter().map(|x| x * x).sum::<f64>();
        assert!((r.r[(0, 1, 1, 0)] - oracle).abs() < 1e-12);
        assert!((r.r[(0, 1, 1, 0)] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn levi_civita_torsion_free_with_scaled_metric() {
        for eps in [0.5, 2.0, 10.0] {
            let (a, s) = su2xsu2_setup(0.3);
            let m = MetricSpec::new(eps).unwrap();
            let lc = levi_civita(&a, &s, &m);
            assert!(torsion(&a, &lc).t.max_abs() < 1e-12);
            assert!(lc.metric_compatible(), "{:?}", lc.compatibility);
        }
    }

    #[test]
    fn so4_bott_connection_entries() {
        let (a, s) = so4_setup();
        let conn =
            build_connection(&a, &MetricSpec::default(), &s, &VerticalStrategy::Bott, TOL).unwrap();
        let g = &conn.gamma;
        // ∇_{Z1} X2 = -X4, ∇_{X2} Z1 = 0
        assert_eq!(g[(4, 1, 3)], -1.0);
        assert!((0..6).all(|k| g[(1, 4, k)] == 0.0));
        // ∇_{X1} Z1 = -Z2, ∇_{X1} X2 = -½ X3
        assert_eq!(g[(0, 4, 5)], -1.0);
        assert_eq!(g[(0, 1, 2)], -0.5);
        assert!(conn.metric_compatible());
    }

    #[test]
    fn so4_torsion_table() {
        let (a, s) = so4_setup();
        let conn =
            build_connection(&a, &MetricSpec::default(), &s, &VerticalStrategy::Bott, TOL).unwrap();
        let t = torsion(&a, &conn).t;
        // T(X2, X4) = Z1, T(X3, X4) = Z2, T(Z1, Z2) = X1, T(X1, ·) = 0
        assert_eq!(t[(1, 3, 4)], 1.0);
        assert_eq!(t[(2, 3, 5)], 1.0);
        assert_eq!(t[(4, 5, 0)], 1.0);
        assert!((0..6).all(|j| (0..6).all(|k| t[(0, j, k)] == 0.0)));
        assert_eq!(t.nonzero(1e-12).len(), 6);
    }

    #[test]
    fn su2xsu2_frame_flat_entries() {
        let c = 0.3;
        let (a, s) = su2xsu2_setup(c);
        let conn = build_connection(
            &a,
            &MetricSpec::default(),
            &s,
            &VerticalStrategy::FrameFlat,
            TOL,
        )
        .unwrap();
        let g = &conn.gamma;
        // ∇_{Yp} Xc = -Zm, ∇_{Xc} Ym = c Zm
        assert!((g[(4, 0, 2)] + 1.0).abs() < 1e-12);
        assert!((g[(0, 1, 2)] - c).abs() < 1e-12);
        assert!((g[(0, 2, 1)] + c).abs() < 1e-12);
        assert!(conn.metric_compatible());

        let t = torsion(&a, &conn).t;
        // T(Xc, Ym) = -Zp, T(Xc, Yp) = -c Zp, T(Ym, Zm) = -Xp
        assert!((t[(0, 1, 5)] + 1.0).abs() < 1e-12);
        assert!((t[(0, 4, 5)] + c).abs() < 1e-12);
        assert!((t[(1, 2, 3)] + 1.0).abs() < 1e-12);

        let r = curvature(&a, &conn).r;
        // ⟨R(Ym, Xc) Xc, Ym⟩ = 1
        assert!((r[(1, 0, 0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn su2xsu2_rejects_bott_for_nonzero_c() {
        let (a, s) = su2xsu2_setup(0.3);
        let err = build_connection(&a, &MetricSpec::default(), &s, &VerticalStrategy::Bott, TOL)
            .unwrap_err();
        match err {
            ConnectionError::IncompatibleVerticalConnection {
                along, residual, ..
            } => {
                assert_eq!(along, "Ym");
                assert!((residual - 0.3).abs() < 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
        let (a, s) = su2xsu2_setup(0.0);
        assert!(
            build_connection(&a, &MetricSpec::default(), &s, &VerticalStrategy::Bott, TOL).is_ok()
        );
    }

    #[test]
    fn user_supplied_tables_are_validated() {
        let (a, s) = so4_setup();
        let m = MetricSpec::default();
        // ∇_{X1} Z1 = Z2, ∇_{X1} Z2 = -Z1 is skew: accepted
        let mut t = Tensor3::zeros(6);
        t[(0, 4, 5)] = 1.0;
        t[(0, 5, 4)] = -1.0;
        let ok =
            build_connection(&a, &m, &s, &VerticalStrategy::UserSupplied(t.clone()), TOL).unwrap();
        assert_eq!(ok.kind, ConnectionKind::UserSupplied);
        // symmetric part is rejected
        t[(0, 5, 4)] = 1.0;
        assert!(matches!(
            build_connection(&a, &m, &s, &VerticalStrategy::UserSupplied(t), TOL),
            Err(ConnectionError::IncompatibleVerticalConnection { .. })
        ));
        let mut bad = Tensor3::zeros(6);
        bad[(0, 0, 4)] = 1.0;
        assert!(matches!(
            build_connection(&a, &m, &s, &VerticalStrategy::UserSupplied(bad), TOL),
            Err(ConnectionError::UserTableOutsideVertical(..))
        ));
    }

    #[test]
    fn adapted_connections_preserve_splitting() {
        let cases = [
            (so4_setup(), VerticalStrategy::Bott),
            (su2xsu2_setup(0.3), VerticalStrategy::FrameFlat),
            (su2xsu2_setup(0.0), VerticalStrategy::Bott),
        ];
        for ((a, s), strategy) in cases {
            let conn =
                build_connection(&a, &MetricSpec::new(2.0).unwrap(), &s, &strategy, TOL).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        if s.is_horizontal(j) != s.is_horizontal(k) {
                            assert_eq!(conn.gamma[(i, j, k)], 0.0);
                        }
                    }
                }
            }
            assert!(conn.metric_compatible());
        }
    }

    #[test]
    fn bianchi_and_skew_on_builtins() {
        let cases = [
            (so4_setup(), VerticalStrategy::Bott),
            (su2xsu2_setup(0.3), VerticalStrategy::FrameFlat),
            (su2xsu2_setup(0.1), VerticalStrategy::FrameFlat),
        ];
        for ((a, s), strategy) in cases {
            let m = MetricSpec::default();
            let conn = build_connection(&a, &m, &s, &strategy, TOL).unwrap();
            let b = first_bianchi(&a, &conn, TOL);
            assert!(b.passed, "{b:?}");
            let r = curvature(&a, &conn);
            assert!(curvature_skew(&a, &s, &m, &r, TOL).passed);
            for i in 0..6 {
                for j in 0..6 {
                    for l in 0..6 {
                        for k in 0..6 {
                            assert!((r.r[(i, j, l, k)] + r.r[(j, i, l, k)]).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}
