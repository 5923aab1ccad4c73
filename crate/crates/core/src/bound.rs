//! Spectral gap lower bounds from the curvature constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::GapConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    General,
    YangMills,
    TotallyGeodesic,
    Riemannian,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::General,
        Variant::YangMills,
        Variant::TotallyGeodesic,
        Variant::Riemannian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::YangMills => "yang_mills",
            Variant::TotallyGeodesic => "totally_geodesic",
            Variant::Riemannian => "riemannian",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("{} bound not applicable: margin {margin:.6e} <= 0", variant.name())]
    NotApplicable { variant: Variant, margin: f64 },
    #[error("kappa3 is infeasible: symmetrized W has horizontal block {horizontal:.3e} and mixed block {mixed:.3e}")]
    InfeasibleKappa3 { horizontal: f64, mixed: f64 },
    #[error("{} variant hypothesis fails: {reason}", variant.name())]
    HypothesisFailed { variant: Variant, reason: String },
    #[error("no sign change on [{lo}, {hi}]: values {lo_value:.6e} and {hi_value:.6e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        lo_value: f64,
        hi_value: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub variant: Variant,
    /// Certified lower bound on `−λ₁`.
    pub value: f64,
    pub applicability_margin: f64,
    pub inputs: GapConstants,
}

/// `ρ₁ρ₂ − 4κ₂² − 3κ₁κ₃ − 8κ₂√(κ₁κ₃)`; the general bound needs it positive.
pub fn applicability_margin(k: &GapConstants) -> f64 {
    k.rho1 * k.rho2
        - 4.0 * k.kappa2 * k.kappa2
        - 3.0 * k.kappa1 * k.kappa3
        - 8.0 * k.kappa2 * (k.kappa1 * k.kappa3).sqrt()
}

fn frac(n: usize) -> f64 {
    (n as f64 - 1.0) / n as f64
}

/// `(√(N/D + t²) − t)² − κ₃` with `t = 4κ₂√κ₁ / D`.
fn general_value(k: &GapConstants, kappa3: f64) -> f64 {
    let q = frac(k.n);
    let d = q * k.rho2 + 3.0 * k.kappa1;
    let num = k.rho1 * k.rho2 - 4.0 * k.kappa2 * k.kappa2 + q * k.rho2 * kappa3;
    let t = 4.0 * k.kappa2 * k.kappa1.sqrt() / d;
    if t == 0.0 {
        num / d - kappa3
    } else {
        let s = (num / d + t * t).sqrt() - t;
        s * s - kappa3
    }
}

fn require_feasible(k: &GapConstants) -> Result<(), BoundError> {
    if k.feasible_kappa3 {
        return Ok(());
    }
    let (horizontal, mixed) = k
        .extraction
        .as_ref()
        .map(|e| (e.w_blocks.horizontal, e.w_blocks.mixed))
        .unwrap_or((f64::NAN, f64::NAN));
    Err(BoundError::InfeasibleKappa3 { horizontal, mixed })
}

fn require_small(variant: Variant, name: &str, value: f64, tol: f64) -> Result<(), BoundError> {
    if value <= tol {
        Ok(())
    } else {
        Err(BoundError::HypothesisFailed {
            variant,
            reason: format!("{name} = {value:.6e} exceeds tolerance {tol:.0e}"),
        })
    }
}

/// Evaluates one variant of the bound. `tol` decides when a constant counts
/// as zero for the special-case variants.
pub fn evaluate_bound(
    k: &GapConstants,
    variant: Variant,
    tol: f64,
) -> Result<BoundResult, BoundError> {
    let result = |value: f64, margin: f64| BoundResult {
        variant,
        value,
        applicability_margin: margin,
        inputs: k.clone(),
    };
    let not_applicable = |margin: f64| BoundError::NotApplicable { variant, margin };

    if variant == Variant::Riemannian {
        if k.m != 0 {
            return Err(BoundError::HypothesisFailed {
                variant,
                reason: format!("vertical rank is {}, not 0", k.m),
            });
        }
        if k.n < 2 {
            return Err(BoundError::HypothesisFailed {
                variant,
                reason: "dimension must be at least 2".into(),
            });
        }
        if k.rho1 <= 0.0 {
            return Err(not_applicable(k.rho1));
        }
        return Ok(result(k.n as f64 / (k.n as f64 - 1.0) * k.rho1, k.rho1));
    }
    if k.m == 0 {
        return Err(BoundError::HypothesisFailed {
            variant,
            reason: "no vertical directions; use the riemannian variant".into(),
        });
    }

    match variant {
        Variant::General => {
            require_feasible(k)?;
            let margin = applicability_margin(k);
            if margin <= 0.0 || k.rho1 <= 0.0 || k.rho2 <= 0.0 {
                return Err(not_applicable(margin));
            }
            Ok(result(general_value(k, k.kappa3), margin))
        }
        Variant::TotallyGeodesic => {
            require_feasible(k)?;
            require_small(variant, "kappa3", k.kappa3, tol)?;
            let margin = k.rho1 * k.rho2 - 4.0 * k.kappa2 * k.kappa2;
            if margin <= 0.0 || k.rho1 <= 0.0 || k.rho2 <= 0.0 {
                return Err(not_applicable(margin));
            }
            Ok(result(general_value(k, 0.0), margin))
        }
        Variant::YangMills => {
            require_feasible(k)?;
            require_small(variant, "kappa2", k.kappa2, tol)?;
            require_small(variant, "kappa3", k.kappa3, tol)?;
            let margin = k.rho1 * k.rho2;
            if k.rho1 <= 0.0 || k.rho2 <= 0.0 {
                return Err(not_applicable(margin));
            }
            let d = frac(k.n) * k.rho2 + 3.0 * k.kappa1;
            Ok(result(k.rho1 * k.rho2 / d, margin))
        }
        Variant::Riemannian => unreachable!(),
    }
}

/// Constants of the metric with vertical part scaled by `1/ε`, expressed
/// through the constants at `ε = 1`.
pub fn rescale_constants(k: &GapConstants, epsilon: f64) -> Result<GapConstants, BoundError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(BoundError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(GapConstants {
        rho2: k.rho2 / epsilon,
        kappa1: k.kappa1 / epsilon,
        kappa2: k.kappa2 / epsilon.sqrt(),
        extraction: None,
        ..k.clone()
    })
}

/// Sup/inf data of the conformal factor `f` entering the su(2) bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalNorms {
    /// `inf f`.
    pub m: f64,
    /// `sup f − inf f`.
    pub big_m: f64,
    /// `‖df‖_{L∞(g_H*)}`.
    pub df_sup: f64,
    /// `‖Lf‖_{L∞}`.
    pub lf_sup: f64,
}

impl ConformalNorms {
    /// Norms for `f = c|z₁|²` as stated with the example: `df_sup = Lf_sup = 2c`.
    pub fn default_for(c: f64) -> Self {
        Self {
            m: 0.0,
            big_m: c,
            df_sup: 2.0 * c,
            lf_sup: 2.0 * c,
        }
    }

    /// Equivalent manual constants for the totally geodesic variant.
    pub fn constants(&self) -> GapConstants {
        let top = self.m + self.big_m;
        GapConstants::manual(
            (-2.0 * top).exp() * (1.0 - self.lf_sup),
            2.0 * (-4.0 * top).exp(),
            (-4.0 * self.m).exp(),
            (-3.0 * self.m).exp() * self.df_sup,
            0.0,
            2,
            1,
        )
    }
}

/// Bound for the conformally rescaled Hopf structure on su(2), `f = c|z₁|²`.
pub fn conformal_su2_bound(
    c: f64,
    norms: Option<ConformalNorms>,
) -> Result<BoundResult, BoundError> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(BoundError::InvalidParameter(format!(
            "c must be nonnegative, got {c}"
        )));
    }
    let nm = norms.unwrap_or_else(|| ConformalNorms::default_for(c));
    let a = (-4.0 * nm.big_m).exp() + 3.0;
    let inner = 2.0 * (-6.0 * nm.big_m).exp() * (1.0 - nm.lf_sup) - 4.0 * nm.df_sup * nm.df_sup;
    let variant = Variant::TotallyGeodesic;
    if inner <= 0.0 {
        return Err(BoundError::NotApplicable {
            variant,
            margin: inner,
        });
    }
    let t = 4.0 * nm.df_sup / a;
    let s = (inner / a + t * t).sqrt() - t;
    Ok(BoundResult {
        variant,
        value: (-2.0 * nm.m).exp() * s * s,
        applicability_margin: inner,
        inputs: nm.constants(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub parameter: f64,
    /// `None` when the bound is not available at this parameter.
    pub value: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Midpoint of `bracket`.
    pub threshold: f64,
    /// `bracket.0` has a positive bound, `bracket.1` does not.
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub table: Vec<SweepSample>,
}

pub const SWEEP_MAX_ITER: usize = 200;
pub const SWEEP_DEFAULT_TOL: f64 = 1e-10;
pub const SWEEP_SAMPLES: usize = 21;

/// Locates where a positive bound stops being positive by bisection.
///
/// Errors from `bound` count as nonpositive. Requires `bound(lo) > 0 ≥ bound(hi)`.
pub fn sweep_threshold<F>(bound: F, lo: f64, hi: f64, tol: f64) -> Result<SweepResult, BoundError>
where
    F: Fn(f64) -> Result<f64, BoundError> + Sync,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(BoundError::InvalidParameter(format!(
            "need lo < hi and tol > 0, got [{lo}, {hi}] and {tol}"
        )));
    }
    let positive = |x: f64| matches!(bound(x), Ok(v) if v > 0.0);
    let signed = |x: f64| bound(x).unwrap_or(f64::NEG_INFINITY);
    if !positive(lo) || positive(hi) {
        return Err(BoundError::NoSignChange {
            lo,
            hi,
            lo_value: signed(lo),
            hi_value: signed(hi),
        });
    }

    let (mut a, mut b) = (lo, hi);
    let mut iterations = 0;
    while b - a > tol && iterations < SWEEP_MAX_ITER {
        let mid = 0.5 * (a + b);
        if positive(mid) {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }

    let table = (0..SWEEP_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let p = lo + (hi - lo) * i as f64 / (SWEEP_SAMPLES - 1) as f64;
            match bound(p) {
                Ok(v) => SweepSample {
                    parameter: p,
                    value: Some(v),
                    status: if v > 0.0 { "positive" } else { "nonpositive" }.into(),
                },
                Err(e) => SweepSample {
                    parameter: p,
                    value: None,
                    status: e.to_string(),
                },
            }
        })
        .collect();

    Ok(SweepResult {
        threshold: 0.5 * (a + b),
        bracket: (a, b),
        iterations,
        table,
    })
}
