//! Exact spectra of left-invariant sub-Laplacians on SU(2), SU(2)×SU(2) and
//! SO(4) by enumerating irreducible representations.
//!
//! SO(4) is handled on its double cover SU(2)×SU(2): an irrep `(j₁, j₂)`
//! descends iff the central element `(−1, −1)` acts trivially, i.e. iff
//! `2j₁ + 2j₂` is even.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{builtin, generated_flag, BracketGenerating, LieAlgebraSpec, LieError};
use crate::linalg::{hermitian_eigenvalues, CMatrix, LinalgError};

type C64 = Complex<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeterWeylError {
    #[error("irrep {two_j:?} does not descend to SO(4): 2j1 + 2j2 is odd")]
    NonDescendingIrrep { two_j: Vec<u32> },
    #[error("irrep label {two_j:?} has {got} factors, group needs {expected}")]
    LabelArity {
        two_j: Vec<u32>,
        expected: usize,
        got: usize,
    },
    #[error("horizontal fields are not bracket generating (span stalls at dimension {dimension})")]
    NotBracketGenerating { dimension: usize },
    #[error("cutoff must be at least 1")]
    BadCutoff,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Su2,
    Su2xsu2,
    So4,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Su2 => "su2",
            Group::Su2xsu2 => "su2xsu2",
            Group::So4 => "so4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "su2" => Some(Group::Su2),
            "su2xsu2" => Some(Group::Su2xsu2),
            "so4" => Some(Group::So4),
            _ => None,
        }
    }

    pub fn factors(self) -> usize {
        match self {
            Group::Su2 => 1,
            Group::Su2xsu2 | Group::So4 => 2,
        }
    }

    /// The Lie algebra in the frame the representation matrices are indexed by.
    pub fn algebra(self) -> LieAlgebraSpec {
        match self {
            Group::Su2 => builtin::su2(),
            Group::Su2xsu2 => builtin::su2_sum(),
            Group::So4 => builtin::so4(),
        }
    }
}

/// Rows: coordinates of the so(4) frame `X1..X4, Z1, Z2` in the product
/// frame `X1, Y1, Z1, X2, Y2, Z2` of su(2) ⊕ su(2), through the self-dual and
/// anti-self-dual parts `K±_a = −½(B²³ ± B¹⁴, B³¹ ± B²⁴, B¹² ± B³⁴)`.
pub fn so4_in_product_frame() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        6,
        6,
        &[
            0.0, 0.0, -1.0, 0.0, 0.0, -1.0, // B12
            -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, // B14
            0.0, -1.0, 0.0, 0.0, 1.0, 0.0, // B24
            0.0, 0.0, -1.0, 0.0, 0.0, 1.0, // B34
            0.0, 1.0, 0.0, 0.0, 1.0, 0.0, // B13
            -1.0, 0.0, 0.0, -1.0, 0.0, 0.0, // B23
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IrrepLabel {
    pub two_j: Vec<u32>,
    pub descends_to_quotient: bool,
}

impl IrrepLabel {
    pub fn new(two_j: Vec<u32>) -> Self {
        let descends_to_quotient = two_j.iter().sum::<u32>() % 2 == 0;
        Self {
            two_j,
            descends_to_quotient,
        }
    }

    pub fn dim(&self) -> usize {
        self.two_j.iter().map(|&t| t as usize + 1).product()
    }

    pub fn level(&self) -> u32 {
        self.two_j.iter().sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.two_j.iter().all(|&t| t == 0)
    }
}

/// `dπ(X), dπ(Y), dπ(Z)` on spin `j = two_j/2`: `−iJ_x, −iJ_y, −iJ_z` in the
/// basis `m = j, j−1, …, −j`. Satisfies `[dπ(X), dπ(Y)] = dπ(Z)`.
pub fn spin_generators(two_j: u32) -> [CMatrix; 3] {
    let n = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let m = |r: usize| j - r as f64;
    // ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1))
    let mut jp = CMatrix::zeros(n, n);
    for r in 1..n {
        let mm = m(r);
        jp[(r - 1, r)] = C64::new((j * (j + 1.0) - mm * (mm + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let half = C64::new(0.5, 0.0);
    let jx = (&jp + &jm) * half;
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    let jz = CMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(m(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mi = C64::new(0.0, -1.0);
    [jx * mi, jy * mi, jz * mi]
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    CMatrix::from_fn(ra * rb, ca * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

fn combine(frame: &[CMatrix], coeffs: &[f64]) -> CMatrix {
    let n = frame[0].nrows();
    let mut out = CMatrix::zeros(n, n);
    for (m, &x) in frame.iter().zip(coeffs) {
        if x != 0.0 {
            out += m * C64::new(x, 0.0);
        }
    }
    out
}

/// Representation matrices of the frame of `group.algebra()` on the irrep `label`.
pub fn build_rep(group: Group, label: &IrrepLabel) -> Result<Vec<CMatrix>, PeterWeylError> {
    if label.two_j.len() != group.factors() {
        return Err(PeterWeylError::LabelArity {
            two_j: label.two_j.clone(),
            expected: group.factors(),
            got: label.two_j.len(),
        });
    }
    if group == Group::Su2 {
        return Ok(spin_generators(label.two_j[0]).to_vec());
    }
    if group == Group::So4 && !label.descends_to_quotient {
        return Err(PeterWeylError::NonDescendingIrrep {
            two_j: label.two_j.clone(),
        });
    }
    let (a, b) = (
        spin_generators(label.two_j[0]),
        spin_generators(label.two_j[1]),
    );
    let ia = CMatrix::identity(a[0].nrows(), a[0].nrows());
    let ib = CMatrix::identity(b[0].nrows(), b[0].nrows());
    let mut product: Vec<CMatrix> = a.iter().map(|m| kron(m, &ib)).collect();
    product.extend(b.iter().map(|m| kron(&ia, m)));
    if group == Group::Su2xsu2 {
        return Ok(product);
    }
    let rows = so4_in_product_frame();
    Ok((0..6)
        .map(|r| {
            let coeffs: Vec<f64> = rows.row(r).iter().copied().collect();
            combine(&product, &coeffs)
        })
        .collect())
}

/// Scalar by which `(−1, −1) = exp(2π(Z1 + Z2))` acts on the product irrep;
/// computed from the diagonal generators.
pub fn central_action(label: &IrrepLabel) -> Result<f64, PeterWeylError> {
    let rep = build_rep(
        Group::Su2xsu2,
        &IrrepLabel {
            descends_to_quotient: true,
            ..label.clone()
        },
    )?;
    let gen = &rep[2] + &rep[5];
    let n = gen.nrows();
    let phases: Vec<C64> = (0..n)
        .map(|i| (gen[(i, i)] * C64::new(2.0 * std::f64::consts::PI, 0.0)).exp())
        .collect();
    let first = phases[0];
    debug_assert!(phases.iter().all(|p| (p - first).norm() < 1e-9));
    Ok(first.re.round())
}

/// `−Σ_i dπ(X_i)²` for horizontal fields given as frame coordinates.
pub fn rep_sublaplacian(rep: &[CMatrix], h_fields: &[Vec<f64>]) -> CMatrix {
    let n = rep[0].nrows();
    let mut out = CMatrix::zeros(n, n);
    for f in h_fields {
        let x = combine(rep, f);
        out -= &x * &x;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrepSpectrum {
    pub label: IrrepLabel,
    pub dim: usize,
    /// Eigenvalues of `−dπ(L)`, ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub group: Group,
    pub cutoff: u32,
    pub irreps: Vec<IrrepSpectrum>,
    pub first_gap: f64,
    /// Dimension of the `first_gap` eigenspace in `L²(G)`: each eigenvalue of
    /// `−dπ(L)` occurs `dim π` times.
    pub multiplicity: usize,
    /// `first_gap` is unchanged when the cutoff is doubled.
    pub stable: bool,
    pub min_eigenvalue: f64,
    /// Nontrivial irreps with a zero eigenvalue; must be empty.
    pub zero_modes_outside_trivial: Vec<IrrepLabel>,
}

/// All labels of level `Σ 2j ≤ cutoff`, sorted; for SO(4) descending ones only.
pub fn enumerate_labels(group: Group, cutoff: u32) -> Vec<IrrepLabel> {
    let mut out = Vec::new();
    match group {
        Group::Su2 => out.extend((0..=cutoff).map(|t| IrrepLabel::new(vec![t]))),
        Group::Su2xsu2 | Group::So4 => {
            for a in 0..=cutoff {
                for b in 0..=cutoff - a {
                    let l = IrrepLabel::new(vec![a, b]);
                    if group == Group::Su2xsu2 || l.descends_to_quotient {
                        out.push(l);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn spectra(
    group: Group,
    h_fields: &[Vec<f64>],
    cutoff: u32,
) -> Result<Vec<IrrepSpectrum>, PeterWeylError> {
    enumerate_labels(group, cutoff)
        .into_par_iter()
        .map(|label| {
            let rep = build_rep(group, &label)?;
            let eigenvalues = hermitian_eigenvalues(&rep_sublaplacian(&rep, h_fields))?;
            Ok(IrrepSpectrum {
                dim: label.dim(),
                label,
                eigenvalues,
            })
        })
        .collect()
}

fn smallest_positive(irreps: &[IrrepSpectrum], tol: f64) -> (f64, usize) {
    let gap = irreps
        .iter()
        .flat_map(|s| s.eigenvalues.iter().copied())
        .filter(|&v| v > tol)
        .fold(f64::INFINITY, f64::min);
    let mult = irreps
        .iter()
        .map(|s| {
            s.dim
                * s.eigenvalues
                    .iter()
                    .filter(|&&v| (v - gap).abs() <= tol)
                    .count()
        })
        .sum();
    (gap, mult)
}

/// Smallest positive eigenvalue of `−L` over irreps of level `≤ cutoff`.
///
/// The spectrum is computed once up to `2·cutoff`; the report keeps the
/// labels within `cutoff` and compares the two gaps for stability.
pub fn first_gap(
    group: Group,
    h_fields: &[Vec<f64>],
    cutoff: u32,
    tol: f64,
) -> Result<SpectrumReport, PeterWeylError> {
    if cutoff < 1 {
        return Err(PeterWeylError::BadCutoff);
    }
    if let BracketGenerating::NotGenerating { dimension } =
        generated_flag(&group.algebra(), h_fields, tol)?
    {
        return Err(PeterWeylError::NotBracketGenerating { dimension });
    }
    let wide = spectra(group, h_fields, 2 * cutoff)?;
    let (wide_gap, _) = smallest_positive(&wide, tol);
    let irreps: Vec<IrrepSpectrum> = wide
        .into_iter()
        .filter(|s| s.label.level() <= cutoff)
        .collect();
    let (gap, multiplicity) = smallest_positive(&irreps, tol);
    let min_eigenvalue = irreps
        .iter()
        .flat_map(|s| s.eigenvalues.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let zero_modes_outside_trivial = irreps
        .iter()
        .filter(|s| !s.label.is_trivial() && s.eigenvalues.iter().any(|v| v.abs() <= tol))
        .map(|s| s.label.clone())
        .collect();
    Ok(SpectrumReport {
        group,
        cutoff,
        irreps,
        first_gap: gap,
        multiplicity,
        stable: (gap - wide_gap).abs() <= tol,
        min_eigenvalue,
        zero_modes_outside_trivial,
    })
}
