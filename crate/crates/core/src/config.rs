//! Analysis input: TOML schema, builtin fixtures and resolution into the
//! algebraic objects the pipeline consumes.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::ConformalNorms;
use crate::connections::VerticalStrategy;
use crate::lie::{builtin, AdaptedSplitting, LieAlgebraSpec, LieError, MetricSpec};
use crate::linalg::Tensor3;
use crate::peter_weyl::Group;
use crate::DEFAULT_TOL;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub result: BTreeMap<String, f64>,
}

/// `∇_{along} field = Σ result[label] · label` on vertical fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionEntry {
    pub along: String,
    pub field: String,
    pub result: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerticalConnectionSpec {
    /// `"bott"` or `"frame_flat"`.
    Named(String),
    Table(Vec<ConnectionEntry>),
}

impl Default for VerticalConnectionSpec {
    fn default() -> Self {
        VerticalConnectionSpec::Named("bott".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
    /// Group for inline algebras; must have the same structure constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_sweep_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalSpec {
    pub c: f64,
    /// Overrides the norms derived from `c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<ConformalNorms>,
}

fn yes() -> bool {
    true
}
fn default_cutoff() -> u32 {
    6
}
fn default_sweep_tol() -> f64 {
    crate::bound::SWEEP_DEFAULT_TOL
}
fn default_epsilon() -> f64 {
    1.0
}
fn default_tolerance() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisInput {
    pub name: String,
    /// Builtin algebra: `su2`, `su2_sum`, `su2xsu2`, `so4` or `affine_line`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
    /// Family parameter `c` for `su2xsu2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<String>,
    pub horizontal: Vec<String>,
    #[serde(default)]
    pub vertical: Vec<String>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub vertical_connection: VerticalConnectionSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalSpec>,
}

/// Everything the pipeline needs, with labels resolved to frame indices.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub alg: LieAlgebraSpec,
    pub split: AdaptedSplitting,
    pub metric: MetricSpec,
    pub strategy: VerticalStrategy,
    /// Group whose irreps realize the algebra, with rows giving each input
    /// frame vector in the group's frame.
    pub group: Option<(Group, DMatrix<f64>)>,
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "so4_example",
    "su2_hopf",
    "su2_conformal",
    "su2xsu2_example",
    "su2_riemannian",
];
pub const DEFAULT_SU2XSU2_C: f64 = 0.3;
pub const DEFAULT_CONFORMAL_C: f64 = 0.1;

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn base(name: &str, algebra: &str, h: &[&str], v: &[&str], conn: &str) -> AnalysisInput {
    AnalysisInput {
        name: name.into(),
        algebra: Some(algebra.into()),
        parameter: None,
        basis: Vec::new(),
        horizontal: strings(h),
        vertical: strings(v),
        epsilon: 1.0,
        tolerance: DEFAULT_TOL,
        vertical_connection: VerticalConnectionSpec::Named(conn.into()),
        brackets: Vec::new(),
        spectrum: Some(SpectrumSpec {
            enabled: true,
            cutoff: 6,
            group: None,
        }),
        sweep: None,
        conformal: None,
    }
}

/// Named fixture; `param` sets `c` for the parametric ones.
pub fn builtin_example(name: &str, param: Option<f64>) -> Result<AnalysisInput, ConfigError> {
    let input = match name {
        "so4_example" => base(
            name,
            "so4",
            &["X1", "X2", "X3", "X4"],
            &["Z1", "Z2"],
            "bott",
        ),
        "su2_hopf" => base(name, "su2", &["X", "Y"], &["Z"], "bott"),
        "su2_riemannian" => base(name, "su2", &["X", "Y", "Z"], &[], "bott"),
        "su2_conformal" => AnalysisInput {
            conformal: Some(ConformalSpec {
                c: param.unwrap_or(DEFAULT_CONFORMAL_C),
                norms: None,
            }),
            sweep: Some(SweepSpec {
                parameter: "c".into(),
                lo: 0.0,
                hi: 0.5,
                tol: 1e-6,
            }),
            ..base(name, "su2", &["X", "Y"], &["Z"], "bott")
        },
        "su2xsu2_example" => AnalysisInput {
            parameter: Some(param.unwrap_or(DEFAULT_SU2XSU2_C)),
            sweep: Some(SweepSpec {
                parameter: "c".into(),
                lo: 0.0,
                hi: 0.5,
                tol: crate::bound::SWEEP_DEFAULT_TOL,
            }),
            ..base(
                name,
                "su2xsu2",
                &["Xc", "Ym", "Zm"],
                &["Xp", "Yp", "Zp"],
                "frame_flat",
            )
        },
        other => return Err(ConfigError::UnknownBuiltin(other.into())),
    };
    if param.is_some() && !matches!(name, "su2_conformal" | "su2xsu2_example") {
        return Err(ConfigError::SchemaViolation(format!(
            "builtin {name} takes no parameter"
        )));
    }
    Ok(input)
}

pub fn builtin_examples() -> Vec<AnalysisInput> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin_example(n, None).expect("builtin names are valid"))
        .collect()
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Parses and validates TOML input text.
pub fn parse_str(src: &str) -> Result<AnalysisInput, ConfigError> {
    let input: AnalysisInput = toml::from_str(src).map_err(|e| ConfigError::ParseError {
        line: e.span().map(|s| line_of(src, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    input.resolve()?;
    Ok(input)
}

pub fn parse_spec(path: &Path) -> Result<AnalysisInput, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&src)
}

pub fn serialize(input: &AnalysisInput) -> String {
    toml::to_string(input).expect("input is always representable")
}

fn schema(msg: impl Into<String>) -> ConfigError {
    ConfigError::SchemaViolation(msg.into())
}

fn lie_err(e: LieError) -> ConfigError {
    schema(e.to_string())
}

fn builtin_algebra(
    name: &str,
    param: Option<f64>,
) -> Result<(LieAlgebraSpec, Option<(Group, DMatrix<f64>)>), ConfigError> {
    let id = DMatrix::identity;
    if param.is_some() && name != "su2xsu2" {
        return Err(schema(format!("algebra {name} takes no parameter")));
    }
    Ok(match name {
        "su2" => (builtin::su2(), Some((Group::Su2, id(3, 3)))),
        "su2_sum" => (builtin::su2_sum(), Some((Group::Su2xsu2, id(6, 6)))),
        "so4" => (builtin::so4(), Some((Group::So4, id(6, 6)))),
        "su2xsu2" => {
            let c = param.unwrap_or(0.0);
            if !c.is_finite() {
                return Err(schema("parameter must be finite"));
            }
            (
                builtin::su2xsu2(c),
                Some((Group::Su2xsu2, builtin::su2xsu2_frame_rows(c))),
            )
        }
        "affine_line" => (builtin::affine_line(), None),
        other => return Err(ConfigError::UnknownBuiltin(other.into())),
    })
}

impl AnalysisInput {
    /// Builds the algebra, splitting, metric and strategy, checking every
    /// cross-reference.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let (alg, mut group) = match (&self.algebra, self.basis.is_empty()) {
            (Some(name), true) => {
                if !self.brackets.is_empty() {
                    return Err(schema("brackets given together with a builtin algebra"));
                }
                builtin_algebra(name, self.parameter)?
            }
            (None, false) => {
                if self.parameter.is_some() {
                    return Err(schema("parameter only applies to builtin algebras"));
                }
                let table: Vec<(String, String, Vec<(String, f64)>)> = self
                    .brackets
                    .iter()
                    .map(|b| {
                        let res = b.result.iter().map(|(k, v)| (k.clone(), *v)).collect();
                        (b.left.clone(), b.right.clone(), res)
                    })
                    .collect();
                (
                    LieAlgebraSpec::from_brackets(&self.basis, &table).map_err(lie_err)?,
                    None,
                )
            }
            (Some(_), false) => {
                return Err(schema("give either a builtin algebra or a basis, not both"))
            }
            (None, true) => return Err(schema("missing algebra: give a builtin name or a basis")),
        };

        let split = AdaptedSplitting::from_labels(&alg, &self.horizontal, &self.vertical)
            .map_err(lie_err)?;
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(schema(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        let metric = MetricSpec::new(self.epsilon).map_err(lie_err)?;

        let strategy = match &self.vertical_connection {
            VerticalConnectionSpec::Named(s) if s == "bott" => VerticalStrategy::Bott,
            VerticalConnectionSpec::Named(s) if s == "frame_flat" => VerticalStrategy::FrameFlat,
            VerticalConnectionSpec::Named(s) => {
                return Err(schema(format!(
                    "vertical_connection must be bott, frame_flat or a table, got {s:?}"
                )))
            }
            VerticalConnectionSpec::Table(entries) => {
                let idx = |l: &str| {
                    alg.index_of(l).ok_or_else(|| {
                        schema(format!("unknown label {l:?} in vertical_connection"))
                    })
                };
                let mut t = Tensor3::zeros(alg.dim());
                for e in entries {
                    let (i, j) = (idx(&e.along)?, idx(&e.field)?);
                    for (l, v) in &e.result {
                        t[(i, j, idx(l)?)] = *v;
                    }
                }
                VerticalStrategy::UserSupplied(t)
            }
        };

        if let Some(spec) = &self.spectrum {
            if let Some(gname) = &spec.group {
                let g = Group::parse(gname)
                    .ok_or_else(|| schema(format!("unknown spectrum group {gname:?}")))?;
                let reference = g.algebra();
                let same = reference.dim() == alg.dim() && {
                    let (a, b) = (reference.constants(), alg.constants());
                    a.nonzero(0.0).len() == b.nonzero(0.0).len()
                        && a.nonzero(0.0)
                            .iter()
                            .all(|(ix, v)| (b[*ix] - v).abs() <= self.tolerance)
                };
                if !same {
                    return Err(schema(format!(
                        "algebra does not match the frame of group {gname}"
                    )));
                }
                group = Some((g, DMatrix::identity(alg.dim(), alg.dim())));
            }
            if spec.cutoff < 1 {
                return Err(schema("spectrum cutoff must be at least 1"));
            }
        }

        if let Some(sw) = &self.sweep {
            if sw.parameter != "c" {
                return Err(schema(format!(
                    "only the parameter c can be swept, got {:?}",
                    sw.parameter
                )));
            }
            if !(sw.lo < sw.hi && sw.tol > 0.0) {
                return Err(schema("sweep needs lo < hi and tol > 0"));
            }
        }
        if let Some(cf) = &self.conformal {
            if !(cf.c >= 0.0 && cf.c.is_finite()) {
                return Err(schema("conformal c must be nonnegative"));
            }
        }

        Ok(Resolved {
            alg,
            split,
            metric,
            strategy,
            group,
        })
    }

    /// Copy with the family parameter set to `c`.
    pub fn with_parameter(&self, c: f64) -> AnalysisInput {
        let mut out = self.clone();
        if let Some(cf) = out.conformal.as_mut() {
            cf.c = c;
        } else {
            out.parameter = Some(c);
        }
        out
    }
}
