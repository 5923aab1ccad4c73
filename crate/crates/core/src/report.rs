//! Pipeline orchestration and certification reports.
//!
//! `analyze` never aborts on a mathematical failure: each stage records
//! its outcome and later stages that depend on it are marked skipped with
//! the reason.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::bound::{
    conformal_su2_bound, evaluate_bound, sweep_threshold, BoundError, BoundResult, SweepResult,
    Variant,
};
use crate::config::{AnalysisInput, Resolved};
use crate::connections::{build_connection, curvature, first_bianchi};
use crate::constants::{extract_constants, GapConstants};
use crate::diagnostic::{Diagnostic, WorstResidual};
use crate::geometry::{
    check_assumption_a, check_assumption_b, check_assumption_c, check_totally_geodesic,
    check_v_integrable, check_yang_mills, structure_tensors, torsion_lemma, GeometryTensors,
};
use crate::lie::{
    bracket_generating_step, check_antisymmetry, check_jacobi, check_unimodular, BracketGenerating,
};
use crate::peter_weyl::{first_gap, Group};

pub const SCHEMA_VERSION: u32 = 1;

/// Slack allowed when comparing a certified bound with a computed gap.
pub const SOUNDNESS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stage<T> {
    Completed { result: T },
    Skipped { reason: String },
    Failed { error: String },
}

impl<T> Stage<T> {
    pub fn completed(&self) -> Option<&T> {
        match self {
            Stage::Completed { result } => Some(result),
            _ => None,
        }
    }

    fn skipped(reason: impl Into<String>) -> Self {
        Stage::Skipped {
            reason: reason.into(),
        }
    }

    fn failed(error: impl ToString) -> Self {
        Stage::Failed {
            error: error.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSection {
    pub antisymmetry: Diagnostic,
    pub jacobi: Diagnostic,
    pub unimodular: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub indices: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSection {
    pub kind: crate::connections::ConnectionKind,
    pub compatibility: Diagnostic,
    /// Nonzero `∇_{E_i} E_j` coefficients as `(i, j, k)`.
    pub christoffel: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSection {
    /// Nonzero torsion coefficients `T(E_i, E_j)` on `E_k`, `i < j`.
    pub torsion: Vec<Entry>,
    pub ricci: Vec<Vec<f64>>,
    pub b_map: Vec<Vec<f64>>,
    pub s_gram: Vec<Vec<f64>>,
    pub w_form: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsSection {
    pub a: Diagnostic,
    pub b: Diagnostic,
    pub c: Diagnostic,
    pub totally_geodesic: Diagnostic,
    pub yang_mills: Diagnostic,
    pub v_integrable: Diagnostic,
    pub torsion_lemma: Vec<Diagnostic>,
    pub bianchi: Diagnostic,
}

impl AssumptionsSection {
    pub fn standing_pass(&self) -> bool {
        self.a.passed && self.b.passed && self.c.passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundOutcome {
    Certified {
        value: f64,
        applicability_margin: f64,
    },
    NotApplicable {
        margin: Option<f64>,
        reason: String,
    },
    Skipped {
        reason: String,
    },
}

impl BoundOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            BoundOutcome::Certified { value, .. } => Some(*value),
            _ => None,
        }
    }

    fn from_result(r: Result<BoundResult, BoundError>) -> Self {
        match r {
            Ok(b) => BoundOutcome::Certified {
                value: b.value,
                applicability_margin: b.applicability_margin,
            },
            Err(BoundError::NotApplicable { margin, .. }) => BoundOutcome::NotApplicable {
                margin: Some(margin),
                reason: "applicability margin is not positive".into(),
            },
            Err(e) => BoundOutcome::NotApplicable {
                margin: None,
                reason: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub variant: Variant,
    pub outcome: BoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrepSummary {
    pub two_j: Vec<u32>,
    pub dim: usize,
    pub lowest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSection {
    pub group: Group,
    pub cutoff: u32,
    pub first_gap: f64,
    pub multiplicity: usize,
    pub stable: bool,
    pub min_eigenvalue: f64,
    pub irreps: Vec<IrrepSummary>,
}

/// Computed value that differs from a stated reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub topic: String,
    pub computed: Option<f64>,
    pub reference: String,
    pub comment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    pub tolerance: f64,
    pub epsilon: f64,
    pub labels: Vec<String>,
    pub horizontal: Vec<String>,
    pub vertical: Vec<String>,
    pub validation: Stage<ValidationSection>,
    pub step: Stage<BracketGenerating>,
    pub connection: Stage<ConnectionSection>,
    pub tensors: Stage<TensorSection>,
    pub assumptions: Stage<AssumptionsSection>,
    pub constants: Stage<GapConstants>,
    pub bounds: Vec<BoundEntry>,
    pub conformal: Option<BoundOutcome>,
    pub spectrum: Stage<SpectrumSection>,
    pub soundness: Stage<Diagnostic>,
    pub sweep: Option<Stage<SweepResult>>,
    pub notes: Vec<Note>,
}

impl Report {
    pub fn bound(&self, variant: Variant) -> Option<f64> {
        self.bounds
            .iter()
            .find(|b| b.variant == variant)
            .and_then(|b| b.outcome.value())
    }

    /// Largest certified value over the invariant-operator variants.
    pub fn best_bound(&self) -> Option<(Variant, f64)> {
        self.bounds
            .iter()
            .filter_map(|b| b.outcome.value().map(|v| (b.variant, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn rows(m: &crate::linalg::Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

struct Core {
    tensors: GeometryTensors,
    assumptions: AssumptionsSection,
}

/// Connection, tensors and assumption checks; `Err` carries the stage that failed.
fn core_stages(
    r: &Resolved,
    tol: f64,
) -> Result<(crate::connections::ConnectionTable, Core), String> {
    let conn = build_connection(&r.alg, &r.metric, &r.split, &r.strategy, tol)
        .map_err(|e| e.to_string())?;
    let curv = curvature(&r.alg, &conn);
    let tensors = structure_tensors(&r.alg, &r.metric, &r.split, &conn, &curv);
    let assumptions = AssumptionsSection {
        a: check_assumption_a(&r.alg, &r.split, tol),
        b: check_assumption_b(&r.alg, &r.metric, &r.split, &tensors, tol),
        c: check_assumption_c(&r.alg, &r.split, tol),
        totally_geodesic: check_totally_geodesic(&r.alg, &r.split, tol),
        yang_mills: check_yang_mills(&r.alg, &r.split, &tensors, tol),
        v_integrable: check_v_integrable(&r.alg, &r.split, tol),
        torsion_lemma: torsion_lemma(&r.alg, &r.split, &tensors, tol),
        bianchi: first_bianchi(&r.alg, &conn, tol),
    };
    Ok((
        conn,
        Core {
            tensors,
            assumptions,
        },
    ))
}

fn standing_failure(a: &AssumptionsSection) -> String {
    let failed: Vec<&str> = [("A", &a.a), ("B", &a.b), ("C", &a.c)]
        .iter()
        .filter(|(_, d)| !d.passed)
        .map(|(n, _)| *n)
        .collect();
    format!("assumption(s) {} failed", failed.join(", "))
}

/// The invariant pipeline up to one bound variant; used for parameter sweeps.
pub fn certified_bound(input: &AnalysisInput, variant: Variant) -> Result<BoundResult, BoundError> {
    let fail = |reason: String| BoundError::HypothesisFailed { variant, reason };
    let r = input.resolve().map_err(|e| fail(e.to_string()))?;
    let tol = input.tolerance;
    let (_, core) = core_stages(&r, tol).map_err(fail)?;
    if !core.assumptions.standing_pass() {
        return Err(fail(standing_failure(&core.assumptions)));
    }
    let k = extract_constants(&core.tensors, &r.metric, &r.split, tol)
        .map_err(|e| fail(e.to_string()))?;
    evaluate_bound(&k, variant, tol)
}

/// Spectrum stage alone, as run inside `analyze`.
pub fn spectrum_for(input: &AnalysisInput) -> Stage<SpectrumSection> {
    match input.resolve() {
        Ok(r) => {
            let tol = input.tolerance;
            let valid = check_antisymmetry(&r.alg, tol).passed && check_jacobi(&r.alg, tol).passed;
            spectrum_stage(input, &r, valid)
        }
        Err(e) => Stage::failed(e),
    }
}

fn spectrum_stage(
    input: &AnalysisInput,
    r: &Resolved,
    validation_ok: bool,
) -> Stage<SpectrumSection> {
    let Some(spec) = input.spectrum.as_ref().filter(|s| s.enabled) else {
        return Stage::skipped("spectrum not requested");
    };
    if !validation_ok {
        return Stage::skipped("algebra failed validation");
    }
    let Some((group, frame)) = &r.group else {
        return Stage::skipped("no compact group is associated with this algebra");
    };
    let gens: Vec<Vec<f64>> = r
        .split
        .horizontal()
        .iter()
        .map(|&i| frame.row(i).iter().copied().collect())
        .collect();
    match first_gap(*group, &gens, spec.cutoff, input.tolerance) {
        Ok(s) => Stage::Completed {
            result: SpectrumSection {
                group: s.group,
                cutoff: s.cutoff,
                first_gap: s.first_gap,
                multiplicity: s.multiplicity,
                stable: s.stable,
                min_eigenvalue: s.min_eigenvalue,
                irreps: s
                    .irreps
                    .iter()
                    .map(|i| IrrepSummary {
                        two_j: i.label.two_j.clone(),
                        dim: i.dim,
                        lowest: i.eigenvalues.first().copied().unwrap_or(f64::NAN),
                    })
                    .collect(),
            },
        },
        Err(e) => Stage::failed(e),
    }
}

fn notes_for(input: &AnalysisInput, report: &Report) -> Vec<Note> {
    let mut notes = Vec::new();
    let alg = input.algebra.as_deref();
    let h: Vec<&str> = input.horizontal.iter().map(String::as_str).collect();

    if alg == Some("so4") && h == ["X1", "X2", "X3", "X4"] {
        notes.push(Note {
            topic: "so4 bound".into(),
            computed: report.bound(Variant::General),
            reference: "8/51".into(),
            comment: "substituting the constants (1/2, 2, 2, 0, 0) with n = 4 gives 2/15; the reference value \
                      is not reproduced"
                .into(),
        });
    }
    if alg == Some("su2xsu2") && h == ["Xc", "Ym", "Zm"] {
        let c = input.parameter.unwrap_or(0.0);
        notes.push(Note {
            topic: "su2xsu2 W form".into(),
            computed: report.constants.completed().map(|k| k.kappa3),
            reference: "2c^2 Id on vertical covectors".into(),
            comment: format!(
                "the vertical block of sym(W) is diag(2c^2, 0, 0) = diag({:.6}, 0, 0); kappa3 = 2c^2 is unchanged",
                2.0 * c * c
            ),
        });
        if let Some(Stage::Completed { result }) = &report.sweep {
            notes.push(Note {
                topic: "su2xsu2 threshold".into(),
                computed: Some(result.threshold),
                reference: format!("sqrt(11/123)/4 = {:.6}", (11.0f64 / 123.0).sqrt() / 4.0),
                comment:
                    "the closed form is positive iff c^2 < 1/8, i.e. c < 1/(2 sqrt 2) = 0.353553"
                        .into(),
            });
        }
    }
    if let Some(cf) = &input.conformal {
        notes.push(Note {
            topic: "conformal df norm".into(),
            computed: Some(cf.c / 2f64.sqrt()),
            reference: "||df|| = 2c".into(),
            comment: "|df|^2 = 2c^2 |z1|^2 |z2|^2 has supremum c^2/2; default norms keep 2c, sharper norms can be \
                      supplied"
                .into(),
        });
        if let Some(Stage::Completed { result }) = &report.sweep {
            notes.push(Note {
                topic: "conformal nontriviality range".into(),
                computed: Some(result.threshold),
                reference: "c in [0, 1.17139]".into(),
                comment: "bisection of exp(-6c)(1 - 2c) - 8c^2 gives the root reported here".into(),
            });
        }
    }
    notes
}

/// Threshold sweep over the input's parametric family; `None` without a `sweep` entry.
pub fn sweep_for(input: &AnalysisInput) -> Option<Stage<SweepResult>> {
    let sw = input.sweep.as_ref()?;
    let outcome = if input.conformal.is_some() {
        sweep_threshold(
            |c| conformal_su2_bound(c, None).map(|b| b.value),
            sw.lo,
            sw.hi,
            sw.tol,
        )
    } else if input.algebra.as_deref() == Some("su2xsu2") {
        sweep_threshold(
            |c| certified_bound(&input.with_parameter(c), Variant::General).map(|b| b.value),
            sw.lo,
            sw.hi,
            sw.tol,
        )
    } else {
        return Some(Stage::skipped("no parametric family for this input"));
    };
    Some(match outcome {
        Ok(s) => Stage::Completed { result: s },
        Err(e) => Stage::failed(e),
    })
}

/// Runs every stage on `input`.
pub fn analyze(input: &AnalysisInput) -> Report {
    let tol = input.tolerance;
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        name: input.name.clone(),
        tolerance: tol,
        epsilon: input.epsilon,
        labels: Vec::new(),
        horizontal: input.horizontal.clone(),
        vertical: input.vertical.clone(),
        validation: Stage::skipped("input did not resolve"),
        step: Stage::skipped("input did not resolve"),
        connection: Stage::skipped("input did not resolve"),
        tensors: Stage::skipped("input did not resolve"),
        assumptions: Stage::skipped("input did not resolve"),
        constants: Stage::skipped("input did not resolve"),
        bounds: Vec::new(),
        conformal: None,
        spectrum: Stage::skipped("input did not resolve"),
        soundness: Stage::skipped("input did not resolve"),
        sweep: None,
        notes: Vec::new(),
    };

    let r = match input.resolve() {
        Ok(r) => r,
        Err(e) => {
            report.validation = Stage::failed(e);
            return report;
        }
    };
    report.labels = r.alg.labels().to_vec();

    let validation = ValidationSection {
        antisymmetry: check_antisymmetry(&r.alg, tol),
        jacobi: check_jacobi(&r.alg, tol),
        unimodular: check_unimodular(&r.alg, tol),
    };
    let valid = validation.antisymmetry.passed && validation.jacobi.passed;
    report.validation = Stage::Completed { result: validation };
    report.step = Stage::Completed {
        result: bracket_generating_step(&r.alg, &r.split, tol),
    };

    let skip_bounds = |reason: &str| {
        Variant::ALL
            .iter()
            .map(|&variant| BoundEntry {
                variant,
                outcome: BoundOutcome::Skipped {
                    reason: reason.into(),
                },
            })
            .collect::<Vec<_>>()
    };

    if !valid {
        let why = "structure constants fail validation";
        report.connection = Stage::skipped(why);
        report.tensors = Stage::skipped(why);
        report.assumptions = Stage::skipped(why);
        report.constants = Stage::skipped(why);
        report.bounds = skip_bounds(why);
    } else {
        match core_stages(&r, tol) {
            Err(e) => {
                let why = "connection could not be built";
                report.connection = Stage::Failed { error: e };
                report.tensors = Stage::skipped(why);
                report.assumptions = Stage::skipped(why);
                report.constants = Stage::skipped(why);
                report.bounds = skip_bounds(why);
            }
            Ok((conn, core)) => {
                let lab = |i: usize| r.alg.label(i).to_string();
                report.connection = Stage::Completed {
                    result: ConnectionSection {
                        kind: conn.kind,
                        compatibility: conn.compatibility.clone(),
                        christoffel: conn
                            .gamma
                            .nonzero(tol)
                            .into_iter()
                            .map(|((i, j, k), value)| Entry {
                                indices: vec![lab(i), lab(j), lab(k)],
                                value,
                            })
                            .collect(),
                    },
                };
                let t = &core.tensors;
                report.tensors = Stage::Completed {
                    result: TensorSection {
                        torsion: t
                            .torsion
                            .nonzero(tol)
                            .into_iter()
                            .filter(|((i, j, _), _)| i < j)
                            .map(|((i, j, k), value)| Entry {
                                indices: vec![lab(i), lab(j), lab(k)],
                                value,
                            })
                            .collect(),
                        ricci: rows(&t.ric),
                        b_map: rows(&t.b_map),
                        s_gram: rows(&t.s_gram),
                        w_form: rows(&t.w_form),
                    },
                };
                let standing = core.assumptions.standing_pass();
                let why = standing_failure(&core.assumptions);
                report.assumptions = Stage::Completed {
                    result: core.assumptions,
                };
                if !standing {
                    report.constants = Stage::skipped(why.clone());
                    report.bounds = skip_bounds(&why);
                } else {
                    match extract_constants(&core.tensors, &r.metric, &r.split, tol) {
                        Ok(k) => {
                            report.bounds = Variant::ALL
                                .iter()
                                .map(|&variant| BoundEntry {
                                    variant,
                                    outcome: BoundOutcome::from_result(evaluate_bound(
                                        &k, variant, tol,
                                    )),
                                })
                                .collect();
                            report.constants = Stage::Completed { result: k };
                        }
                        Err(e) => {
                            report.bounds = skip_bounds("constants could not be extracted");
                            report.constants = Stage::failed(e);
                        }
                    }
                }
            }
        }
    }

    report.conformal = input
        .conformal
        .as_ref()
        .map(|cf| BoundOutcome::from_result(conformal_su2_bound(cf.c, cf.norms)));

    report.spectrum = spectrum_stage(input, &r, valid);

    report.soundness = match (report.spectrum.completed(), report.best_bound()) {
        (None, _) => Stage::skipped("no spectrum"),
        (_, None) => Stage::skipped("no certified bound"),
        (Some(s), Some((variant, value))) => {
            let mut w = WorstResidual::new("certified bound <= first gap", SOUNDNESS_SLACK);
            w.observe((value - s.first_gap).max(0.0), || {
                variant.name().to_string()
            });
            Stage::Completed { result: w.finish() }
        }
    };

    report.sweep = sweep_for(input);
    report.notes = notes_for(input, &report);
    report
}

fn reformat_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains(['.', 'e', 'E']) {
                if let Ok(x) = s.parse::<f64>() {
                    if let Ok(num) = format!("{x:.16e}").parse::<Number>() {
                        *n = num;
                    }
                }
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(reformat_numbers),
        Value::Object(m) => m.values_mut().for_each(reformat_numbers),
        _ => {}
    }
}

/// JSON with every floating-point number printed to 17 significant digits.
pub fn to_machine<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report is serializable");
    reformat_numbers(&mut v);
    serde_json::to_string_pretty(&v).expect("value is serializable") + "\n"
}

fn diag_line(out: &mut String, d: &Diagnostic) {
    let _ = writeln!(
        out,
        "  [{}] {:<44} residual {:.3e} (tol {:.0e}){}",
        if d.passed { "pass" } else { "FAIL" },
        d.check,
        d.residual,
        d.tolerance,
        d.witness
            .as_ref()
            .map(|w| format!(" at {w}"))
            .unwrap_or_default()
    );
}

fn stage_line<T>(out: &mut String, title: &str, s: &Stage<T>) -> bool {
    match s {
        Stage::Completed { .. } => {
            let _ = writeln!(out, "{title}");
            true
        }
        Stage::Skipped { reason } => {
            let _ = writeln!(out, "{title}: skipped ({reason})");
            false
        }
        Stage::Failed { error } => {
            let _ = writeln!(out, "{title}: FAILED: {error}");
            false
        }
    }
}

fn bound_line(out: &mut String, name: &str, b: &BoundOutcome) {
    let _ = match b {
        BoundOutcome::Certified {
            value,
            applicability_margin,
        } => writeln!(
            out,
            "  {name:<18} -lambda1 >= {value:.12} (margin {applicability_margin:.6})"
        ),
        BoundOutcome::NotApplicable { margin, reason } => writeln!(
            out,
            "  {name:<18} not applicable: {reason}{}",
            margin
                .map(|m| format!(" (margin {m:.6})"))
                .unwrap_or_default()
        ),
        BoundOutcome::Skipped { reason } => writeln!(out, "  {name:<18} skipped: {reason}"),
    };
}

pub fn spectrum_text(s: &Stage<SpectrumSection>) -> String {
    let mut out = String::new();
    if stage_line(&mut out, "spectrum", s) {
        let s = s.completed().unwrap();
        let _ = writeln!(
            out,
            "  {} cutoff {}: first gap {:.12} (multiplicity {}, {})",
            s.group.name(),
            s.cutoff,
            s.first_gap,
            s.multiplicity,
            if s.stable {
                "stable under cutoff doubling"
            } else {
                "NOT stable under cutoff doubling"
            }
        );
    }
    out
}

pub fn sweep_text(sw: &Stage<SweepResult>) -> String {
    let mut out = String::new();
    if stage_line(&mut out, "sweep", sw) {
        let s = sw.completed().unwrap();
        let _ = writeln!(
            out,
            "  threshold c = {:.10} in [{:.12}, {:.12}] after {} bisection steps",
            s.threshold, s.bracket.0, s.bracket.1, s.iterations
        );
        for p in &s.table {
            let _ = writeln!(
                out,
                "    c = {:>6.3}  {}",
                p.parameter,
                p.value
                    .map(|v| format!("{v:.9}"))
                    .unwrap_or_else(|| p.status.clone())
            );
        }
    }
    out
}

/// Human-readable rendering.
pub fn to_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "subgap report: {}", r.name);
    let _ = writeln!(
        out,
        "frame {:?}; H = {:?}; V = {:?}; epsilon = {}; tolerance = {:.0e}",
        r.labels, r.horizontal, r.vertical, r.epsilon, r.tolerance
    );
    out.push('\n');

    if stage_line(&mut out, "validation", &r.validation) {
        let v = r.validation.completed().unwrap();
        for d in [&v.antisymmetry, &v.jacobi, &v.unimodular] {
            diag_line(&mut out, d);
        }
    }
    if let Some(s) = r.step.completed() {
        let _ = match s {
            BracketGenerating::Step { step } => writeln!(out, "  bracket generating, step {step}"),
            BracketGenerating::NotGenerating { dimension } => {
                writeln!(
                    out,
                    "  NOT bracket generating (flag stalls at dimension {dimension})"
                )
            }
        };
    }
    if stage_line(&mut out, "connection", &r.connection) {
        let c = r.connection.completed().unwrap();
        let _ = writeln!(
            out,
            "  kind {:?}, {} nonzero coefficients",
            c.kind,
            c.christoffel.len()
        );
        diag_line(&mut out, &c.compatibility);
    }
    if stage_line(&mut out, "assumptions", &r.assumptions) {
        let a = r.assumptions.completed().unwrap();
        for d in [
            &a.a,
            &a.b,
            &a.c,
            &a.totally_geodesic,
            &a.yang_mills,
            &a.v_integrable,
        ] {
            diag_line(&mut out, d);
        }
        for d in a.torsion_lemma.iter().chain([&a.bianchi]) {
            diag_line(&mut out, d);
        }
    }
    if let Some(t) = r.tensors.completed() {
        let h: Vec<usize> = r
            .horizontal
            .iter()
            .filter_map(|l| r.labels.iter().position(|x| x == l))
            .collect();
        let _ = writeln!(out, "tensors");
        for &a in &h {
            let row: Vec<String> = h
                .iter()
                .map(|&b| format!("{:>9.6}", t.ricci[a][b]))
                .collect();
            let _ = writeln!(out, "  Ric[{:>3}] {}", r.labels[a], row.join(" "));
        }
        let _ = writeln!(out, "  {} nonzero torsion coefficients", t.torsion.len());
    }
    if stage_line(&mut out, "constants", &r.constants) {
        let k = r.constants.completed().unwrap();
        let _ = writeln!(
            out,
            "  rho1 = {:.12}  rho2 = {:.12}  kappa1 = {:.12}  kappa2 = {:.12}  kappa3 = {:.12}",
            k.rho1, k.rho2, k.kappa1, k.kappa2, k.kappa3
        );
        let _ = writeln!(
            out,
            "  n = {}, m = {}, kappa3 feasible: {}",
            k.n, k.m, k.feasible_kappa3
        );
    }
    let _ = writeln!(out, "bounds");
    for b in &r.bounds {
        bound_line(&mut out, b.variant.name(), &b.outcome);
    }
    if let Some(c) = &r.conformal {
        bound_line(&mut out, "conformal su2", c);
    }
    out.push_str(&spectrum_text(&r.spectrum));
    if stage_line(&mut out, "soundness", &r.soundness) {
        diag_line(&mut out, r.soundness.completed().unwrap());
    }
    if let Some(sw) = &r.sweep {
        out.push_str(&sweep_text(sw));
    }
    if !r.notes.is_empty() {
        let _ = writeln!(out, "discrepancies with reference values");
        for n in &r.notes {
            let _ = writeln!(
                out,
                "  {}: computed {} vs reference {}; {}",
                n.topic,
                n.computed
                    .map(|v| format!("{v:.10}"))
                    .unwrap_or_else(|| "-".into()),
                n.reference,
                n.comment
            );
        }
    }
    out
}
