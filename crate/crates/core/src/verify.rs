//! Regression check of the built-in examples against stored machine reports.

use std::path::Path;

use serde_json::Value;

use crate::config::{builtin_example, BUILTIN_NAMES};
use crate::report::{analyze, to_machine};

/// Relative tolerance for numeric leaves; absolute below magnitude 1.
pub const GOLDEN_TOL: f64 = 1e-9;

const GOLDEN: &[(&str, &str)] = &[
    ("so4_example", include_str!("../golden/so4_example.json")),
    ("su2_hopf", include_str!("../golden/su2_hopf.json")),
    (
        "su2_conformal",
        include_str!("../golden/su2_conformal.json"),
    ),
    (
        "su2xsu2_example",
        include_str!("../golden/su2xsu2_example.json"),
    ),
    (
        "su2_riemannian",
        include_str!("../golden/su2_riemannian.json"),
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub path: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub name: String,
    pub mismatches: Vec<Mismatch>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn golden(name: &str) -> Option<&'static str> {
    GOLDEN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

fn as_f64(v: &Value) -> Option<f64> {
    v.as_number()?.to_string().parse().ok()
}

fn walk(path: &str, e: &Value, a: &Value, tol: f64, out: &mut Vec<Mismatch>) {
    let mut miss = || {
        out.push(Mismatch {
            path: path.to_string(),
            expected: e.to_string(),
            actual: a.to_string(),
        })
    };
    match (e, a) {
        (Value::Number(_), Value::Number(_)) => {
            let (x, y) = (as_f64(e).unwrap_or(f64::NAN), as_f64(a).unwrap_or(f64::NAN));
            if !((x - y).abs() <= tol * x.abs().max(1.0)) {
                miss();
            }
        }
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                miss();
                return;
            }
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                walk(&format!("{path}[{i}]"), x, y, tol, out);
            }
        }
        (Value::Object(xm), Value::Object(ym)) => {
            let keys: std::collections::BTreeSet<&String> = xm.keys().chain(ym.keys()).collect();
            for k in keys {
                let p = format!("{path}.{k}");
                match (xm.get(k), ym.get(k)) {
                    (Some(x), Some(y)) => walk(&p, x, y, tol, out),
                    (x, y) => out.push(Mismatch {
                        path: p,
                        expected: x.map(Value::to_string).unwrap_or_else(|| "<absent>".into()),
                        actual: y.map(Value::to_string).unwrap_or_else(|| "<absent>".into()),
                    }),
                }
            }
        }
        _ if e == a => {}
        _ => miss(),
    }
}

/// Leaf-by-leaf comparison; numbers within `tol`, everything else exact.
pub fn compare(expected: &Value, actual: &Value, tol: f64) -> Vec<Mismatch> {
    let mut out = Vec::new();
    walk("$", expected, actual, tol, &mut out);
    out
}

fn current(name: &str) -> String {
    to_machine(&analyze(
        &builtin_example(name, None).expect("builtin name"),
    ))
}

pub fn verify_builtin(name: &str) -> Verification {
    let actual: Value = serde_json::from_str(&current(name)).expect("report json");
    let mismatches = match golden(name).map(serde_json::from_str::<Value>) {
        Some(Ok(expected)) => compare(&expected, &actual, GOLDEN_TOL),
        Some(Err(e)) => vec![Mismatch {
            path: "$".into(),
            expected: format!("parseable golden file ({e})"),
            actual: String::new(),
        }],
        None => vec![Mismatch {
            path: "$".into(),
            expected: "<no golden file>".into(),
            actual: String::new(),
        }],
    };
    Verification {
        name: name.to_string(),
        mismatches,
    }
}

pub fn verify_all() -> Vec<Verification> {
    BUILTIN_NAMES.iter().map(|n| verify_builtin(n)).collect()
}

/// Rewrites the golden reports in `dir`.
pub fn bless(dir: &Path) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    BUILTIN_NAMES
        .iter()
        .map(|n| {
            let path = dir.join(format!("{n}.json"));
            std::fs::write(&path, current(n))?;
            Ok(path.display().to_string())
        })
        .collect()
}
