use serde::{Deserialize, Serialize};

/// Outcome of a residual check: pass/fail, the worst residual seen, and the
/// frame indices where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub check: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    /// Frame labels achieving the worst residual; `None` when nothing was
    /// evaluated (e.g. an empty vertical bundle).
    pub witness: Option<String>,
}

impl Diagnostic {
    pub fn is_pass(&self) -> bool {
        self.passed
    }
}

/// Tracks the worst absolute residual over a family of evaluations.
#[derive(Debug)]
pub struct WorstResidual {
    check: String,
    tol: f64,
    worst: f64,
    witness: Option<String>,
}

impl WorstResidual {
    pub fn new(check: impl Into<String>, tol: f64) -> Self {
        Self {
            check: check.into(),
            tol,
            worst: 0.0,
            witness: None,
        }
    }

    /// Records `residual`; the witness closure only runs when it is the new
    /// worst (or the first) value.
    pub fn observe(&mut self, residual: f64, witness: impl FnOnce() -> String) {
        let r = residual.abs();
        if self.witness.is_none() || r > self.worst {
            self.worst = r;
            self.witness = Some(witness());
        }
    }

    pub fn finish(self) -> Diagnostic {
        Diagnostic {
            check: self.check,
            passed: self.worst <= self.tol,
            residual: self.worst,
            tolerance: self.tol,
            witness: self.witness,
        }
    }
}
