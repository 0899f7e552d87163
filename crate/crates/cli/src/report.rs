use std::fmt::Write as _;

use orthoscalar_core::{Error, TolerancePolicy};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails,
    InvalidInput,
    Degenerate,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
            Outcome::InvalidInput => 2,
            Outcome::Degenerate => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::InvalidInput => "invalid-input",
            Outcome::Degenerate => "degenerate",
        }
    }

    pub fn holds_if(ok: bool) -> Self {
        if ok {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }

    /// Classification of library errors.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::SingularInput
            | Error::UnsupportedShape(_)
            | Error::InconsistentInput(_)
            | Error::Precondition(_)
            | Error::InvalidProjection { .. }
            | Error::NotAMorphism { .. } => Outcome::InvalidInput,
            Error::NumericalDegeneracy(_) | Error::RigidityViolation { .. } | Error::StageFailure { .. } => {
                Outcome::Degenerate
            }
            Error::Infeasible { .. }
            | Error::InfeasibleSign { .. }
            | Error::NotInK { .. }
            | Error::InfeasibleBalance { .. }
            | Error::InfeasibleDims { .. } => Outcome::Fails,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub rank_rel_tol: f64,
    pub residual_abs_tol: f64,
}

impl From<&TolerancePolicy> for ToleranceRecord {
    fn from(t: &TolerancePolicy) -> Self {
        Self { rank_rel_tol: t.rank_rel_tol, residual_abs_tol: t.residual_abs_tol }
    }
}

/// Result of one command: a verdict, the settings that produced it, short
/// human-readable lines and structured details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub outcome: Outcome,
    pub tolerance: ToleranceRecord,
    pub seed: u64,
    pub summary: Vec<String>,
    pub details: Value,
}

impl Report {
    pub fn new(command: &str, outcome: Outcome, tol: &TolerancePolicy, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            outcome,
            tolerance: tol.into(),
            seed,
            summary: Vec::new(),
            details: Value::Object(Default::default()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }

    pub fn line(mut self, text: impl Into<String>) -> Self {
        self.summary.push(text.into());
        self
    }

    pub fn details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {}", self.command, self.outcome.name());
        let _ = writeln!(
            out,
            "  tolerance: rank_rel_tol = {:e}, residual_abs_tol = {:e}",
            self.tolerance.rank_rel_tol, self.tolerance.residual_abs_tol
        );
        let _ = writeln!(out, "  seed: {}", self.seed);
        for line in &self.summary {
            let _ = writeln!(out, "  {line}");
        }
        out
    }
}
