//! The run report printed by every subcommand.

use discsym_core::auto::{ConstraintLine, FamilyFile};
use discsym_core::report::VerificationReport;
use discsym_core::suite::GroupOutcome;
use serde::Serialize;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_UNBOUNDED: u8 = 4;

/// Which code wins when several apply.
const PRIORITY: [u8; 4] = [EXIT_INPUT, EXIT_BUDGET, EXIT_UNBOUNDED, EXIT_CHECK_FAILED];

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub label: String,
    pub samples: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub skipped: usize,
    pub passed: bool,
}

impl From<&VerificationReport> for CheckSummary {
    fn from(r: &VerificationReport) -> Self {
        CheckSummary {
            check: r.check.clone(),
            label: r.label.clone(),
            samples: r.samples,
            tolerance: r.tolerance,
            max_residual: r.max_residual,
            skipped: r.skipped.len(),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AutoSummary {
    pub algebra: String,
    pub dim: usize,
    pub constraints: Vec<ConstraintLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<FamilyFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical: Option<Vec<FamilyFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_expected: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub algebras: Vec<AutoSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    pub verdict: &'static str,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(skip)]
    pub lines: Vec<String>,
    #[serde(skip)]
    codes: Vec<u8>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            command,
            seed: None,
            algebras: Vec::new(),
            checks: Vec::new(),
            groups: Vec::new(),
            errors: Vec::new(),
            verdict: "pass",
            exit_code: EXIT_PASS,
            duration_ms: None,
            lines: Vec::new(),
            codes: Vec::new(),
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn flag(&mut self, code: u8) {
        self.codes.push(code);
    }

    pub fn error(&mut self, code: u8, message: impl Into<String>) {
        let message = message.into();
        self.lines.push(format!("error: {message}"));
        self.errors.push(message);
        self.flag(code);
    }

    pub fn check(&mut self, r: &VerificationReport) {
        self.lines.push(r.summary());
        if !r.passed {
            self.flag(EXIT_CHECK_FAILED);
        }
        self.checks.push(r.into());
    }

    pub fn finish(&mut self) {
        self.exit_code = PRIORITY
            .into_iter()
            .find(|c| self.codes.contains(c))
            .unwrap_or(EXIT_PASS);
        self.verdict = match self.exit_code {
            EXIT_PASS => "pass",
            EXIT_CHECK_FAILED => "fail",
            EXIT_INPUT => "input-error",
            EXIT_BUDGET => "solver-budget",
            _ => "unbounded",
        };
    }

    pub fn render_text(&self) -> String {
        let mut out = self.lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!(
            "verdict: {} (exit {})\n",
            self.verdict, self.exit_code
        ));
        if let Some(ms) = self.duration_ms {
            out.push_str(&format!("duration: {ms} ms\n"));
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
