//! Residual reports.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedSample {
    pub index: usize,
    pub reason: String,
}

/// Outcome of one residual check over seeded samples. Passes iff the max
/// residual is within tolerance and at most a fifth of the samples were
/// skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub label: String,
    pub samples: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
    pub skipped: Vec<SkippedSample>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        format!(
            "{:<12} {:<24} {} max={:.3e} skipped={}/{}",
            self.check,
            self.label,
            if self.passed { "pass" } else { "FAIL" },
            self.max_residual,
            self.skipped.len(),
            self.samples
        )
    }
}

pub(crate) struct ReportBuilder {
    report: VerificationReport,
}

impl ReportBuilder {
    pub fn new(check: &str, label: &str, samples: usize, tolerance: f64) -> Self {
        ReportBuilder {
            report: VerificationReport {
                check: check.into(),
                label: label.into(),
                samples,
                tolerance,
                max_residual: 0.0,
                residuals: Vec::with_capacity(samples),
                skipped: Vec::new(),
                passed: false,
            },
        }
    }

    pub fn residual(&mut self, r: f64) {
        // NaN must never count as a pass
        let r = if r.is_nan() { f64::INFINITY } else { r };
        self.report.max_residual = self.report.max_residual.max(r);
        self.report.residuals.push(r);
    }

    pub fn skip(&mut self, index: usize, reason: String) {
        self.report.skipped.push(SkippedSample { index, reason });
    }

    pub fn finish(mut self) -> VerificationReport {
        let r = &mut self.report;
        r.passed = !r.residuals.is_empty()
            && r.max_residual <= r.tolerance
            && r.skipped.len() as f64 <= 0.2 * r.samples as f64;
        self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let mut b = ReportBuilder::new("c", "l", 5, 1e-8);
        for _ in 0..4 {
            b.residual(1e-12);
        }
        b.skip(4, "singular".into());
        assert!(b.finish().passed);

        let mut b = ReportBuilder::new("c", "l", 5, 1e-8);
        for _ in 0..3 {
            b.residual(0.0);
        }
        b.skip(3, "a".into());
        b.skip(4, "b".into());
        assert!(!b.finish().passed);

        let mut b = ReportBuilder::new("c", "l", 1, 1e-8);
        b.residual(f64::NAN);
        assert!(!b.finish().passed);
    }
}
