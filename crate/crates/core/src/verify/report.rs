use std::fmt::{self, Write};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not be carried out, e.g. a sample hit a singularity.
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        })
    }
}

/// Outcome of one numeric check.
///
/// `status` is `Pass` exactly when `max_residual <= tolerance`; the record is
/// a pure function of its inputs and seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub status: Status,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples_accepted: usize,
    pub samples_requested: usize,
    pub seed: u64,
    pub domain: String,
    pub detail: String,
    /// Printouts of the objects under test, e.g. `("operator", "...")`.
    /// Shown in the text block only.
    #[serde(skip)]
    pub subjects: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        let status = if max_residual <= tolerance { Status::Pass } else { Status::Fail };
        VerificationReport {
            check: check.into(),
            status,
            max_residual,
            tolerance,
            samples_accepted: 0,
            samples_requested: 0,
            seed: 0,
            domain: String::new(),
            detail: String::new(),
            subjects: Vec::new(),
        }
    }

    /// A report for a check that could not run to completion.
    pub fn error(check: impl Into<String>, tolerance: f64, detail: impl Into<String>) -> Self {
        let mut r = VerificationReport::new(check, f64::INFINITY, tolerance);
        r.status = Status::Error;
        r.detail = detail.into();
        r
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_samples(mut self, accepted: usize, requested: usize, seed: u64) -> Self {
        self.samples_accepted = accepted;
        self.samples_requested = requested;
        self.seed = seed;
        self
    }

    pub fn with_domain(mut self, domain: impl fmt::Display) -> Self {
        self.domain = domain.to_string();
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_subject(mut self, label: &str, value: impl fmt::Display) -> Self {
        self.subjects.push((label.to_string(), value.to_string()));
        self
    }

    /// Forces a failing status, keeping the measured residual.
    pub fn fail_with(mut self, detail: impl Into<String>) -> Self {
        if self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.detail = detail.into();
        self
    }

    /// Line-oriented `key: value` block terminated by a blank line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "check: {}", self.check);
        let _ = writeln!(out, "status: {}", self.status);
        for (label, value) in &self.subjects {
            let _ = writeln!(out, "{label}: {value}");
        }
        let _ = writeln!(out, "max_residual: {:e}", self.max_residual);
        let _ = writeln!(out, "tolerance: {:e}", self.tolerance);
        let _ = writeln!(out, "samples_accepted: {}", self.samples_accepted);
        let _ = writeln!(out, "samples_requested: {}", self.samples_requested);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "domain: {}", self.domain);
        if !self.detail.is_empty() {
            let _ = writeln!(out, "detail: {}", self.detail);
        }
        out.push('\n');
        out
    }

    /// One JSON object on a single line. Non-finite residuals become `null`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_residual() {
        assert!(VerificationReport::new("c", 1e-9, 1e-8).passed());
        assert!(!VerificationReport::new("c", 1e-7, 1e-8).passed());
        assert_eq!(VerificationReport::error("c", 1e-8, "boom").status, Status::Error);
    }

    #[test]
    fn json_record_has_exact_fields() {
        let r = VerificationReport::new("kernel", 1e-12, 1e-8)
            .with_samples(200, 200, 42)
            .with_domain("x in [0, 1]")
            .with_subject("operator", "d/dx")
            .with_detail("ok");
        let value: serde_json::Value = serde_json::from_str(&r.to_json_line()).unwrap();
        let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        let mut want = vec![
            "check",
            "status",
            "max_residual",
            "tolerance",
            "samples_accepted",
            "samples_requested",
            "seed",
            "domain",
            "detail",
        ];
        want.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, want);
        assert_eq!(value["status"], "pass");
    }

    #[test]
    fn text_block_layout() {
        let text = VerificationReport::new("kernel", 0.0, 1e-8).with_subject("candidate", "x").to_text();
        assert!(text.starts_with("check: kernel\nstatus: pass\ncandidate: x\n"));
        assert!(text.ends_with("\n\n"));
    }
}
