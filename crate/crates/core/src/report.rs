//! Pass/fail reports assembled from labelled sub-checks.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubCheck {
    #[serde(rename = "check")]
    pub label: String,
    pub pass: bool,
    pub witness: String,
}

/// Conjunction of labelled sub-checks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<SubCheck>,
}

impl CertificateReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: impl Into<String>, pass: bool, witness: impl Into<String>) {
        self.checks.push(SubCheck {
            label: label.into(),
            pass,
            witness: witness.into(),
        });
    }

    /// Appends every sub-check of `other`, prefixing labels with `prefix`.
    pub fn absorb(&mut self, prefix: &str, other: CertificateReport) {
        for c in other.checks {
            self.checks.push(SubCheck {
                label: format!("{prefix}{}", c.label),
                ..c
            });
        }
    }

    pub fn overall(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&SubCheck> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn get(&self, label: &str) -> Option<&SubCheck> {
        self.checks.iter().find(|c| c.label == label)
    }
}
