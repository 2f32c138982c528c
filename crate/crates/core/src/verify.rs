use std::fmt;

use serde::Serialize;

/// One failed check, with the concrete inputs that exhibit it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: String,
    pub witness: String,
}

/// Outcome of an exhaustive verification sweep. Violations are content, not
/// faults: callers decide whether a failed sweep is an error.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        VerificationReport {
            subject: subject.into(),
            checked: 0,
            violations: Vec::new(),
        }
    }

    /// Counts one check; on failure stores the witness produced by `witness`.
    pub fn check(&mut self, ok: bool, check: &str, witness: impl FnOnce() -> String) -> bool {
        self.checked += 1;
        if !ok {
            self.violations.push(Violation {
                check: check.to_string(),
                witness: witness(),
            });
        }
        ok
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn absorb(&mut self, other: VerificationReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first_violation() {
            None => write!(f, "{}: pass ({} checks)", self.subject, self.checked),
            Some(v) => write!(
                f,
                "{}: FAIL ({} of {} checks), first: {} [{}]",
                self.subject,
                self.violations.len(),
                self.checked,
                v.check,
                v.witness
            ),
        }
    }
}
