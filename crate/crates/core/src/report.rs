//! Machine-readable results of a pipeline run and their text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::verify::VerificationReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not applicable",
        }
    }
}

/// One check. `status` says whether the computation verified; `verdict`
/// carries the mathematical answer where there is one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Objects of the connected component, if the check is per component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    pub checked: usize,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalEntry {
    pub component: String,
    pub base: String,
    pub transversal: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub instance: String,
    pub checks: Vec<CheckResult>,
    pub witnesses: Vec<Witness>,
    pub dims: BTreeMap<String, usize>,
    pub transversal: Vec<TransversalEntry>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(instance: impl Into<String>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            instance: instance.into(),
            checks: Vec::new(),
            witnesses: Vec::new(),
            dims: BTreeMap::new(),
            transversal: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn find(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn find_all<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a CheckResult> + 'a {
        self.checks.iter().filter(move |c| c.name == name)
    }

    pub fn witnesses_for<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.witnesses.iter().filter(move |w| w.check == check).map(|w| w.value.as_str())
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn witness(&mut self, check: &str, component: Option<&str>, value: impl Into<String>) {
        self.witnesses.push(Witness {
            check: check.to_string(),
            component: component.map(String::from),
            value: value.into(),
        });
    }

    /// Adds a verification sweep as one check; its violations become witnesses.
    pub fn push_verification(&mut self, name: &str, component: Option<&str>, r: &VerificationReport, elapsed_ms: u64) {
        let status = if r.passed() { Status::Pass } else { Status::Fail };
        for v in &r.violations {
            self.witness(name, component, format!("{}: {}", v.check, v.witness));
        }
        self.push(CheckResult {
            name: name.to_string(),
            component: component.map(String::from),
            status,
            verdict: None,
            detail: r.first_violation().map(|v| v.check.clone()).unwrap_or_default(),
            checked: r.checked,
            elapsed_ms,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instance: {}", self.instance);
        for t in &self.transversal {
            let _ = writeln!(out, "transversal [{}] at {}: {}", t.component, t.base, t.transversal);
        }
        if !self.dims.is_empty() {
            let dims: Vec<String> = self.dims.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            let _ = writeln!(out, "dims: {}", dims.join(", "));
        }
        for c in &self.checks {
            let _ = write!(out, "[{}] {}", c.status.as_str(), c.name);
            if let Some(comp) = &c.component {
                let _ = write!(out, " [{comp}]");
            }
            if let Some(v) = &c.verdict {
                let _ = write!(out, ": {v}");
            }
            if !c.detail.is_empty() {
                let _ = write!(out, " ({})", c.detail);
            }
            let _ = writeln!(out, " {{{} checks, {} ms}}", c.checked, c.elapsed_ms);
            for w in self.witnesses.iter().filter(|w| w.check == c.name && w.component == c.component) {
                let _ = writeln!(out, "    witness: {}", w.value);
            }
        }
        let _ = writeln!(out, "result: {} ({} ms)", if self.passed() { "pass" } else { "fail" }, self.elapsed_ms);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_text() {
        let mut r = Report::new("demo");
        let mut v = VerificationReport::new("x");
        v.check(false, "identity", || "at e1".into());
        r.push_verification("sweep", Some("x,y"), &v, 3);
        r.dims.insert("A".into(), 8);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(!r.passed());
        assert_eq!(r.exit_code(), 1);
        let text = r.to_text();
        assert!(text.contains("[fail] sweep [x,y] (identity)"));
        assert!(text.contains("witness: identity: at e1"));
        assert!(text.contains("A = 8"));
    }

    #[test]
    fn status_names_are_kebab_case() {
        assert_eq!(serde_json::to_string(&Status::NotApplicable).unwrap(), "\"not-applicable\"");
    }
}
