//! Structured reports shared by every CLI subcommand.
//!
//! A report is a flat list of named check items plus an overall status.
//! Rendering is deterministic: same inputs and seed produce byte-identical
//! text and JSON (maps are ordered, no timestamps or timings).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cert::Certification;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "FAIL"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportItem {
    pub name: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<Certification>,
    /// Numeric outcomes (residuals, dimensions, radii, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    /// Arbitrary structured payload, e.g. a witness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ReportItem {
    pub fn new(name: &str, status: Status) -> ReportItem {
        ReportItem {
            name: name.to_string(),
            status,
            certification: None,
            metrics: BTreeMap::new(),
            details: None,
            notes: Vec::new(),
        }
    }

    pub fn cert(mut self, cert: Certification) -> Self {
        self.certification = Some(cert);
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn details<T: Serialize>(mut self, value: &T) -> Self {
        self.details = Some(serde_json::to_value(value).expect("detail serializes"));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Echo of the effective configuration (paths, window sizes, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub config: BTreeMap<String, String>,
    pub items: Vec<ReportItem>,
    pub status: Status,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            seed: None,
            config: BTreeMap::new(),
            items: Vec::new(),
            status: Status::Pass,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn config(mut self, key: &str, value: impl ToString) -> Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, item: ReportItem) {
        if item.status == Status::Fail {
            self.status = Status::Fail;
        }
        self.items.push(item);
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    fn fmt_metric(v: f64) -> String {
        if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e7) {
            format!("{v}")
        } else {
            format!("{v:e}")
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(out, "  {k} = {v}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "  seed = {seed}");
        }
        for item in &self.items {
            let cert = match &item.certification {
                Some(c) => format!(" [{c}]"),
                None => String::new(),
            };
            let _ = writeln!(out, "{:<4} {}{}", format!("{}", item.status), item.name, cert);
            for (k, v) in &item.metrics {
                let _ = writeln!(out, "       {k} = {}", Report::fmt_metric(*v));
            }
            if let Some(details) = &item.details {
                let _ = writeln!(
                    out,
                    "       details: {}",
                    serde_json::to_string(details).expect("detail serializes")
                );
            }
            for note in &item.notes {
                let _ = writeln!(out, "       note: {note}");
            }
        }
        let _ = writeln!(out, "overall: {}", self.status);
        out
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.to_json()
        } else {
            self.to_text()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("verify").seed(7).config("window", 3);
        r.push(
            ReportItem::new("balance", Status::Pass)
                .cert(Certification::Exact)
                .metric("max_rel_gap", 1.25e-16),
        );
        r.push(
            ReportItem::new("orthogonality", Status::Fail)
                .metric("max_abs", 0.031)
                .note("perturbed input"),
        );
        r
    }

    #[test]
    fn json_round_trips_and_is_deterministic() {
        let r = sample();
        let json = r.to_json();
        assert_eq!(json, sample().to_json());
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn failing_item_fails_the_report() {
        let r = sample();
        assert_eq!(r.status, Status::Fail);
        let text = r.to_text();
        assert!(text.contains("FAIL orthogonality"));
        assert!(text.contains("overall: FAIL"));
    }
}
