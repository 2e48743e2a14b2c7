//! Versioned JSON report. Field order is fixed by the struct layout, maps
//! are ordered, and no wall-clock data is recorded, so the same config and
//! seed give the same bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;

pub const SCHEMA: &str = "geofol-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement of the source result the check reproduces.
    pub anchor: String,
    /// `null` when the measurement failed or is not finite.
    pub measured: Option<f64>,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, anchor: &str, measured: f64, relation: Relation, threshold: f64) -> Self {
        let passed = measured.is_finite()
            && match relation {
                Relation::AtMost => measured <= threshold,
                Relation::AtLeast => measured >= threshold,
            };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured: measured.is_finite().then_some(measured),
            relation,
            threshold,
            passed,
        }
    }

    pub fn at_most(name: &str, anchor: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, anchor, measured, Relation::AtMost, threshold)
    }

    pub fn at_least(name: &str, anchor: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, anchor, measured, Relation::AtLeast, threshold)
    }

    /// Count of violations, which must be zero.
    pub fn none(name: &str, anchor: &str, violations: usize) -> Self {
        Self::new(name, anchor, violations as f64, Relation::AtMost, 0.0)
    }

    pub fn holds(name: &str, anchor: &str, ok: bool) -> Self {
        Self::none(name, anchor, usize::from(!ok))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub scenario: String,
    /// Parameters and construction audit results of the models used.
    pub models: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// Plot-ready tables.
    pub tables: BTreeMap<String, Value>,
    /// CSV files written, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Set when the scenario aborted; the section then fails.
    pub error: Option<String>,
    pub passed: bool,
}

impl Section {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn model<T: Serialize>(&mut self, name: &str, v: &T) {
        self.models
            .insert(name.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn table<T: Serialize>(&mut self, name: &str, v: &T) {
        self.tables
            .insert(name.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn finish(mut self) -> Self {
        self.passed =
            self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn failed(scenario: &str, err: &anyhow::Error) -> Self {
        Self {
            scenario: scenario.into(),
            error: Some(format!("{err:#}")),
            ..Default::default()
        }
        .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub seed: u64,
    pub config: Config,
    pub sections: Vec<Section>,
    pub passed: bool,
}

impl Report {
    pub fn new(scenario: &str, config: &Config, sections: Vec<Section>) -> Self {
        let passed = !sections.is_empty() && sections.iter().all(|s| s.passed);
        Self {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            scenario: scenario.into(),
            seed: config.run.seed,
            config: config.clone(),
            sections,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failing(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.sections {
            if let Some(e) = &s.error {
                out.push(format!("{}: error: {e}", s.scenario));
            }
            for c in s.checks.iter().filter(|c| !c.passed) {
                out.push(format!("{}/{}", s.scenario, c.name));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::at_most("a", "", 1e-9, 1e-8).passed);
        assert!(!Check::at_most("a", "", f64::NAN, 1e-8).passed);
        assert!(Check::at_least("a", "", 1.0, 1.0).passed);
        assert!(!Check::none("a", "", 2).passed);
    }

    #[test]
    fn empty_section_fails() {
        assert!(!Section::new("x").finish().passed);
    }

    #[test]
    fn non_finite_serializes_as_null() {
        let c = Check::at_most("a", "b", f64::INFINITY, 1.0);
        let v = serde_json::to_value(&c).unwrap();
        assert!(v["measured"].is_null());
        assert_eq!(v["relation"], "<=");
    }
}
