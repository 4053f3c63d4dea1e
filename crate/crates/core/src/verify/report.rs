use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::operators::BackendKind;

/// One evaluated sample of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Seed the sample (configuration and any random parameters) came from.
    pub seed: u64,
    /// Free-form tag, e.g. the label n or the drawn parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Parameters drawn for this sample, when they vary between samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    pub coords: Vec<f64>,
    pub residual_abs: f64,
    pub scale: f64,
    pub rel_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

impl SampleRecord {
    pub fn new(seed: u64, coords: Vec<f64>, residual_abs: f64, scale: f64) -> Self {
        Self {
            seed,
            label: None,
            params: None,
            coords,
            residual_abs,
            scale,
            rel_residual: residual_abs / scale,
            backend: None,
            error_estimate: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = Some(params);
        self
    }
}

/// Outcome of one check: `pass` iff every relative residual is below the
/// tolerance (NaN never passes, an empty sample set never passes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub id: String,
    pub parameters: Value,
    pub samples: Vec<SampleRecord>,
    pub max_rel_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Property implied by the identities rather than stated with them.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub derived: bool,
    pub metadata: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl ResidualReport {
    pub fn new(id: impl Into<String>, parameters: Value, samples: Vec<SampleRecord>, tolerance: f64) -> Self {
        let max = samples
            .iter()
            .map(|s| s.rel_residual)
            .fold(0.0f64, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
        Self {
            id: id.into(),
            parameters,
            pass: !samples.is_empty() && max < tolerance,
            samples,
            max_rel_residual: max,
            tolerance,
            derived: false,
            metadata: BTreeMap::new(),
            elapsed_ms: None,
        }
    }

    pub fn meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.metadata
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn derived(mut self) -> Self {
        self.derived = true;
        self
    }

    pub fn timed(mut self, ms: f64) -> Self {
        self.elapsed_ms = Some(ms);
        self
    }

    /// The report with wall-time removed, for byte-level comparisons.
    pub fn canonical(&self) -> Self {
        Self {
            elapsed_ms: None,
            ..self.clone()
        }
    }
}

/// All checks run for one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<ResidualReport>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<ResidualReport>) -> Self {
        Self {
            suite: suite.into(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
            elapsed_ms: None,
        }
    }

    pub fn canonical(&self) -> Self {
        Self {
            suite: self.suite.clone(),
            checks: self.checks.iter().map(ResidualReport::canonical).collect(),
            pass: self.pass,
            elapsed_ms: None,
        }
    }

    pub fn failed(&self) -> impl Iterator<Item = &ResidualReport> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag() {
        let s = |r| SampleRecord::new(1, vec![], r, 1.0);
        assert!(ResidualReport::new("a", Value::Null, vec![s(1e-12), s(1e-10)], 1e-9).pass);
        assert!(!ResidualReport::new("a", Value::Null, vec![s(1e-12), s(1e-9)], 1e-9).pass);
        assert!(!ResidualReport::new("a", Value::Null, vec![s(f64::NAN), s(0.0)], 1e-9).pass);
        assert!(!ResidualReport::new("a", Value::Null, vec![], 1e-9).pass);
        let r = ResidualReport::new("a", Value::Null, vec![s(0.0), s(f64::NAN)], 1e-9);
        assert!(r.max_rel_residual.is_nan() && !r.pass);
    }

    #[test]
    fn canonical_drops_timing() {
        let r = ResidualReport::new("a", Value::Null, vec![SampleRecord::new(1, vec![0.5], 0.0, 1.0)], 1.0).timed(3.0);
        let json = serde_json::to_string(&r.canonical()).unwrap();
        assert!(!json.contains("elapsed_ms"));
        assert_eq!(r.canonical(), r.clone().canonical());
    }
}
