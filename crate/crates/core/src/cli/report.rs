//! Versioned run reports. Wall-clock timings are kept out of the report
//! itself so that identical runs produce identical bytes.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub values: BTreeMap<String, f64>,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, threshold: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            values: BTreeMap::new(),
            threshold: threshold.into(),
            pass,
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.values.insert(key.into(), value);
        self
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, reason: &str) -> Self {
        Check::new(name, format!("error: {reason}"), false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub rng: String,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(config: serde_json::Value, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            schema_version: SCHEMA_VERSION,
            rng: crate::rng::RNG_ALGORITHM.to_string(),
            config,
            checks,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per measured value: `check,key,value,threshold,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,key,value,threshold,pass\n");
        for c in &self.checks {
            let thr = c.threshold.replace('"', "'");
            if c.values.is_empty() {
                out.push_str(&format!("{},,,\"{}\",{}\n", c.name, thr, c.pass));
            }
            for (k, v) in &c.values {
                out.push_str(&format!("{},{},{:e},\"{}\",{}\n", c.name, k, v, thr, c.pass));
            }
        }
        out
    }
}

/// Per-check wall-clock seconds, written next to the report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub checks: Vec<(String, f64)>,
}

/// Collects checks and the time spent producing each.
pub struct CheckLog {
    checks: Vec<Check>,
    timings: Timings,
    last: Instant,
}

impl Default for CheckLog {
    fn default() -> Self {
        CheckLog {
            checks: Vec::new(),
            timings: Timings::default(),
            last: Instant::now(),
        }
    }
}

impl CheckLog {
    pub fn push(&mut self, check: Check) {
        let now = Instant::now();
        self.timings.checks.push((check.name.clone(), (now - self.last).as_secs_f64()));
        self.last = now;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: CheckLog) {
        self.checks.extend(other.checks);
        self.timings.checks.extend(other.timings.checks);
        self.last = Instant::now();
    }

    /// Qualifies every check name as `prefix/name`.
    pub fn prefix(&mut self, prefix: &str) {
        for c in &mut self.checks {
            c.name = format!("{prefix}/{}", c.name);
        }
        for t in &mut self.timings.checks {
            t.0 = format!("{prefix}/{}", t.0);
        }
    }

    pub fn into_parts(self) -> (Vec<Check>, Timings) {
        (self.checks, self.timings)
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }
}
