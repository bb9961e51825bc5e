use std::collections::BTreeMap;
use std::fmt::Write as _;

use opcalc_core::CalculusOptions;
use serde::Serialize;
use serde_json::Value;

const SCHEMA: u32 = 1;

/// Machine-readable run summary; maps are ordered so equal runs print equal bytes.
#[derive(Debug, Serialize)]
pub struct Report {
    schema: u32,
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    function: Option<String>,
    options: CalculusOptions,
    residuals: BTreeMap<String, f64>,
    nodes_used: BTreeMap<String, usize>,
    error_estimates: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    details: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    written: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    outputs: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, opts: &CalculusOptions) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            function: None,
            options: *opts,
            residuals: BTreeMap::new(),
            nodes_used: BTreeMap::new(),
            error_estimates: BTreeMap::new(),
            details: BTreeMap::new(),
            written: Vec::new(),
            outputs: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn function(&mut self, f: &str) {
        self.function = Some(f.to_string());
    }

    pub fn residual(&mut self, key: &str, v: f64) {
        self.residuals.insert(key.to_string(), v);
    }

    pub fn quadrature(&mut self, key: &str, nodes: usize, estimate: f64) {
        self.nodes_used.insert(key.to_string(), nodes);
        self.error_estimates.insert(key.to_string(), estimate);
    }

    pub fn detail(&mut self, key: &str, v: Value) {
        self.details.insert(key.to_string(), v);
    }

    pub fn output(&mut self, name: &str, m: Value) {
        self.outputs.insert(name.to_string(), m);
    }

    pub fn written(&mut self, paths: Vec<String>) {
        self.written = paths;
    }

    /// Recorded always, serialized only when the caller asked for timings.
    pub fn timing(&mut self, key: &str, seconds: f64) {
        self.timings.insert(key.to_string(), seconds);
    }

    pub fn drop_timings(&mut self) {
        self.timings.clear();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        if let Some(f) = &self.function {
            let _ = writeln!(s, "function: {f}");
        }
        for (k, v) in &self.residuals {
            let _ = writeln!(s, "residual {k}: {v:.3e}");
        }
        for (k, n) in &self.nodes_used {
            let _ = writeln!(s, "nodes {k}: {n} (error estimate {:.3e})", self.error_estimates[k]);
        }
        for (k, v) in &self.details {
            let _ = writeln!(s, "{k}: {v}");
        }
        for p in &self.written {
            let _ = writeln!(s, "wrote {p}");
        }
        for (k, v) in &self.outputs {
            let _ = writeln!(s, "{k}: {v}");
        }
        for (k, v) in &self.timings {
            let _ = writeln!(s, "time {k}: {v:.6}");
        }
        s
    }
}
