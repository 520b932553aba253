//! Reports in text and JSON form. Both renderings carry the same values; the
//! JSON layout is described in `docs/report-schema.md`.

use serde_json::{json, Map, Value};
use std::fmt::Write as _;

pub const SCHEMA: &str = "neutrix-opt/report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Certified,
    Computed,
    NotCertified,
    HypothesesUnmet,
    Undecided,
    Failed,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Certified => "certified",
            Outcome::Computed => "computed",
            Outcome::NotCertified => "not-certified",
            Outcome::HypothesesUnmet => "hypotheses-unmet",
            Outcome::Undecided => "undecided",
            Outcome::Failed => "failed",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Certified | Outcome::Computed => 0,
            Outcome::NotCertified | Outcome::HypothesesUnmet | Outcome::Failed => 2,
            Outcome::Undecided => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleSummary {
    pub checks: usize,
    pub agreed: usize,
    pub disagreed: usize,
    pub skipped: usize,
    pub details: Vec<String>,
}

impl OracleSummary {
    pub fn record(&mut self, what: &str, r: crate::probe::ProbeResult<bool>) {
        use crate::probe::ProbeError;
        self.checks += 1;
        match r {
            Ok(true) => {
                self.agreed += 1;
                self.details.push(format!("{what}: agrees"));
            }
            Ok(false) => {
                self.disagreed += 1;
                self.details.push(format!("{what}: disagrees"));
            }
            Err(ProbeError::Skipped(why)) => {
                self.skipped += 1;
                self.details.push(format!("{what}: skipped ({why})"));
            }
            Err(e) => {
                self.skipped += 1;
                self.details.push(format!("{what}: no verdict ({e})"));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<(String, Value)>,
    /// Formulas such as `D_⊘F(0) = 1 + oslash`.
    pub summary: Vec<String>,
    pub results: Vec<(String, Value)>,
    pub outcome: Outcome,
    pub hypotheses: Vec<Check>,
    pub oracle: Option<OracleSummary>,
    pub notes: Vec<String>,
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            inputs: Vec::new(),
            summary: Vec::new(),
            results: Vec::new(),
            outcome: Outcome::Computed,
            hypotheses: Vec::new(),
            oracle: None,
            notes: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.push((key.to_string(), v.into()));
    }

    pub fn result(&mut self, key: &str, v: impl Into<Value>) {
        self.results.push((key.to_string(), v.into()));
    }

    pub fn check(&mut self, name: impl Into<String>, status: &str) {
        self.hypotheses.push(Check {
            name: name.into(),
            status: status.to_string(),
        });
    }

    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }

    pub fn to_json(&self) -> Value {
        let pairs = |v: &[(String, Value)]| Value::Object(v.iter().cloned().collect::<Map<_, _>>());
        let mut out = Map::new();
        out.insert("schema".into(), json!(SCHEMA));
        out.insert("command".into(), json!(self.command));
        if !self.inputs.is_empty() {
            out.insert("inputs".into(), pairs(&self.inputs));
        }
        if !self.summary.is_empty() {
            out.insert("summary".into(), json!(self.summary));
        }
        if !self.results.is_empty() {
            out.insert("results".into(), pairs(&self.results));
        }
        out.insert("outcome".into(), json!(self.outcome.name()));
        if !self.hypotheses.is_empty() {
            let list: Vec<Value> = self
                .hypotheses
                .iter()
                .map(|c| json!({"check": c.name, "status": c.status}))
                .collect();
            out.insert("hypotheses".into(), Value::Array(list));
        }
        if let Some(o) = &self.oracle {
            let mut m = Map::new();
            m.insert("checks".into(), json!(o.checks));
            m.insert("agreed".into(), json!(o.agreed));
            m.insert("disagreed".into(), json!(o.disagreed));
            m.insert("skipped".into(), json!(o.skipped));
            if !o.details.is_empty() {
                m.insert("details".into(), json!(o.details));
            }
            out.insert("oracle".into(), Value::Object(m));
        }
        if !self.notes.is_empty() {
            out.insert("notes".into(), json!(self.notes));
        }
        if let Some(t) = self.timing_ms {
            out.insert("timing_ms".into(), json!(t));
        }
        Value::Object(out)
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} ({SCHEMA})", self.command);
        let section = |s: &mut String, title: &str, items: &[(String, Value)]| {
            if !items.is_empty() {
                let _ = writeln!(s, "{title}:");
                for (k, v) in items {
                    let _ = writeln!(s, "  {k} = {}", text_value(v));
                }
            }
        };
        section(&mut s, "inputs", &self.inputs);
        for line in &self.summary {
            let _ = writeln!(s, "{line}");
        }
        section(&mut s, "results", &self.results);
        let _ = writeln!(s, "outcome: {}", self.outcome.name());
        if !self.hypotheses.is_empty() {
            let _ = writeln!(s, "hypotheses:");
            for c in &self.hypotheses {
                let _ = writeln!(s, "  [{}] {}", c.status, c.name);
            }
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                s,
                "oracle: {} checks, {} agreed, {} disagreed, {} skipped",
                o.checks, o.agreed, o.disagreed, o.skipped
            );
            for d in &o.details {
                let _ = writeln!(s, "  {d}");
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "notes:");
            for n in &self.notes {
                let _ = writeln!(s, "  {n}");
            }
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(s, "timing: {t} ms");
        }
        s
    }
}

/// Scalars as JSON prints them, strings unquoted.
pub fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(text_value).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}
