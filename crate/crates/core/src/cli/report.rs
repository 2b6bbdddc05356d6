//! Experiment reports and their serializations.

use super::config::{Format, Kind, Tolerances};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One thresholded comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, reference: Option<f64>, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            residual,
            threshold,
            pass: residual.is_finite() && residual <= threshold,
        }
    }

    /// Relative comparison of `value` against `reference`.
    pub fn relative(name: impl Into<String>, value: f64, reference: f64, threshold: f64) -> Self {
        let residual = (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        Self::new(name, value, Some(reference), residual, threshold)
    }

    /// A residual that should vanish.
    pub fn residual(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self::new(name, residual, None, residual.abs(), threshold)
    }
}

/// Results for one independent input (one `r`, one random case, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Item {
    pub label: String,
    pub values: BTreeMap<String, f64>,
    pub methods: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

impl Item {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            values: BTreeMap::new(),
            methods: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn value(mut self, key: impl Into<String>, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn method(mut self, key: impl Into<String>, m: impl Into<String>) -> Self {
        self.methods.insert(key.into(), m.into());
        self
    }

    pub fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub kind: Kind,
    pub inputs: serde_json::Value,
    pub tolerances: Tolerances,
    pub items: Vec<Item>,
    /// Checks spanning several items, such as constancy over a sweep.
    pub summary: Vec<Check>,
    pub pass: bool,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(kind: Kind, inputs: serde_json::Value, tolerances: Tolerances, items: Vec<Item>, summary: Vec<Check>) -> Self {
        let pass = items.iter().all(Item::pass) && summary.iter().all(|c| c.pass);
        Self {
            kind,
            inputs,
            tolerances,
            items,
            summary,
            pass,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} ({:.3} s)", self.kind.name(), self.wall_clock_seconds);
        for item in &self.items {
            let _ = writeln!(out, "[{}]", item.label);
            for (k, v) in &item.values {
                let method = item.methods.get(k).map(|m| format!("  ({m})")).unwrap_or_default();
                let _ = writeln!(out, "  {k:<28} {v:>24.16e}{method}");
            }
            for c in &item.checks {
                write_check(&mut out, c);
            }
        }
        if !self.summary.is_empty() {
            let _ = writeln!(out, "[summary]");
            for c in &self.summary {
                write_check(&mut out, c);
            }
        }
        let _ = writeln!(out, "{}", if self.pass { "PASS" } else { "FAIL" });
        out
    }

    /// One row per value and per check.
    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let row = |w: &mut csv::Writer<Vec<u8>>, fields: [&str; 8]| w.write_record(fields).expect("in-memory write");
        row(&mut w, ["item", "name", "value", "reference", "residual", "threshold", "pass", "method"]);
        let f = |x: f64| format!("{x:.17e}");
        for item in &self.items {
            let label = item.label.as_str();
            for (k, v) in &item.values {
                let m = item.methods.get(k).map(String::as_str).unwrap_or("");
                row(&mut w, [label, k, &f(*v), "", "", "", "", m]);
            }
            for c in &item.checks {
                csv_check(&mut w, label, c, &f);
            }
        }
        for c in &self.summary {
            csv_check(&mut w, "summary", c, &f);
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn write_check(out: &mut String, c: &Check) {
    let _ = writeln!(
        out,
        "  {:<28} {:>24.16e}  residual {:.3e} <= {:.1e}  {}",
        c.name,
        c.value,
        c.residual,
        c.threshold,
        if c.pass { "ok" } else { "FAIL" }
    );
}

fn csv_check(w: &mut csv::Writer<Vec<u8>>, label: &str, c: &Check, f: &dyn Fn(f64) -> String) {
    let reference = c.reference.map(f).unwrap_or_default();
    w.write_record([
        label,
        &c.name,
        &f(c.value),
        &reference,
        &f(c.residual),
        &f(c.threshold),
        if c.pass { "true" } else { "false" },
        "",
    ])
    .expect("in-memory write");
}
