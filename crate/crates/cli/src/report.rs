//! Report documents and their JSON/CSV renderings.

use std::fmt::Write as _;

use geophase::linalg::C64;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};

/// A computed or reference value: a real number or a complex one as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex([f64; 2]),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<C64> for Value {
    fn from(z: C64) -> Self {
        Value::Complex([z.re, z.im])
    }
}

impl Value {
    fn parts(self) -> (f64, f64) {
        match self {
            Value::Real(v) => (v, 0.0),
            Value::Complex([re, im]) => (re, im),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: Value,
    /// Closed form or definition the quantity stands for.
    pub formula: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Deviation {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub engine: &'static str,
    pub version: &'static str,
}

impl Default for Metadata {
    fn default() -> Self {
        Self {
            engine: "geophase",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub inputs: ExperimentConfig,
    pub results: Vec<Quantity>,
    pub references: Vec<Quantity>,
    pub deviations: Vec<Deviation>,
    pub converged: bool,
    pub metadata: Metadata,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            inputs: config.clone(),
            results: Vec::new(),
            references: Vec::new(),
            deviations: Vec::new(),
            converged: true,
            metadata: Metadata::default(),
        }
    }

    pub fn result(&mut self, name: impl Into<String>, value: impl Into<Value>, formula: impl Into<String>) {
        self.results.push(Quantity {
            name: name.into(),
            value: value.into(),
            formula: formula.into(),
        });
    }

    pub fn reference(&mut self, name: impl Into<String>, value: impl Into<Value>, formula: impl Into<String>) {
        self.references.push(Quantity {
            name: name.into(),
            value: value.into(),
            formula: formula.into(),
        });
    }

    /// Records `|deviation| ≤ tolerance` and folds it into `converged`.
    pub fn check(&mut self, name: impl Into<String>, deviation: f64, tolerance: f64) {
        let passed = deviation <= tolerance;
        self.converged &= passed;
        self.deviations.push(Deviation {
            name: name.into(),
            deviation,
            tolerance,
            passed,
        });
    }

    /// Records `value ≥ bound`; the deviation is the shortfall, against a tolerance of zero.
    pub fn check_at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let passed = value >= bound;
        self.converged &= passed;
        self.deviations.push(Deviation {
            name: name.into(),
            deviation: (bound - value).max(0.0),
            tolerance: 0.0,
            passed,
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Deviation> {
        self.deviations.iter().filter(|d| !d.passed)
    }
}

pub fn to_json(reports: &[Report]) -> String {
    let text = match reports {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    };
    text.expect("reports contain only finite-or-null numbers") + "\n"
}

/// One flattened CSV row; deviation rows fill `tolerance` and `passed`
/// and put the deviation in `re`.
#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: Experiment,
    kind: &'static str,
    name: &'a str,
    re: f64,
    im: Option<f64>,
    tolerance: Option<f64>,
    passed: Option<bool>,
    formula: Option<&'a str>,
}

pub fn to_csv(reports: &[Report]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        let quantities = r
            .results
            .iter()
            .map(|q| ("result", q))
            .chain(r.references.iter().map(|q| ("reference", q)));
        for (kind, q) in quantities {
            let (re, im) = q.value.parts();
            w.serialize(CsvRow {
                experiment: r.experiment,
                kind,
                name: &q.name,
                re,
                im: Some(im),
                tolerance: None,
                passed: None,
                formula: Some(&q.formula),
            })
            .expect("in-memory CSV");
        }
        for d in &r.deviations {
            w.serialize(CsvRow {
                experiment: r.experiment,
                kind: "deviation",
                name: &d.name,
                re: d.deviation,
                im: None,
                tolerance: Some(d.tolerance),
                passed: Some(d.passed),
                formula: None,
            })
            .expect("in-memory CSV");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("UTF-8 input")
}

/// Serializes any list of flat records as CSV with a header row.
pub fn records_to_csv<T: Serialize>(records: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("UTF-8 input")
}

/// Human-readable table of the failing checks.
pub fn deviation_table(report: &Report) -> String {
    let mut out = format!("{}: tolerance failures\n", report.experiment);
    let _ = writeln!(out, "  {:<48} {:>12} {:>12}", "check", "deviation", "tolerance");
    for d in report.failures() {
        let _ = writeln!(out, "  {:<48} {:>12.3e} {:>12.3e}", d.name, d.deviation, d.tolerance);
    }
    out
}
