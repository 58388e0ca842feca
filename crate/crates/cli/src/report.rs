use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use hetsol_core::{Error, Mode, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// One named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// Which identity or statement the check reproduces.
    pub anchor: String,
    /// Largest defect, exact (`"0"`, `"3/4"`) or in scientific notation.
    pub defect: String,
    pub defect_value: f64,
    pub samples: usize,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Accumulates the worst defect of a check over many samples.
#[derive(Clone, Debug)]
pub struct Check {
    name: String,
    anchor: String,
    worst: f64,
    worst_text: String,
    samples: usize,
    pass: bool,
    detail: String,
}

impl Check {
    pub fn new(name: &str, anchor: &str) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            worst: 0.0,
            worst_text: "0".into(),
            samples: 0,
            pass: true,
            detail: String::new(),
        }
    }

    /// One sample: exact mode passes iff every entry is zero, float mode
    /// iff every entry is within `tol * max(1, scale)`.
    pub fn sample<'a, F: Scalar>(&mut self, defects: impl IntoIterator<Item = &'a F>, scale: f64, tol: f64) {
        self.samples += 1;
        for d in defects {
            if !d.is_negligible(tol, scale) {
                self.pass = false;
            }
            let m = d.magnitude();
            if m > self.worst || (m.is_nan() && !self.worst.is_nan()) {
                self.worst = m;
                self.worst_text = match F::MODE {
                    Mode::Exact => d.abs().to_string(),
                    Mode::Float => format!("{m:e}"),
                };
            }
        }
    }

    pub fn scalar<F: Scalar>(&mut self, defect: &F, scale: f64, tol: f64) {
        self.sample(std::iter::once(defect), scale, tol);
    }

    /// A sample judged by the caller.
    pub fn measured(&mut self, value: f64, pass: bool) {
        self.samples += 1;
        self.pass &= pass;
        if value > self.worst || value.is_nan() {
            self.worst = value;
            self.worst_text = format!("{value:e}");
        }
    }

    /// A sample that could not be evaluated.
    pub fn error(&mut self, err: &Error) {
        self.samples += 1;
        self.pass = false;
        if self.detail.is_empty() {
            self.detail = err.to_string();
        }
    }

    pub fn note(&mut self, detail: impl Into<String>) {
        self.detail = detail.into();
    }

    pub fn passed(&self) -> bool {
        self.pass
    }

    pub fn finish(self) -> Record {
        Record {
            name: self.name,
            anchor: self.anchor,
            defect: self.worst_text,
            defect_value: self.worst,
            samples: self.samples,
            pass: self.pass,
            detail: self.detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

/// The machine-readable result of one subcommand. Everything except
/// `timings` is a function of the command line, seed and mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub environment: Environment,
    pub seed: u64,
    pub mode: Mode,
    pub summary: Summary,
    pub records: Vec<Record>,
    /// Command-specific results (classification constants, search runs).
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub payload: Value,
    /// Wall-clock seconds per section.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, seed: u64, mode: Mode) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.into(),
            environment: Environment::current(),
            seed,
            mode,
            summary: Summary { total: 0, passed: 0, failed: 0, first_failure: None },
            records: Vec::new(),
            payload: Value::Null,
            timings: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = Record>) {
        self.records.extend(rs);
    }

    /// Sorts the records by name and fills in the summary.
    pub fn finish(mut self) -> Self {
        self.records.sort_by(|a, b| a.name.cmp(&b.name));
        let failed: Vec<&Record> = self.records.iter().filter(|r| !r.pass).collect();
        self.summary = Summary {
            total: self.records.len(),
            passed: self.records.len() - failed.len(),
            failed: failed.len(),
            first_failure: failed.first().map(|r| {
                if r.detail.is_empty() {
                    format!("{}: defect {}", r.name, r.defect)
                } else {
                    format!("{}: defect {} ({})", r.name, r.defect, r.detail)
                }
            }),
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise") + "\n"
    }

    /// The report without timings, for comparing runs byte by byte.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialise");
        v.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&v).expect("reports serialise") + "\n"
    }

    pub fn write_records_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        for r in &self.records {
            w.serialize(CsvRecord {
                name: &r.name,
                anchor: &r.anchor,
                defect: &r.defect,
                defect_value: r.defect_value,
                samples: r.samples,
                pass: r.pass,
            })
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    name: &'a str,
    anchor: &'a str,
    defect: &'a str,
    defect_value: f64,
    samples: usize,
    pass: bool,
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Writes `rows` as CSV with a header taken from the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

/// Writes text to a file, or to stdout for `-`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => std::io::stdout().write_all(text.as_bytes()),
        Some(p) if p.as_os_str() == "-" => std::io::stdout().write_all(text.as_bytes()),
        Some(p) => std::fs::write(p, text),
    }
    .map_err(|e| Error::Config(format!("writing report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hetsol_core::Rational;

    #[test]
    fn exact_checks_need_literal_zero() {
        let mut c = Check::new("x", "a");
        c.sample(&[Rational::from_i64(0), Rational::ratio(-3, 4)], 1.0, 1.0);
        let r = c.finish();
        assert!(!r.pass);
        assert_eq!(r.defect, "3/4");
    }

    #[test]
    fn float_checks_are_relative() {
        let mut c = Check::new("x", "a");
        c.scalar(&1e-7, 1e3, 1e-9);
        assert!(c.passed());
        c.scalar(&1e-5, 1e3, 1e-9);
        assert!(!c.passed());
    }

    #[test]
    fn records_are_sorted_and_timings_dropped() {
        let mut rep = Report::new("t", 1, Mode::Exact);
        rep.push(Check::new("b", "").finish());
        let mut bad = Check::new("a", "");
        bad.measured(2.0, false);
        rep.push(bad.finish());
        rep.timings.insert("all".into(), 1.5);
        let rep = rep.finish();
        assert_eq!(rep.records[0].name, "a");
        assert_eq!(rep.summary.failed, 1);
        assert!(!rep.passed());
        assert!(!rep.deterministic_json().contains("timings"));
        assert!(rep.to_json().contains("timings"));
    }
}
