//! Reports: result rows with verdicts, plot series, JSON and CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

/// A reported quantity. Complex values serialize as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Complex { re: f64, im: f64 },
    Real(f64),
    Label(String),
}

impl From<Complex64> for Quantity {
    fn from(z: Complex64) -> Self {
        Quantity::Complex { re: z.re, im: z.im }
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Real(x)
    }
}

impl From<String> for Quantity {
    fn from(s: String) -> Self {
        Quantity::Label(s)
    }
}

impl From<&str> for Quantity {
    fn from(s: &str) -> Self {
        Quantity::Label(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub value: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A table of numbers for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: Experiment,
    pub version: String,
    pub inputs: ExperimentConfig,
    pub status: Status,
    pub rows: Vec<Row>,
    pub series: BTreeMap<String, Series>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl Report {
    pub fn new(inputs: ExperimentConfig) -> Self {
        Self {
            experiment: inputs.experiment,
            version: crate::VERSION.to_string(),
            inputs,
            status: Status::Pass,
            rows: Vec::new(),
            series: BTreeMap::new(),
            elapsed_seconds: None,
        }
    }

    pub fn push(&mut self, row: Row) {
        if !row.pass && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.rows.push(row);
    }

    /// Row passing when `|value - oracle| < tol`.
    pub fn check_abs(&mut self, name: impl Into<String>, value: Complex64, oracle: Complex64, tol: f64) {
        let dev = (value - oracle).norm();
        self.push(Row {
            name: name.into(),
            value: value.into(),
            oracle: Some(oracle.into()),
            deviation: Some(dev),
            tolerance: tol,
            pass: dev < tol,
            note: None,
        });
    }

    /// Row passing when `|value - oracle| < rtol |oracle|`.
    pub fn check_rel(&mut self, name: impl Into<String>, value: Quantity, oracle: Quantity, rtol: f64) {
        let as_c = |q: &Quantity| match *q {
            Quantity::Complex { re, im } => Complex64::new(re, im),
            Quantity::Real(x) => Complex64::new(x, 0.0),
            Quantity::Label(_) => Complex64::new(f64::NAN, 0.0),
        };
        let (v, o) = (as_c(&value), as_c(&oracle));
        let dev = (v - o).norm() / o.norm();
        self.push(Row {
            name: name.into(),
            value,
            oracle: Some(oracle),
            deviation: Some(dev),
            tolerance: rtol,
            pass: dev < rtol,
            note: None,
        });
    }

    /// Row for a step that raised an error; marks the report as errored.
    pub fn failure(&mut self, name: impl Into<String>, tol: f64, err: impl std::fmt::Display) {
        self.push(Row {
            name: name.into(),
            value: Quantity::Label("error".into()),
            oracle: None,
            deviation: None,
            tolerance: tol,
            pass: false,
            note: Some(err.to_string()),
        });
        self.status = Status::Error;
    }

    /// Attach a note to the last row, failing it if `fail` is set.
    pub fn annotate_last(&mut self, note: impl Into<String>, fail: bool) {
        if let Some(row) = self.rows.last_mut() {
            row.note = Some(note.into());
            if fail {
                row.pass = false;
                if self.status == Status::Pass {
                    self.status = Status::Fail;
                }
            }
        }
    }

    pub fn add_series(&mut self, name: impl Into<String>, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.series.insert(
            name.into(),
            Series {
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            },
        );
    }

    /// Process exit code: 0 pass, 1 oracle failure, 3 numerical error.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage {
            field: "report".into(),
            message: e.to_string(),
        })
    }

    /// Result rows as CSV; complex values spread over `re`/`im` columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value_re,value_im,value_text,oracle_re,oracle_im,oracle_text,deviation,tolerance,pass,note\n");
        let cells = |q: Option<&Quantity>| -> [String; 3] {
            match q {
                Some(Quantity::Complex { re, im }) => [num(*re), num(*im), String::new()],
                Some(Quantity::Real(x)) => [num(*x), String::new(), String::new()],
                Some(Quantity::Label(s)) => [String::new(), String::new(), csv_field(s)],
                None => Default::default(),
            }
        };
        for r in &self.rows {
            let [vr, vi, vt] = cells(Some(&r.value));
            let [or, oi, ot] = cells(r.oracle.as_ref());
            let dev = r.deviation.map(num).unwrap_or_default();
            let note = r.note.as_deref().map(csv_field).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{vr},{vi},{vt},{or},{oi},{ot},{dev},{},{},{note}",
                csv_field(&r.name),
                num(r.tolerance),
                r.pass
            );
        }
        if let Some(t) = self.elapsed_seconds {
            let _ = writeln!(out, "# elapsed_seconds,{}", num(t));
        }
        out
    }

    pub fn series_names(&self) -> Vec<&str> {
        self.series.keys().map(String::as_str).collect()
    }
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Tab-separated table of a named series with a one-line header.
pub fn emit_plot_data(report: &Report, series: &str) -> Result<String, CliError> {
    let s = report.series.get(series).ok_or_else(|| CliError::Usage {
        field: "plot".into(),
        message: format!("no series {series:?}; available: {:?}", report.series_names()),
    })?;
    let mut out = s.columns.join("\t");
    out.push('\n');
    for row in &s.rows {
        let line: Vec<String> = row.iter().map(|&x| num(x)).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(ExperimentConfig::new(Experiment::Cone));
        r.check_abs("a", Complex64::new(1.0, -2.0), Complex64::new(1.0, -2.0), 1e-9);
        r.add_series("s", &["tau", "I"], vec![vec![0.5, 1.0], vec![0.25, 2.0]]);
        r
    }

    #[test]
    fn complex_serializes_as_re_im() {
        let j = serde_json::to_value(Quantity::from(Complex64::new(1.5, -2.0))).unwrap();
        assert_eq!(j, serde_json::json!({"re": 1.5, "im": -2.0}));
        let back: Quantity = serde_json::from_value(j).unwrap();
        assert_eq!(back, Quantity::Complex { re: 1.5, im: -2.0 });
        let q: Quantity = serde_json::from_str("\"Log\"").unwrap();
        assert_eq!(q, Quantity::Label("Log".into()));
    }

    #[test]
    fn status_follows_rows() {
        let mut r = sample();
        assert_eq!(r.exit_code(), 0);
        r.check_abs("b", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.5);
        assert_eq!(r.exit_code(), 1);
        r.failure("c", 1e-3, "boom");
        assert_eq!(r.exit_code(), 3);
        // a later failure does not mask the error
        r.check_abs("d", Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.5);
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
        assert!(!r.to_json().contains("elapsed"));
    }

    #[test]
    fn csv_and_plot_tables() {
        let mut r = sample();
        r.push(Row {
            name: "x, y".into(),
            value: "Log".into(),
            oracle: Some("Log".into()),
            deviation: None,
            tolerance: 0.05,
            pass: true,
            note: None,
        });
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "a,1.0,-2.0,,1.0,-2.0,,0.0,1e-9,true,");
        assert_eq!(lines[2], "\"x, y\",,,Log,,,Log,,0.05,true,");
        assert_eq!(emit_plot_data(&r, "s").unwrap(), "tau\tI\n0.5\t1.0\n0.25\t2.0\n");
        assert!(emit_plot_data(&r, "missing").is_err());
    }
}
