//! Experiment configuration: tag, parameters and output target.
//!
//! Every experiment declares its parameter keys with a type and a default.
//! Parsing rejects unknown keys and ill-typed values up front, so the runner
//! can read parameters without further checks.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI, SQRT_2, TAU};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Theorem21,
    Reg2d,
    Reg3d,
    Logexample,
    Cone,
    Invariance,
    Additivity,
    DensityEval,
    ContourEval,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Theorem21,
        Experiment::Reg2d,
        Experiment::Reg3d,
        Experiment::Logexample,
        Experiment::Cone,
        Experiment::Invariance,
        Experiment::Additivity,
        Experiment::DensityEval,
        Experiment::ContourEval,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Theorem21 => "theorem21",
            Experiment::Reg2d => "reg2d",
            Experiment::Reg3d => "reg3d",
            Experiment::Logexample => "logexample",
            Experiment::Cone => "cone",
            Experiment::Invariance => "invariance",
            Experiment::Additivity => "additivity",
            Experiment::DensityEval => "density-eval",
            Experiment::ContourEval => "contour-eval",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Experiment> {
        Self::ALL.into_iter().find(|e| e.tag() == tag)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kind {
    Num,
    /// Strictly positive number; all tolerances use this.
    Positive,
    Count,
    NumList,
    Pair,
    Points,
    Choice(&'static [&'static str]),
    Choices(&'static [&'static str]),
}

pub(crate) struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Value,
}

fn key(name: &'static str, kind: Kind, default: Value) -> Key {
    Key { name, kind, default }
}

pub(crate) const DENSITY_KINDS: &[&str] = &["klein-exact", "klein-eps", "flattened-exact", "flattened-eps", "mu-eps"];

fn crossing_triangle() -> Value {
    json!([[-0.5, -0.4], [1.3, -0.2], [0.1, 1.2]])
}

fn schedule_keys() -> Vec<Key> {
    vec![
        key("eps0", Kind::Positive, json!(0.1)),
        key("eps_ratio", Kind::Positive, json!(0.5)),
        key("eps_count", Kind::Count, json!(13)),
        key("order", Kind::Count, json!(4)),
    ]
}

pub(crate) fn schema(e: Experiment) -> Vec<Key> {
    use Kind::*;
    let mut keys = match e {
        Experiment::Theorem21 => vec![
            key("domains", Choices(&["sector", "box"]), json!(["sector", "box"])),
            key("densities", Choices(&["klein-eps", "flattened-eps", "mu-eps"]), json!(["mu-eps", "flattened-eps"])),
            key("theta", Num, json!(TAU)),
            key("r", Num, json!(SQRT_2)),
            key("x1", Pair, json!([-1.0, 1.0])),
            key("x2", Pair, json!([-1.0, 1.0])),
            key("delta", Num, json!(0.5)),
            key("tol", Positive, json!(1e-3)),
            key("quad_tol", Positive, json!(1e-6)),
        ],
        Experiment::Reg2d => vec![
            key("beta", NumList, json!([0.4, 0.5, 0.6])),
            key("delta", Num, json!(0.5)),
            key("exponent_rtol", Positive, json!(0.05)),
            key("value_rtol", Positive, json!(1e-9)),
        ],
        Experiment::Reg3d => vec![
            key("alpha", NumList, json!([0.2, 0.0, -0.1])),
            key("delta", Num, json!(0.5)),
            key("exponent_rtol", Positive, json!(0.05)),
            key("value_rtol", Positive, json!(1e-9)),
        ],
        Experiment::Logexample => vec![
            key("delta", Num, json!(0.5)),
            key("tau", Num, json!((-E).exp())),
            key("tol", Positive, json!(1e-6)),
        ],
        Experiment::Cone => vec![
            key("k", Num, json!(1.0)),
            key("delta", Num, json!(1e-3)),
            key("band", Positive, json!(0.02)),
            key("oracle_rtol", Positive, json!(1e-8)),
            key("quad_tol", Positive, json!(1e-11)),
        ],
        Experiment::Invariance => vec![
            key("vertices", Points, crossing_triangle()),
            key("t", Num, json!(0.5)),
            key("x1", Pair, json!([-0.3, 1.0])),
            key("x2", Pair, json!([-1.0, 0.5])),
            key("delta", Num, json!(0.4)),
            key("triangle_tol", Positive, json!(1e-5)),
            key("box_tol", Positive, json!(1e-6)),
            key("quad_tol", Positive, json!(1e-10)),
        ],
        Experiment::Additivity => vec![
            key("r", Num, json!(SQRT_2)),
            key("angle", Num, json!(PI)),
            key("vertices", Points, crossing_triangle()),
            key("x1", Pair, json!([-1.0, 1.0])),
            key("x2", Pair, json!([-1.0, 1.0])),
            key("delta", Num, json!(0.5)),
            key("plane", Num, json!(0.0)),
            key("tol", Positive, json!(1e-5)),
            key("quad_tol", Positive, json!(1e-10)),
        ],
        Experiment::DensityEval => vec![
            key("kind", Choice(DENSITY_KINDS), json!("flattened-exact")),
            key("point", NumList, json!([0.2, -0.1, 0.3])),
            key("eps", Positive, json!(0.01)),
            key("rtol", Positive, json!(1e-8)),
        ],
        Experiment::ContourEval => vec![
            key("cases", Choices(&["inv", "inv2", "branch"]), json!(["inv", "inv2", "branch"])),
            key("detour", Positive, json!(0.1)),
            key("pole_tol", Positive, json!(1e-9)),
            key("branch_tol", Positive, json!(1e-8)),
            key("quad_tol", Positive, json!(1e-12)),
        ],
    };
    if e == Experiment::Theorem21 {
        keys.extend(schedule_keys());
    }
    keys
}

fn finite_num(v: &Value) -> Option<f64> {
    v.as_f64().filter(|x| x.is_finite())
}

fn pair(v: &Value) -> Option<[f64; 2]> {
    match v.as_array()?.as_slice() {
        [a, b] => Some([finite_num(a)?, finite_num(b)?]),
        _ => None,
    }
}

fn check_value(kind: Kind, v: &Value) -> std::result::Result<(), String> {
    let ok = match kind {
        Kind::Num => finite_num(v).is_some(),
        Kind::Positive => {
            return match finite_num(v) {
                Some(x) if x > 0.0 => Ok(()),
                _ => Err(format!("must be a finite number > 0, got {v}")),
            }
        }
        Kind::Count => v.as_u64().is_some(),
        Kind::NumList => v.as_array().is_some_and(|a| !a.is_empty() && a.iter().all(|x| finite_num(x).is_some())),
        Kind::Pair => pair(v).is_some(),
        Kind::Points => v.as_array().is_some_and(|a| !a.is_empty() && a.iter().all(|x| pair(x).is_some())),
        Kind::Choice(allowed) => {
            return match v.as_str() {
                Some(s) if allowed.contains(&s) => Ok(()),
                _ => Err(format!("must be one of {allowed:?}, got {v}")),
            }
        }
        Kind::Choices(allowed) => {
            let Some(a) = v.as_array() else {
                return Err(format!("must be a list drawn from {allowed:?}"));
            };
            let names: Vec<&str> = a.iter().filter_map(Value::as_str).collect();
            if a.is_empty() || names.len() != a.len() || names.iter().any(|s| !allowed.contains(s)) {
                return Err(format!("must be a non-empty list drawn from {allowed:?}, got {v}"));
            }
            if (1..names.len()).any(|i| names[..i].contains(&names[i])) {
                return Err(format!("lists an entry twice: {v}"));
            }
            true
        }
    };
    if ok {
        Ok(())
    } else {
        let want = match kind {
            Kind::Num => "a finite number",
            Kind::Count => "a non-negative integer",
            Kind::NumList => "a non-empty list of finite numbers",
            Kind::Pair => "a pair [lo, hi] of finite numbers",
            Kind::Points => "a non-empty list of [x, y] points",
            _ => unreachable!(),
        };
        Err(format!("must be {want}, got {v}"))
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            parameters: BTreeMap::new(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Usage {
            field: "config".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one parameter from a `key=value` flag. The value is read as JSON
    /// and falls back to a bare string.
    pub fn set_param(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| CliError::Usage {
            field: "param".into(),
            message: format!("expected key=value, got {assignment:?}"),
        })?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        self.parameters.insert(k.trim().to_string(), value);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let keys = schema(self.experiment);
        for (name, value) in &self.parameters {
            let field = format!("parameters.{name}");
            let k = keys.iter().find(|k| k.name == name).ok_or_else(|| CliError::Usage {
                field: field.clone(),
                message: format!(
                    "unknown key for {}; expected one of {:?}",
                    self.experiment,
                    keys.iter().map(|k| k.name).collect::<Vec<_>>()
                ),
            })?;
            check_value(k.kind, value).map_err(|message| CliError::Usage { field, message })?;
        }
        Ok(())
    }

    /// Every parameter of the experiment, defaults filled in.
    pub fn resolved(&self) -> Result<Params, CliError> {
        self.validate()?;
        let mut map = BTreeMap::new();
        for k in schema(self.experiment) {
            let v = self.parameters.get(k.name).cloned().unwrap_or(k.default);
            map.insert(k.name.to_string(), v);
        }
        Ok(Params(map))
    }
}

/// Validated parameters with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(BTreeMap<String, Value>);

impl Params {
    pub fn as_map(&self) -> &BTreeMap<String, Value> {
        &self.0
    }

    fn get(&self, k: &str) -> &Value {
        self.0.get(k).unwrap_or_else(|| panic!("parameter {k} is not in the schema"))
    }

    pub fn num(&self, k: &str) -> f64 {
        finite_num(self.get(k)).expect("validated number")
    }

    pub fn count(&self, k: &str) -> usize {
        self.get(k).as_u64().expect("validated count") as usize
    }

    pub fn nums(&self, k: &str) -> Vec<f64> {
        self.get(k).as_array().expect("validated list").iter().filter_map(finite_num).collect()
    }

    pub fn pair(&self, k: &str) -> [f64; 2] {
        pair(self.get(k)).expect("validated pair")
    }

    pub fn points(&self, k: &str) -> Vec<[f64; 2]> {
        self.get(k).as_array().expect("validated points").iter().filter_map(pair).collect()
    }

    pub fn text(&self, k: &str) -> &str {
        self.get(k).as_str().expect("validated string")
    }

    pub fn texts(&self, k: &str) -> Vec<&str> {
        self.get(k).as_array().expect("validated list").iter().filter_map(Value::as_str).collect()
    }
}
