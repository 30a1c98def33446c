//! Experiment configuration: TOML files, `--key value` overrides and
//! per-experiment parameter schemas.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::registry::{self, Experiment};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{key}` for {experiment}; known keys: {known}")]
    UnknownKey { key: String, experiment: String, known: String },
    #[error("unknown experiment `{name}`; {hint}")]
    UnknownExperiment { name: String, hint: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
}

/// Raw parameter value as written by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Bool(bool),
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(ConfigError::Invalid(format!("unknown format `{other}` (csv, json, svg)"))),
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

/// On-disk form of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub params: BTreeMap<String, RawValue>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed: 0,
            out: default_out(),
            formats: default_formats(),
            params: BTreeMap::new(),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.display().to_string(), message: e.to_string() })
    }

    /// Experiment entry and fully resolved parameters.
    pub fn resolve(&self) -> Result<(&'static Experiment, Params), ConfigError> {
        let exp = registry::find(&self.experiment)?;
        let params = Params::resolve(exp, &self.params)?;
        Ok((exp, params))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Any finite real.
    Real,
    /// Finite and `>= 0`: rates, couplings, densities.
    Rate,
    /// Positive integer.
    Count,
    /// Comma list, `start:stop:step` range, or a single number.
    Grid,
    /// Grid of non-negative values.
    RateGrid,
    Flag,
}

#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    /// `None` makes the key required.
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Count(u64),
    Grid(Vec<f64>),
    Flag(bool),
    /// Derived from other parameters by the experiment.
    Auto,
}

/// Lower-case with `_` folded to `-`, so `--J_grid`, `--j-grid` and
/// `J-grid` name the same key.
pub fn normalize_key(key: &str) -> String {
    key.trim_start_matches('-').to_ascii_lowercase().replace('_', "-")
}

fn parse_grid(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |m: &str| ConfigError::Invalid(format!("`{key}`: {m} in `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("ranges are start:stop:step"));
        }
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(bad("range needs step > 0 and stop >= start"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        // Multiplying instead of accumulating keeps grid points reproducible.
        Ok((0..=n).map(|k| a + k as f64 * h).collect())
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect()
    }
}

fn convert(spec: &ParamSpec, raw: &RawValue) -> Result<Value, ConfigError> {
    let key = spec.key;
    let text_num = |s: &str| {
        s.trim().parse::<f64>().map_err(|_| ConfigError::Invalid(format!("`{key}` expects a number, got `{s}`")))
    };
    if matches!(raw, RawValue::Text(s) if s.trim() == "auto") && spec.default == Some("auto") {
        return Ok(Value::Auto);
    }
    let v = match (spec.kind, raw) {
        (Kind::Flag, RawValue::Bool(b)) => Value::Flag(*b),
        (Kind::Flag, RawValue::Text(s)) => match s.trim() {
            "true" | "1" | "yes" => Value::Flag(true),
            "false" | "0" | "no" => Value::Flag(false),
            _ => return Err(ConfigError::Invalid(format!("`{key}` expects true or false, got `{s}`"))),
        },
        (Kind::Grid | Kind::RateGrid, RawValue::List(v)) => Value::Grid(v.clone()),
        (Kind::Grid | Kind::RateGrid, RawValue::Number(x)) => Value::Grid(vec![*x]),
        (Kind::Grid | Kind::RateGrid, RawValue::Text(s)) => Value::Grid(parse_grid(key, s)?),
        (Kind::Real | Kind::Rate | Kind::Count, RawValue::Number(x)) => Value::Real(*x),
        (Kind::Real | Kind::Rate | Kind::Count, RawValue::Text(s)) => Value::Real(text_num(s)?),
        _ => return Err(ConfigError::Invalid(format!("`{key}` has the wrong type ({:?} expected)", spec.kind))),
    };
    let v = match (spec.kind, v) {
        (Kind::Count, Value::Real(x)) => {
            if !(x >= 1.0 && x.fract() == 0.0 && x < 1e15) {
                return Err(ConfigError::Invalid(format!("`{key}` must be a positive integer, got {x}")));
            }
            Value::Count(x as u64)
        }
        (_, v) => v,
    };
    let values: &[f64] = match &v {
        Value::Real(x) => std::slice::from_ref(x),
        Value::Grid(g) => g,
        _ => &[],
    };
    if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
        return Err(ConfigError::Invalid(format!("`{key}` must be finite, got {bad}")));
    }
    if matches!(spec.kind, Kind::Rate | Kind::RateGrid) {
        if let Some(bad) = values.iter().find(|x| **x < 0.0) {
            return Err(ConfigError::Invalid(format!("`{key}` must be non-negative, got {bad}")));
        }
    }
    if matches!(v, Value::Grid(_)) && values.is_empty() {
        return Err(ConfigError::Invalid(format!("`{key}` is an empty grid")));
    }
    Ok(v)
}

/// Parameters resolved against an experiment schema, defaults filled in.
#[derive(Clone, Debug, Serialize)]
pub struct Params(BTreeMap<&'static str, Value>);

impl Params {
    pub fn resolve(exp: &Experiment, raw: &BTreeMap<String, RawValue>) -> Result<Self, ConfigError> {
        let mut given: BTreeMap<String, &RawValue> = BTreeMap::new();
        for (k, v) in raw {
            let norm = normalize_key(k);
            if !exp.params.iter().any(|s| s.key == norm) {
                return Err(ConfigError::UnknownKey {
                    key: k.clone(),
                    experiment: exp.name.to_string(),
                    known: exp.params.iter().map(|s| s.key).collect::<Vec<_>>().join(", "),
                });
            }
            given.insert(norm, v);
        }
        let mut out = BTreeMap::new();
        for spec in exp.params {
            let value = match (given.get(spec.key), spec.default) {
                (Some(v), _) => convert(spec, v)?,
                (None, Some(d)) => convert(spec, &RawValue::Text(d.to_string()))?,
                (None, None) => return Err(ConfigError::Missing(spec.key.to_string())),
            };
            out.insert(spec.key, value);
        }
        Ok(Self(out))
    }

    // Schema resolution guarantees every key exists with its declared kind.
    fn get(&self, key: &str) -> &Value {
        self.0.get(key).unwrap_or_else(|| panic!("parameter `{key}` is not in the schema"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Real(x) => *x,
            Value::Count(n) => *n as f64,
            other => panic!("parameter `{key}` is {other:?}, not a number"),
        }
    }

    /// `None` when the key was left at `auto`.
    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Value::Auto => None,
            _ => Some(self.f64(key)),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        match self.get(key) {
            Value::Count(n) => *n as usize,
            other => panic!("parameter `{key}` is {other:?}, not a count"),
        }
    }

    pub fn grid(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::Grid(g) => g,
            other => panic!("parameter `{key}` is {other:?}, not a grid"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Flag(b) => *b,
            other => panic!("parameter `{key}` is {other:?}, not a flag"),
        }
    }

    /// SHA-256 of the canonical JSON of experiment, seed and parameters.
    pub fn hash(&self, experiment: &str, seed: u64) -> String {
        let canonical = serde_json::json!({ "experiment": experiment, "seed": seed, "params": self });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
