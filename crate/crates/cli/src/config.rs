//! Run configurations. Files are either JSON or flat `key = value` lines with
//! dotted keys for nesting; unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use nmdecay_core::correlations::PureInput;
use nmdecay_core::dynamics::QubitDensity;
use nmdecay_core::sweep::{Grid, Quantity, SweptParameter};
use nmdecay_core::{FrequencyConvention, SpectralModel};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundStateConfig {
    pub model: SpectralModel,
    #[serde(default)]
    pub convention: FrequencyConvention,
}

/// Single-qubit amplitudes as `[re, im]` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitAmplitudes {
    pub plus: [f64; 2],
    pub minus: [f64; 2],
}

impl Default for QubitAmplitudes {
    fn default() -> Self {
        Self {
            plus: [1.0, 0.0],
            minus: [0.0, 0.0],
        }
    }
}

impl QubitAmplitudes {
    pub fn density(&self) -> Result<QubitDensity, CliError> {
        Ok(QubitDensity::pure(complex(self.plus), complex(self.minus))?)
    }
}

fn complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub model: SpectralModel,
    #[serde(default)]
    pub convention: FrequencyConvention,
    pub t_max: f64,
    /// Defaults to the model's recommended step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub initial: QubitAmplitudes,
    /// Emit every n-th sample.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedInput {
    /// (|+−⟩ + |−+⟩)/√2
    Bell,
}

/// α|+, φ₊⟩ + β|−, φ₋⟩ with the qubit states given as `[[re, im], [re, im]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitInput {
    pub alpha: f64,
    pub beta: f64,
    pub phi_plus: [[f64; 2]; 2],
    pub phi_minus: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputConfig {
    Named(NamedInput),
    Explicit(ExplicitInput),
}

impl InputConfig {
    pub fn pure_input(&self) -> Result<PureInput, CliError> {
        match self {
            InputConfig::Named(NamedInput::Bell) => Ok(PureInput::bell()),
            InputConfig::Explicit(e) => {
                let v = |q: [[f64; 2]; 2]| Vector2::new(complex(q[0]), complex(q[1]));
                Ok(PureInput::new(
                    e.alpha,
                    e.beta,
                    v(e.phi_plus),
                    v(e.phi_minus),
                )?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationsConfig {
    pub model: SpectralModel,
    #[serde(default)]
    pub convention: FrequencyConvention,
    pub t_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub input: InputConfig,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub stride: usize,
}

/// One curve of a sweep: parameter overrides on the base model and,
/// optionally, a different convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub label: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub set: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<FrequencyConvention>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

fn p_infinity() -> Quantity {
    Quantity::PInfinity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: SpectralModel,
    #[serde(default)]
    pub convention: FrequencyConvention,
    pub parameter: SweptParameter,
    pub grid: Grid,
    #[serde(default = "p_infinity")]
    pub quantity: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
    /// Without curves the base model forms a single curve labelled "base".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveConfig>,
    /// Also maximise each curve over this bracket.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximize: Option<Bracket>,
}

impl SweepConfig {
    /// The base model with a curve's overrides applied.
    pub fn curve_model(&self, curve: &CurveConfig) -> Result<SpectralModel, CliError> {
        let mut value =
            serde_json::to_value(self.model).map_err(|e| CliError::Config(e.to_string()))?;
        let object = value.as_object_mut().expect("models serialise to objects");
        for (key, v) in &curve.set {
            if key == "family" || !object.contains_key(key) {
                return Err(CliError::Config(format!(
                    "curve {:?}: model has no parameter {key:?}",
                    curve.label
                )));
            }
            object.insert(key.clone(), Value::from(*v));
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Reads and validates a configuration file.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
    } else {
        parse_key_values(text)?
    };
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

/// Canonical single-line JSON form, used for the parameter echo.
pub fn canonical<T: Serialize>(config: &T) -> String {
    serde_json::to_string(config).expect("configs serialise")
}

fn parse_key_values(text: &str) -> Result<Value, CliError> {
    let mut root = Map::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let parsed =
            serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(CliError::Config(format!(
                "line {}: malformed key {key:?}",
                n + 1
            )));
        }
        insert(&mut root, &parts, parsed)
            .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
    }
    Ok(Value::Object(root))
}

fn insert(map: &mut Map<String, Value>, path: &[&str], value: Value) -> Result<(), String> {
    let (head, rest) = path.split_first().expect("non-empty key");
    if rest.is_empty() {
        if map.contains_key(*head) {
            return Err(format!("duplicate key {head:?}"));
        }
        map.insert(head.to_string(), value);
        return Ok(());
    }
    let entry = map
        .entry(head.to_string())
        .or_insert_with(|| Value::Object(Map::new()));
    match entry {
        Value::Object(inner) => insert(inner, rest, value),
        _ => Err(format!("key {head:?} is both a value and a table")),
    }
}
