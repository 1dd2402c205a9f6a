//! Experiment configs: loading, flag parsing, schema validation and hashing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{config_err, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Directory that relative paths inside `params` are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            seed: None,
            params: Map::new(),
            output_path: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.base_dir = PathBuf::from(".");
        Ok(cfg)
    }
}

/// Checks `params` against a JSON Schema and lists every violation.
pub fn validate(schema_text: &str, params: &Map<String, Value>) -> CliResult<()> {
    let schema: Value = serde_json::from_str(schema_text).expect("bundled schemas are valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("bundled schemas compile");
    let instance = Value::Object(params.clone());
    let problems: Vec<String> = validator
        .iter_errors(&instance)
        .map(|e| {
            let at = e.instance_path.to_string();
            if at.is_empty() {
                format!("params: {e}")
            } else {
                format!("params{at}: {e}")
            }
        })
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(config_err(format!("schema validation failed\n  {}", problems.join("\n  "))))
    }
}

/// Turns `--key value` pairs into params, using the schema's declared types to
/// read each value. Keys may use `-` in place of `_`.
pub fn params_from_flags(schema_text: &str, args: &[String]) -> CliResult<Map<String, Value>> {
    let schema: Value = serde_json::from_str(schema_text).expect("bundled schemas are valid JSON");
    let props = schema.get("properties").and_then(Value::as_object).cloned().unwrap_or_default();
    let mut out = Map::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let flag = arg.strip_prefix("--").ok_or_else(|| config_err(format!("expected --flag, got '{arg}'")))?;
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| config_err(format!("--{flag} needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        let key = key.replace('-', "_");
        let kind = props.get(&key).and_then(|p| p.get("type")).and_then(Value::as_str);
        out.insert(key, typed_value(kind, &value));
    }
    Ok(out)
}

fn typed_value(kind: Option<&str>, raw: &str) -> Value {
    match kind {
        Some("string") => Value::String(raw.to_string()),
        Some("array") => {
            let trimmed = raw.trim().trim_start_matches('[').trim_end_matches(']');
            Value::Array(trimmed.split(',').filter(|s| !s.trim().is_empty()).map(|s| scalar(s.trim())).collect())
        }
        _ => scalar(raw),
    }
}

fn scalar(raw: &str) -> Value {
    match serde_json::from_str::<Value>(raw) {
        Ok(v @ (Value::Number(_) | Value::Bool(_) | Value::Null)) => v,
        _ => Value::String(raw.to_string()),
    }
}

/// JSON with object keys sorted at every level, independent of map ordering.
pub fn canonical_json(v: &Value) -> String {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let body: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}:{}", Value::String(k.clone()), canonical_json(&m[k])))
                .collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(xs) => format!("[{}]", xs.iter().map(canonical_json).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

/// The parts of a config that determine the output rows.
pub fn identity(experiment: &str, seed: Option<u64>, params: &Value) -> Value {
    let mut m = Map::new();
    m.insert("experiment".into(), Value::String(experiment.to_string()));
    if let Some(s) = seed {
        m.insert("seed".into(), Value::from(s));
    }
    m.insert("params".into(), params.clone());
    Value::Object(m)
}

pub fn config_hash(identity: &Value) -> String {
    let digest = Sha256::digest(canonical_json(identity).as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
