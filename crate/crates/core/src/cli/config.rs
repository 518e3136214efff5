//! Flat JSON experiment configs: per-command keys, defaults and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckAlgebra,
    CheckExact,
    CheckPointwise,
    RunMc,
    ReproduceExamples,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::CheckAlgebra, Command::CheckExact, Command::CheckPointwise, Command::RunMc, Command::ReproduceExamples];

    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckAlgebra => "check-algebra",
            Command::CheckExact => "check-exact",
            Command::CheckPointwise => "check-pointwise",
            Command::RunMc => "run-mc",
            Command::ReproduceExamples => "reproduce-examples",
        }
    }

    /// Keys accepted by the command, with their defaults.
    fn defaults(&self) -> Vec<(&'static str, Value)> {
        let f = |v: f64| Value::Number(Number::from_f64(v).expect("finite default"));
        let u = |v: u64| Value::Number(v.into());
        let mut keys = vec![("format", Value::String("csv".into())), ("out", Value::String("out".into()))];
        keys.extend(match self {
            Command::CheckAlgebra => vec![
                ("order", u(32)),
                ("m", f(1.0)),
                ("population", u(20)),
                ("hermite_order", u(10)),
                ("rho", f(0.5)),
            ],
            Command::CheckExact => vec![
                ("n_max", u(10)),
                ("float_n_max", u(20)),
                ("d", u(2)),
                ("m", f(2.0)),
                ("population", u(3)),
                ("t", f(1.0)),
            ],
            Command::CheckPointwise => vec![
                ("theta", f(0.7)),
                ("sigma", f(1.3)),
                ("n_max", u(6)),
                ("c1", f(0.7)),
                ("c2", f(0.3)),
                ("c3", f(0.4)),
                ("h", f(1e-4)),
            ],
            Command::RunMc => vec![
                ("pair", Value::String("wf-moran".into())),
                ("theta", f(0.5)),
                ("population", u(3)),
                ("k1", u(2)),
                ("x0", f(0.3)),
                ("t", f(0.5)),
                ("dt", f(1e-3)),
                ("n_paths", u(100_000)),
                ("seed", u(1)),
                ("antithetic", Value::Bool(false)),
                ("multiplier", f(3.0)),
            ],
            Command::ReproduceExamples => vec![("x", f(0.3)), ("y", f(0.7)), ("t", f(0.5)), ("d", u(3))],
        });
        keys
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A fully resolved config: every accepted key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    params: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    /// Defaults, then the file's keys, then explicit overrides.
    pub fn resolve(command: Command, file: Option<&str>, overrides: &[(&str, Value)]) -> Result<Self> {
        let mut params: BTreeMap<String, Value> =
            command.defaults().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        if let Some(text) = file {
            let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
            let Value::Object(map) = doc else {
                return Err(Error::Config("config must be a JSON object".into()));
            };
            for (k, v) in map {
                if k == "command" {
                    if v.as_str() != Some(command.name()) {
                        return Err(Error::Config(format!("config is for command {v}, not {command}")));
                    }
                    continue;
                }
                set(&mut params, command, &k, v)?;
            }
        }
        for (k, v) in overrides {
            set(&mut params, command, k, v.clone())?;
        }
        let cfg = ExperimentConfig { command, params };
        cfg.format()?;
        Ok(cfg)
    }

    /// Canonical JSON of the resolved config (sorted keys, command included).
    pub fn canonical_json(&self) -> String {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(self.command.name().into()));
        for (k, v) in &self.params {
            map.insert(k.clone(), v.clone());
        }
        serde_json::to_string(&Value::Object(map)).expect("scalars serialize")
    }

    fn raw(&self, key: &str) -> &Value {
        self.params.get(key).unwrap_or_else(|| panic!("{key} is not a key of {}", self.command))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.raw(key)
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Config(format!("{key} must be a finite number")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.raw(key).as_u64().ok_or_else(|| Error::Config(format!("{key} must be a non-negative integer")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key).as_str().ok_or_else(|| Error::Config(format!("{key} must be a string")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.raw(key).as_bool().ok_or_else(|| Error::Config(format!("{key} must be a boolean")))
    }

    pub fn format(&self) -> Result<Format> {
        match self.str("format")? {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format must be csv or json, got {other:?}"))),
        }
    }

    pub fn out(&self) -> Result<&str> {
        self.str("out")
    }
}

fn set(params: &mut BTreeMap<String, Value>, command: Command, key: &str, value: Value) -> Result<()> {
    if !params.contains_key(key) {
        let known: Vec<&str> = params.keys().map(String::as_str).collect();
        return Err(Error::Config(format!("unknown key {key:?} for {command}; accepted keys: {}", known.join(", "))));
    }
    if matches!(value, Value::Array(_) | Value::Object(_) | Value::Null) {
        return Err(Error::Config(format!("{key} must be a scalar")));
    }
    params.insert(key.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let e = ExperimentConfig::resolve(Command::RunMc, Some(r#"{"sed": 3}"#), &[]).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(ExperimentConfig::resolve(Command::RunMc, Some("[1]"), &[]).is_err());
        assert!(ExperimentConfig::resolve(Command::RunMc, Some(r#"{"seed": [1]}"#), &[]).is_err());
        assert!(ExperimentConfig::resolve(Command::RunMc, Some(r#"{"command": "check-exact"}"#), &[]).is_err());
        assert!(ExperimentConfig::resolve(Command::RunMc, Some(r#"{"format": "xml"}"#), &[]).is_err());
    }

    #[test]
    fn overrides_win_and_canonical_form_is_sorted() {
        let cfg =
            ExperimentConfig::resolve(Command::RunMc, Some(r#"{"seed": 3, "t": 0.25}"#), &[("seed", Value::from(9u64))])
                .unwrap();
        assert_eq!(cfg.u64("seed").unwrap(), 9);
        assert_eq!(cfg.f64("t").unwrap(), 0.25);
        let json = cfg.canonical_json();
        assert!(json.starts_with(r#"{"antithetic":false,"command":"run-mc","#), "{json}");
    }

    #[test]
    fn typed_access_checks_types() {
        let cfg = ExperimentConfig::resolve(Command::RunMc, Some(r#"{"n_paths": -4}"#), &[]).unwrap();
        assert!(cfg.u64("n_paths").is_err());
    }
}
