//! `key = value` run files merged under command-line flags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use super::UsageError;

/// Parses `key = value` lines. `#` starts a comment; keys are normalized to
/// the hyphenated flag spelling.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(UsageError(format!("config line {}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(UsageError(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Resolves each setting as flag, else file entry, else default, and
/// records the outcome for the JSON envelope.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, Value>,
}

impl Settings {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            ..Self::default()
        }
    }

    fn file_value<T>(&mut self, key: &str) -> Result<Option<T>, UsageError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(raw) = self.file.get(key) else {
            return Ok(None);
        };
        self.used.insert(key.to_string());
        raw.parse()
            .map(Some)
            .map_err(|e| UsageError(format!("config key `{key}`: {e}")))
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let from_file = self.file_value(key)?;
        let value = flag.or(from_file);
        if let Some(v) = &value {
            self.record(key, v);
        }
        Ok(value)
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, UsageError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = self.optional(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, UsageError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        self.optional(key, flag)?
            .ok_or_else(|| UsageError(format!("missing required setting `--{key}`")))
    }

    pub fn tolerance(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, UsageError> {
        let v = self.value(key, flag, default)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(UsageError(format!("`{key}` must be a positive tolerance, got {v}")));
        }
        Ok(v)
    }

    pub fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.resolved.insert(key.to_string(), v);
    }

    /// Fails on file keys that no setting consumed.
    pub fn finish(self) -> Result<BTreeMap<String, Value>, UsageError> {
        let unknown: Vec<&String> = self.file.keys().filter(|k| !self.used.contains(*k)).collect();
        if let Some(k) = unknown.first() {
            return Err(UsageError(format!("unknown config key `{k}`")));
        }
        Ok(self.resolved)
    }
}

/// Comma-separated list parsed element-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T> FromStr for List<T>
where
    T: FromStr,
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", p.trim())))
            .collect::<Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: Serialize> Serialize for List<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        let m = parse_config("# run\nl = 2\nn_max=0.5 # inline\n\n").unwrap();
        assert_eq!(m.get("l").map(String::as_str), Some("2"));
        assert_eq!(m.get("n-max").map(String::as_str), Some("0.5"));
        assert!(parse_config("oops").is_err());
        assert!(parse_config("a=1\na=2").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut s = Settings::new(parse_config("l = 3\nn = 0.1").unwrap());
        assert_eq!(s.value("l", Some(5u32), 1).unwrap(), 5);
        assert_eq!(s.value("n", None, 0.0).unwrap(), 0.1);
        assert_eq!(s.value("z-max", None, 7.0).unwrap(), 7.0);
        let r = s.finish().unwrap();
        assert_eq!(r["l"], serde_json::json!(5));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut s = Settings::new(parse_config("l = 3\nbogus = 1").unwrap());
        s.value("l", None, 1u32).unwrap();
        assert!(s.finish().unwrap_err().0.contains("bogus"));
    }

    #[test]
    fn tolerances_positive() {
        let mut s = Settings::default();
        assert!(s.tolerance("tol", Some(-1.0), 1e-8).is_err());
        assert!(s.tolerance("tol", Some(0.0), 1e-8).is_err());
        assert_eq!(s.tolerance("rtol", None, 1e-8).unwrap(), 1e-8);
    }

    #[test]
    fn lists() {
        let l: List<f64> = "0, 0.1,0.2".parse().unwrap();
        assert_eq!(l.0, vec![0.0, 0.1, 0.2]);
        assert!("1,x".parse::<List<f64>>().is_err());
    }
}
