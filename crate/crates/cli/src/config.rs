//! `key = value` configuration files and resolution of parameters, with
//! precedence flag > config file > built-in default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Every key a configuration file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "threads",
    "seed",
    "out",
    "spec",
    "n",
    "data",
    "layout",
    "k",
    "m",
    "matrix",
    "method",
    "tau",
    "K",
    "linkage",
    "grid",
    "k-loss",
    "k-range",
    "p1",
    "p2",
    "n-grid",
    "exponent",
    "family",
    "mother-grid",
    "child-grid",
    "thin",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", i + 1))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {key:?}",
                    i + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Resolves parameters and remembers every resolved value for the manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    config: ConfigFile,
    pub resolved: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(config: ConfigFile) -> Self {
        Self {
            config,
            resolved: BTreeMap::new(),
        }
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.config.values.get(key) {
                Some(text) => Some(
                    text.parse::<T>()
                        .map_err(|e| CliError::Usage(format!("config value for {key}: {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(
                key.to_string(),
                serde_json::to_value(v).expect("value serializes"),
            );
        }
        Ok(value)
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        match self.optional(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.insert(
                    key.to_string(),
                    serde_json::to_value(&default).expect("value serializes"),
                );
                Ok(default)
            }
        }
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        self.optional(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }

    /// Records a derived value that has no flag of its own.
    pub fn record(&mut self, key: &str, value: impl Serialize) {
        self.resolved.insert(
            key.to_string(),
            serde_json::to_value(value).expect("value serializes"),
        );
    }
}
