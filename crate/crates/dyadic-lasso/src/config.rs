//! Flat key-value run configuration with dotted section keys.
//!
//! Grammar (one entry per line):
//!   `section.key = value`
//! Blank lines and lines starting with `#` are ignored. Values are
//! plain scalars; list-valued keys take comma-separated numbers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    map: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { map })
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), value);
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.opt_str(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.get_str(key)?
            .parse()
            .map_err(|_| Error::Config(format!("key `{key}` is not a number: `{}`", self.map[key])))
    }

    pub fn opt_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.opt_str(key) {
            None => Ok(default),
            Some(_) => self.get_f64(key),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.get_str(key)?.parse().map_err(|_| {
            Error::Config(format!(
                "key `{key}` is not a nonnegative integer: `{}`",
                self.map[key]
            ))
        })
    }

    pub fn opt_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.opt_str(key) {
            None => Ok(default),
            Some(_) => self.get_usize(key),
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        self.get_str(key)?.parse().map_err(|_| {
            Error::Config(format!(
                "key `{key}` is not a nonnegative integer: `{}`",
                self.map[key]
            ))
        })
    }

    pub fn opt_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.opt_str(key) {
            None => Ok(default),
            Some(_) => self.get_u64(key),
        }
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.get_str(key)?;
        raw.split(',')
            .map(|tok| {
                tok.trim().parse().map_err(|_| {
                    Error::Config(format!("key `{key}`: `{}` is not a number", tok.trim()))
                })
            })
            .collect()
    }

    /// One `key = value` line per entry, sorted; the manifest echo.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.map
    }
}
