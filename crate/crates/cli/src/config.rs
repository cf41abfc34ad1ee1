//! Config file grammar:
//!
//! ```text
//! # comment            (also allowed after a value)
//! fs = 19200           (applies to every subcommand)
//! [meter]              (following keys apply to `meter` only)
//! block-size = 3200
//! ```
//!
//! Keys are long flag names; `_` and `-` are interchangeable. Values are
//! taken verbatim after trimming. A key may appear once per section.
//! Command-line flags override config values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Config {
    global: BTreeMap<String, String>,
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::Usage(format!("config line {line_no}: unterminated section header"))
                })?;
                section = Some(normalize(name));
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {line_no}: expected `key = value`"))
            })?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {line_no}: empty key")));
            }
            let table = match &section {
                Some(s) => cfg.sections.entry(s.clone()).or_default(),
                None => &mut cfg.global,
            };
            if table.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(cfg)
    }

    /// Section value first, then the global one.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .or_else(|| self.global.get(key))
            .map(String::as_str)
    }
}
