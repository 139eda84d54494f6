//! Effective run settings: built-in defaults, then an optional `key=value`
//! config file, then command-line flags, then `RDP_WORKERS`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::CliError;

pub const WORKERS_ENV: &str = "RDP_WORKERS";

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub settings: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn resolve(
        subcommand: &str,
        allowed: &[&str],
        defaults: &[(&str, String)],
        config_file: Option<&Path>,
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut settings: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        if let Some(path) = config_file {
            for (key, value) in read_config_file(path)? {
                if !allowed.contains(&key.as_str()) {
                    return Err(CliError::Usage(format!(
                        "config key `{key}` is not valid for `{subcommand}`"
                    )));
                }
                settings.insert(key, value);
            }
        }
        for (key, value) in flags {
            if let Some(v) = value {
                settings.insert(key.to_string(), v);
            }
        }
        if let Ok(w) = std::env::var(WORKERS_ENV) {
            settings.insert("workers".into(), w);
        }
        Ok(Self { subcommand: subcommand.to_string(), settings })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Usage(format!("missing required setting `--{key}`")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse().map_err(|e| CliError::Usage(format!("invalid value `{raw}` for `--{key}`: {e}")))
    }

    /// Comma-separated list.
    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|item| {
                item.trim().parse().map_err(|e| {
                    CliError::Usage(format!("invalid item `{item}` in `--{key}`: {e}"))
                })
            })
            .collect()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(other) => Err(CliError::Usage(format!("`{key}` must be true or false, got `{other}`"))),
        }
    }

    pub fn workers(&self) -> Result<usize, CliError> {
        let w: usize = self.parse("workers")?;
        if w == 0 {
            return Err(CliError::Usage("worker count must be at least 1".into()));
        }
        Ok(w)
    }
}

pub fn default_workers() -> String {
    std::thread::available_parallelism().map_or(1, |n| n.get()).to_string()
}

fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected `key=value`", lineno + 1))
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}
