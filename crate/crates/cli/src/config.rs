//! Optional `key = value` config file (TOML subset) and flag merging.
//!
//! Keys mirror the long flag names with `-` replaced by `_`. Flags given on
//! the command line win over the file, and the file wins over defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// A config value that may be written as a number, a string or a list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    List(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
            Value::List(items) => {
                let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub ms: Option<Value>,
    pub mt: Option<Value>,
    pub nbar: Option<Value>,
    pub rr: Option<f64>,
    pub family: Option<String>,
    pub mode: Option<usize>,
    pub total_photons: Option<f64>,
    pub squeezed_fraction: Option<f64>,
    pub d_true: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub exact_mzi: Option<bool>,
    pub suite: Option<String>,
    pub out: Option<String>,
    pub output: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            CliError::new("config", format!("{}: {}", path.display(), e.message()))
        })
    }
}

/// Flag value, else config value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Parses `"4"`, `"2,4,8"` or the inclusive range `"2..64"` into integers.
pub fn parse_int_list(text: &str, what: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a = parse_int(a, what)?;
            let b = parse_int(b.trim_start_matches('='), what)?;
            if b < a {
                return Err(CliError::new("usage", format!("empty range {part:?} for {what}")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_int(part, what)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::new("usage", format!("no values given for {what}")));
    }
    Ok(out)
}

/// Like [`parse_int_list`] but accepts real values; ranges step by one.
pub fn parse_real_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a = parse_real(a, what)?;
            let b = parse_real(b.trim_start_matches('='), what)?;
            if b < a {
                return Err(CliError::new("usage", format!("empty range {part:?} for {what}")));
            }
            let mut x = a;
            while x <= b {
                out.push(x);
                x += 1.0;
            }
        } else {
            out.push(parse_real(part, what)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::new("usage", format!("no values given for {what}")));
    }
    Ok(out)
}

fn parse_int(s: &str, what: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::new("usage", format!("invalid integer {s:?} for {what}")))
}

fn parse_real(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::new("usage", format!("invalid number {s:?} for {what}")))
}

/// Exactly one value for a single-point command.
pub fn single<T: Copy>(values: &[T], what: &str) -> Result<T, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::new("usage", format!("{what} takes a single value here"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_int_list("4", "ms").unwrap(), vec![4]);
        assert_eq!(parse_int_list("2,4, 8", "ms").unwrap(), vec![2, 4, 8]);
        assert_eq!(parse_int_list("2..5", "ms").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_int_list("1..=3,9", "ms").unwrap(), vec![1, 2, 3, 9]);
        assert!(parse_int_list("5..2", "ms").is_err());
        assert!(parse_int_list("x", "ms").is_err());
        assert_eq!(parse_real_list("0.5,1..3", "nbar").unwrap(), vec![0.5, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("ms = 4\nbogus = 1\n").is_err());
        let c: FileConfig = toml::from_str("ms = \"2..8\"\nnbar = [1, 2.5]\nrr = 2.0\n").unwrap();
        assert_eq!(c.ms.unwrap().to_string(), "2..8");
        assert_eq!(c.nbar.unwrap().to_string(), "1,2.5");
    }

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None, None, 3), 3);
    }
}
