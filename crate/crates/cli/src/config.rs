//! Flat key-value experiment configuration.
//!
//! A config file is UTF-8 text, one `key = value` pair per line, `#` starts a
//! comment. Command-line flags override file values. Unknown keys are
//! rejected so a typo cannot silently fall back to a default.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub type UsageResult<T> = Result<T, UsageError>;

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Merged view of config-file pairs and flag overrides.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> UsageResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> UsageResult<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!(
                    "{origin}:{}: expected `key = value`, got {raw:?}",
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(usage(format!("{origin}:{}: empty key", idx + 1)));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(usage(format!("{origin}:{}: duplicate key {key:?}", idx + 1)));
            }
        }
        Ok(Self { values })
    }

    /// Flag overrides win over file values.
    pub fn override_with(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    /// Reject keys outside the command's vocabulary.
    pub fn validate_keys(&self, allowed: &[&str]) -> UsageResult<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(usage(format!(
                    "unknown key {key:?}; allowed keys: {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> UsageResult<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| usage(format!("key {key:?}: not a number: {v:?}")))
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> UsageResult<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| usage(format!("key {key:?}: not an integer: {v:?}")))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> UsageResult<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| usage(format!("key {key:?}: not an integer: {v:?}")))
            })
            .transpose()
    }

    /// Comma-separated list of reals.
    pub fn get_f64_list(&self, key: &str) -> UsageResult<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| parse_f64_list(v).map_err(|e| usage(format!("key {key:?}: {e}"))))
            .transpose()
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

/// Semicolon-separated rows of comma-separated reals.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, String> {
    text.split(';')
        .map(|row| row.trim())
        .filter(|row| !row.is_empty())
        .map(parse_f64_list)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_blanks() {
        let s = Settings::parse("a = 1\n# note\n\nb = x,y\n", "t").unwrap();
        assert_eq!(s.get("a"), Some("1"));
        assert_eq!(s.get("b"), Some("x,y"));
    }

    #[test]
    fn rejects_unknown_keys() {
        let s = Settings::parse("alpha = 1\n", "t").unwrap();
        assert!(s.validate_keys(&["beta"]).is_err());
        assert!(s.validate_keys(&["alpha"]).is_ok());
    }

    #[test]
    fn rejects_duplicates_and_malformed_lines() {
        assert!(Settings::parse("a = 1\na = 2\n", "t").is_err());
        assert!(Settings::parse("nonsense\n", "t").is_err());
    }

    #[test]
    fn flag_overrides_win() {
        let mut s = Settings::parse("seed = 1\n", "t").unwrap();
        s.override_with("seed", Some("9".into()));
        assert_eq!(s.get_u64("seed").unwrap(), Some(9));
    }

    #[test]
    fn matrix_parsing() {
        let m = parse_matrix("1, 2; 3, 4").unwrap();
        assert_eq!(m, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }
}
