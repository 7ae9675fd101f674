//! Key/value config files with flag overrides.
//!
//! A config file holds `key = value` lines (`#` comments allowed). Every
//! command looks a parameter up as: command-line flag if given, else config
//! entry, else built-in default — so flags always win.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use driftscan::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    entries: HashMap<String, String>,
}

impl Overrides {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut entries = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "{}:{}: expected 'key = value'",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                entries.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Overrides { entries })
    }

    /// Resolves `key` with precedence flag > config > default.
    pub fn resolve<T: FromStr + Clone>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.entries.get(key) {
            Some(raw) => raw.parse().map_err(|_| {
                Error::InvalidConfig(format!("config key '{key}': cannot parse '{raw}'"))
            }),
            None => Ok(default),
        }
    }

    /// Same, for comma-separated lists.
    pub fn resolve_list(
        &self,
        flag: Option<String>,
        key: &str,
        default: &[f64],
    ) -> Result<Vec<f64>> {
        let raw = match flag {
            Some(v) => v,
            None => match self.entries.get(key) {
                Some(v) => v.clone(),
                None => return Ok(default.to_vec()),
            },
        };
        raw.split(',')
            .map(|tok| {
                tok.trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("list '{key}': bad entry '{tok}'")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parse_and_precedence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\neta = 0.2\nreps = 14").unwrap();
        let ov = Overrides::load(Some(f.path())).unwrap();
        // config used when no flag
        assert_eq!(ov.resolve::<f64>(None, "eta", 0.0).unwrap(), 0.2);
        // flag wins
        assert_eq!(ov.resolve(Some(0.7f64), "eta", 0.0).unwrap(), 0.7);
        // default when absent
        assert_eq!(ov.resolve::<u64>(None, "seed", 9).unwrap(), 9);
        assert_eq!(ov.resolve::<usize>(None, "reps", 1).unwrap(), 14);
    }

    #[test]
    fn rejects_malformed_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "novalue").unwrap();
        assert!(Overrides::load(Some(f.path())).is_err());
    }

    #[test]
    fn list_resolution() {
        let ov = Overrides::default();
        let v = ov.resolve_list(Some("0.1, 0.2,0.3".into()), "etas", &[]).unwrap();
        assert_eq!(v, vec![0.1, 0.2, 0.3]);
        assert!(ov.resolve_list(Some("a,b".into()), "etas", &[]).is_err());
    }
}
