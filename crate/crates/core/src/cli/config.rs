//! Key-value config files and flag/file/default resolution.
//!
//! A config file holds one `key = value` per line; `#` starts a comment.
//! Keys are the long flag names without dashes (`policy`, `L`, `nu`, ...).

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                row: i + 1,
                column: 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            values.insert(
                k.trim().trim_start_matches("--").to_string(),
                v.trim().to_string(),
            );
        }
        Ok(Self { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the file's value, else `None`.
    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| Error::Config(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick_opt(flag, key)?.unwrap_or(default))
    }
}

/// Parses a comma-separated list.
pub fn parse_list<T>(s: &str, what: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|e| Error::Config(format!("{what}: {p:?}: {e}")))
        })
        .collect()
}

/// `lo:hi:n` gives `n` evenly spaced values; otherwise a comma list.
pub fn parse_range(s: &str, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{what}: bad start")))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{what}: bad end")))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{what}: bad count")))?;
        if n == 0 || hi < lo {
            return Err(Error::Config(format!(
                "{what}: need count >= 1 and end >= start"
            )));
        }
        return Ok(crate::energy::threshold_grid(lo, hi, n));
    }
    parse_list(s, what)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let f = ConfigFile::parse("# comment\nepochs = 7\nphi=0.25 # trailing\n").unwrap();
        assert_eq!(f.pick(Some(3usize), "epochs", 50).unwrap(), 3);
        assert_eq!(f.pick(None::<usize>, "epochs", 50).unwrap(), 7);
        assert_eq!(f.pick(None::<usize>, "batch", 32).unwrap(), 32);
        assert_eq!(f.pick(None::<f64>, "phi", 0.5).unwrap(), 0.25);
    }

    #[test]
    fn bad_lines_and_values() {
        assert!(matches!(
            ConfigFile::parse("epochs 7"),
            Err(Error::Parse { row: 1, .. })
        ));
        let f = ConfigFile::parse("epochs = many").unwrap();
        assert!(matches!(
            f.pick(None::<usize>, "epochs", 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ranges() {
        let r = parse_range("0:0.4:9", "delta").unwrap();
        assert_eq!(r.len(), 9);
        assert!((r[8] - 0.4).abs() < 1e-15);
        assert!((r[1] - 0.05).abs() < 1e-15);
        assert_eq!(parse_range("1,2.5", "x").unwrap(), vec![1.0, 2.5]);
    }
}
