//! Plain-text `key = value` documents used for synthesis specs, sweep grids
//! and run configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may repeat; the
//! order of entries is preserved.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    entries: Vec<(String, String, usize)>,
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, Path::new("<inline>"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_named(&text, path)
    }

    fn parse_named(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "empty key".into(),
                });
            }
            entries.push((key.to_string(), value.trim().to_string(), idx + 1));
        }
        Ok(Self { entries })
    }

    /// Last value given for `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    /// Every value given for `key`, in file order.
    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Format(format!("key '{key}': cannot parse '{v}': {e}")))
            })
            .transpose()
    }

    /// Comma-separated list value.
    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|v| split_list(key, v)).transpose()
    }
}

pub fn split_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::Format(format!("key '{key}': cannot parse '{s}': {e}")))
        })
        .collect()
}

/// Parses `a=1; b=two words; c=3` into ordered pairs.
pub fn parse_fields(value: &str) -> Result<Vec<(String, String)>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|field| {
            field
                .split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Format(format!("expected 'name=value' in '{field}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_repeats_and_lists() {
        let doc = KvDocument::parse("# grid\npresets = mlp, deep\n\nseed=7\nseed = 9\n").unwrap();
        assert_eq!(doc.get("seed"), Some("9"));
        assert_eq!(doc.get_all("seed").collect::<Vec<_>>(), ["7", "9"]);
        let presets: Vec<String> = doc.parse_list("presets").unwrap().unwrap();
        assert_eq!(presets, ["mlp", "deep"]);
        assert_eq!(doc.parse_value::<u64>("seed").unwrap(), Some(9));
    }

    #[test]
    fn reports_line_of_malformed_entry() {
        let err = KvDocument::parse("a = 1\nnot a pair\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn fields_keep_spaces_in_values() {
        let f = parse_fields("label=watching TV; freq=0.5").unwrap();
        assert_eq!(f[0], ("label".into(), "watching TV".into()));
        assert_eq!(f[1], ("freq".into(), "0.5".into()));
    }
}
