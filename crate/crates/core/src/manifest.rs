//! Flat `key = value` text files, used both for run manifests and for
//! configuration files. Keys are written sorted so identical content gives
//! identical bytes.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hardware the reference timings were taken on.
pub const REFERENCE_HARDWARE: &str = "AMD Ryzen 5 2600 Six-Core Processor, 16 GB RAM";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<()> {
    let ok = !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("bad manifest key {key:?}")))
    }
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a value. Keys are `[A-Za-z0-9_.-]+`; values may
    /// not contain newlines.
    pub fn set(&mut self, key: &str, value: impl Display) -> Result<()> {
        check_key(key)?;
        let value = value.to_string();
        if value.contains(['\n', '\r']) {
            return Err(Error::invalid(format!("value for {key} spans lines")));
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses the value under `key`, if present.
    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::config(format!("{key} = {v:?}: {e}"))),
        }
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copies every entry of `other` under `prefix`.
    pub fn merge_prefixed(&mut self, prefix: &str, other: &Manifest) -> Result<()> {
        for (k, v) in other.iter() {
            self.set(&format!("{prefix}{k}"), v)?;
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `key = value` lines. Blank lines and lines starting with `#`
    /// are skipped; a repeated key is an error.
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut m = Manifest::new();
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "expected `key = value`"))?;
            let k = k.trim();
            check_key(k).map_err(|e| Error::parse(line_no, e.to_string()))?;
            if m.entries.contains_key(k) {
                return Err(Error::parse(line_no, format!("duplicate key {k}")));
            }
            m.entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }
}
