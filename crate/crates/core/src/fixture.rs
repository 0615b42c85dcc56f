//! Frozen numeric constants stored as `name = value` lines.
//!
//! Blank lines and lines starting with `#` are ignored. Values are written
//! with 15 significant digits.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub fn format_value(value: f64) -> String {
    format!("{value:.14e}")
}

pub fn parse(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Fixture(format!("line {}: expected `name = value`", lineno + 1)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Fixture(format!("line {}: {e}", lineno + 1)))?;
        if out.insert(name.trim().to_string(), value).is_some() {
            return Err(Error::Fixture(format!("line {}: duplicate name", lineno + 1)));
        }
    }
    Ok(out)
}

pub fn format(constants: &BTreeMap<String, f64>) -> String {
    constants
        .iter()
        .map(|(name, value)| format!("{name} = {}\n", format_value(*value)))
        .collect()
}

pub fn load(path: &Path) -> Result<BTreeMap<String, f64>> {
    parse(&std::fs::read_to_string(path)?)
}

/// Looks up one constant, failing with the name when it is missing.
pub fn get(constants: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    constants
        .get(name)
        .copied()
        .ok_or_else(|| Error::Fixture(format!("missing constant `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_fifteen_digits() {
        let mut c = BTreeMap::new();
        c.insert("third".to_string(), 1.0 / 3.0);
        c.insert("e".to_string(), std::f64::consts::E);
        let text = format(&c);
        assert!(text.contains("third = 3.33333333333333e-1"));
        let back = parse(&text).unwrap();
        for (k, v) in &c {
            assert!((back[k] - v).abs() <= 1e-14 * v.abs());
        }
    }

    #[test]
    fn comments_and_errors() {
        let parsed = parse("# header\n\nx = 1.5\n").unwrap();
        assert_eq!(get(&parsed, "x").unwrap(), 1.5);
        assert!(get(&parsed, "y").is_err());
        assert!(parse("no equals sign").is_err());
        assert!(parse("x = abc").is_err());
        assert!(parse("x = 1\nx = 2").is_err());
    }
}
