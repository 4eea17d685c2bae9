//! TOML configuration helpers: angle literals such as `"pi/6"` and file loading.

use serde::de::{self, DeserializeOwned, Deserializer};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("bad angle literal {0:?}; use a number, \"pi\", \"pi/k\" or \"a*pi/k\"")]
    Angle(String),
}

/// Parses `0.5`, `pi`, `pi/6`, `2*pi/9` or `2pi/9`.
pub fn parse_angle(s: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::Angle(s.to_owned());
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = match num.strip_suffix("pi").ok_or_else(bad)? {
        "" => 1.0,
        c => c.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
    };
    let x = coef * std::f64::consts::PI / den;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Num(f64),
    Text(String),
}

pub fn de_angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match AngleRepr::deserialize(d)? {
        AngleRepr::Num(x) => Ok(x),
        AngleRepr::Text(s) => parse_angle(&s).map_err(de::Error::custom),
    }
}

pub fn de_angles<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Vec::<AngleRepr>::deserialize(d)?
        .into_iter()
        .map(|a| match a {
            AngleRepr::Num(x) => Ok(x),
            AngleRepr::Text(s) => parse_angle(&s).map_err(de::Error::custom),
        })
        .collect()
}

pub fn from_toml_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|source| ConfigError::Parse { path: origin.to_owned(), source })
}

pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, ConfigError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: name.clone(), source })?;
    from_toml_str(&text, &name)
}
