//! JSON observable configuration files.
//!
//! ```json
//! { "label": "fractions", "vectors": [[3, 1, 0, -3], ["1", "1/2", "3/2", "7/6"], ...] }
//! ```
//!
//! Each component is either a JSON number or a string holding an exact
//! fraction `p/q` (or a bare integer), which is converted to the nearest
//! double of the rational value.

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Deserialize;

use super::{build_observables, CyclicObservableSet, Vec4};
use crate::error::{Error, Result};
use crate::{CYCLE_LEN, DIM};

#[derive(Deserialize)]
#[serde(untagged)]
enum Component {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    label: String,
    vectors: Vec<Vec<Component>>,
}

/// Parsed but not yet validated observable configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableConfig {
    pub label: String,
    pub vectors: [Vec4; CYCLE_LEN],
}

impl ObservableConfig {
    pub fn build(&self) -> Result<CyclicObservableSet> {
        build_observables(self.label.clone(), &self.vectors)
    }
}

/// Parses `p/q` or `p` into the nearest `f64`.
pub fn parse_fraction(text: &str) -> Result<f64> {
    let bad = || Error::Config(format!("not a fraction: {text:?}"));
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Config(format!("zero denominator in {text:?}")));
    }
    let value = BigRational::new(num, den).to_f64().ok_or_else(bad)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

pub fn parse_observables(json: &str) -> Result<ObservableConfig> {
    let raw: RawConfig = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    if raw.vectors.len() != CYCLE_LEN {
        return Err(Error::Config(format!(
            "expected {CYCLE_LEN} vectors, found {}",
            raw.vectors.len()
        )));
    }
    let mut vectors = Vec::with_capacity(CYCLE_LEN);
    for (i, row) in raw.vectors.iter().enumerate() {
        if row.len() != DIM {
            return Err(Error::Config(format!(
                "vector {} has {} components, expected {DIM}",
                i + 1,
                row.len()
            )));
        }
        let mut comps = [0.0; DIM];
        for (c, entry) in comps.iter_mut().zip(row) {
            *c = match entry {
                Component::Number(x) => *x,
                Component::Text(s) => parse_fraction(s)?,
            };
        }
        vectors.push(Vec4::from_real(comps)?);
    }
    Ok(ObservableConfig {
        label: raw.label,
        vectors: vectors.try_into().expect("length checked"),
    })
}

pub fn load_observables(path: &Path) -> Result<ObservableConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_observables(&text)
}
