//! Named feature vectors and the name registry sidecar.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar features aligned with unique, module-prefixed names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            )));
        }
        let v = Self { names, values };
        v.check_unique()?;
        Ok(v)
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.names.push(name.into());
        self.values.push(value);
    }

    /// Append `value` under `prefix.suffix`.
    pub fn put(&mut self, prefix: &str, suffix: &str, value: f64) {
        self.push(format!("{prefix}.{suffix}"), value);
    }

    pub fn append(&mut self, other: FeatureVector) {
        self.names.extend(other.names);
        self.values.extend(other.values);
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }

    pub fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.names.len());
        for n in &self.names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate feature name {n}")));
            }
        }
        Ok(())
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<f64>) {
        (self.names, self.values)
    }
}

/// Module tag of a feature name: everything before the first dot.
pub fn module_of(name: &str) -> &str {
    name.split('.').next().unwrap_or(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImputePolicy {
    Median,
    Zero,
}

/// Median of the finite entries (midpoint for even counts); `None` if there are none.
pub fn finite_median(values: &[f64]) -> Option<f64> {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    finite.sort_by(f64::total_cmp);
    let n = finite.len();
    Some(if n % 2 == 1 {
        finite[n / 2]
    } else {
        0.5 * (finite[n / 2 - 1] + finite[n / 2])
    })
}

/// Replace every non-finite entry according to `policy`.
pub fn impute_invalid(mut v: FeatureVector, policy: ImputePolicy) -> FeatureVector {
    if v.values.iter().all(|x| x.is_finite()) {
        return v;
    }
    let fill = match policy {
        ImputePolicy::Zero => 0.0,
        ImputePolicy::Median => finite_median(&v.values).unwrap_or(0.0),
    };
    for x in v.values.iter_mut().filter(|x| !x.is_finite()) {
        *x = fill;
    }
    v
}

/// One line of the name registry sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub index: usize,
    pub name: String,
    pub module: String,
}

pub fn registry_for(names: &[String]) -> Vec<RegistryEntry> {
    names
        .iter()
        .enumerate()
        .map(|(index, name)| RegistryEntry {
            index,
            name: name.clone(),
            module: module_of(name).to_string(),
        })
        .collect()
}
