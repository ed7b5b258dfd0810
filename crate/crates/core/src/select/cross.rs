//! Pairwise cross-feature enhancement among the most important features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossKind {
    Prod,
    Ratio,
    Affine,
}

impl CrossKind {
    pub fn tag(self) -> &'static str {
        match self {
            CrossKind::Prod => "prod",
            CrossKind::Ratio => "ratio",
            CrossKind::Affine => "affine",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTerm {
    pub kind: CrossKind,
    pub left: String,
    pub right: String,
}

impl CrossTerm {
    pub fn name(&self) -> String {
        format!("cross.{}.{}|{}", self.kind.tag(), self.left, self.right)
    }

    pub fn eval(&self, a: f64, b: f64, epsilon: f64, alpha: f64, beta: f64) -> f64 {
        match self.kind {
            CrossKind::Prod => a * b,
            CrossKind::Ratio => a / (b + epsilon),
            CrossKind::Affine => alpha * a + beta * b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossConfig {
    pub top_n: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for CrossConfig {
    fn default() -> Self {
        Self {
            top_n: 20,
            epsilon: 1e-8,
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

/// Indices of the `k` largest importances, ties broken by name.
pub fn top_indices(names: &[String], importance: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..names.len()).collect();
    idx.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then_with(|| names[a].cmp(&names[b])));
    idx.truncate(k);
    idx
}

/// Terms for every pair among the `cfg.top_n` most important features.
pub fn plan_crosses(names: &[String], importance: &[f64], cfg: &CrossConfig) -> Result<Vec<CrossTerm>> {
    if cfg.top_n > names.len() {
        return Err(Error::InvalidArgument(format!(
            "cross_top_n {} exceeds the {} available features",
            cfg.top_n,
            names.len()
        )));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidArgument("cross epsilon must be positive".into()));
    }
    let top = top_indices(names, importance, cfg.top_n);
    let mut terms = Vec::with_capacity(3 * top.len() * top.len().saturating_sub(1) / 2);
    for (a, &i) in top.iter().enumerate() {
        for &j in &top[a + 1..] {
            for kind in [CrossKind::Prod, CrossKind::Ratio, CrossKind::Affine] {
                terms.push(CrossTerm {
                    kind,
                    left: names[i].clone(),
                    right: names[j].clone(),
                });
            }
        }
    }
    Ok(terms)
}

pub fn apply_crosses(m: &FeatureMatrix, terms: &[CrossTerm], cfg: &CrossConfig) -> Result<FeatureMatrix> {
    let lookup = |n: &str| {
        m.index_of(n)
            .ok_or_else(|| Error::InvalidArgument(format!("cross operand {n} not in matrix")))
    };
    let extra = terms
        .iter()
        .map(|t| {
            let (i, j) = (lookup(&t.left)?, lookup(&t.right)?);
            let col = (0..m.rows())
                .map(|r| t.eval(m.get(r, i), m.get(r, j), cfg.epsilon, cfg.alpha, cfg.beta))
                .collect();
            Ok((t.name(), col))
        })
        .collect::<Result<Vec<_>>>()?;
    m.with_columns(extra)
}

/// Plan and apply in one go.
pub fn cross_enhance(m: &FeatureMatrix, importance: &[f64], cfg: &CrossConfig) -> Result<(FeatureMatrix, Vec<CrossTerm>)> {
    let terms = plan_crosses(m.names(), importance, cfg)?;
    Ok((apply_crosses(m, &terms, cfg)?, terms))
}
