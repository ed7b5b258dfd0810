//! Held-out evaluation with per-source breakdown.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::optimize::rates;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceStats {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub threshold: f64,
    pub accuracy: f64,
    pub gdr: f64,
    pub real_rate: f64,
    pub per_source: BTreeMap<String, SourceStats>,
}

/// Score `probs` against labels at `threshold`; `sources` tags each sample.
pub fn evaluate(probs: &[f64], threshold: f64, y: &[bool], sources: &[String]) -> Result<EvalReport> {
    if probs.len() != y.len() || sources.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} scores, {} labels and {} sources",
            probs.len(),
            y.len(),
            sources.len()
        )));
    }
    let (accuracy, gdr, real_rate) = rates(probs, y, threshold);
    let mut per_source: BTreeMap<String, SourceStats> = BTreeMap::new();
    for ((&p, &g), s) in probs.iter().zip(y).zip(sources) {
        let e = per_source.entry(s.clone()).or_insert(SourceStats { n: 0, correct: 0, accuracy: 0.0 });
        e.n += 1;
        e.correct += ((p >= threshold) == g) as usize;
    }
    for s in per_source.values_mut() {
        s.accuracy = s.correct as f64 / s.n as f64;
    }
    Ok(EvalReport {
        n: y.len(),
        threshold,
        accuracy,
        gdr,
        real_rate,
        per_source,
    })
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "samples    {}", self.n);
        let _ = writeln!(out, "threshold  {:.6}", self.threshold);
        let _ = writeln!(out, "accuracy   {:.4}", self.accuracy);
        let _ = writeln!(out, "gdr        {:.4}", self.gdr);
        let _ = writeln!(out, "real_rate  {:.4}", self.real_rate);
        let width = self.per_source.keys().map(|k| k.len()).max().unwrap_or(6).max(6);
        let _ = writeln!(out, "{:<width$}  {:>6}  {:>8}", "source", "n", "accuracy");
        for (k, s) in &self.per_source {
            let _ = writeln!(out, "{:<width$}  {:>6}  {:>8.4}", k, s.n, s.accuracy);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_source_breakdown() {
        let src: Vec<String> = ["real", "real", "gen-a", "gen-b"].iter().map(|s| s.to_string()).collect();
        let r = evaluate(&[0.1, 0.9, 0.8, 0.3], 0.5, &[false, false, true, true], &src).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.per_source["real"].correct, 1);
        assert_eq!(r.per_source["gen-a"].accuracy, 1.0);
        assert_eq!(r.per_source["gen-b"].accuracy, 0.0);
        assert!(r.to_table().contains("gen-b"));
    }
}
