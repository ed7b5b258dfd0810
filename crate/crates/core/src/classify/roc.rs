//! ROC traversal, threshold selection, class weights and the gated objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ACC_WEIGHT: f64 = 0.7;
pub const GDR_WEIGHT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roc {
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    /// `+inf` followed by the distinct scores in descending order.
    pub thresholds: Vec<f64>,
}

fn class_counts(y: &[bool]) -> Result<(usize, usize)> {
    let pos = y.iter().filter(|&&b| b).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// ROC points for the rule "predict generated when score >= threshold".
pub fn roc_curve(scores: &[f64], y: &[bool]) -> Result<Roc> {
    if scores.len() != y.len() {
        return Err(Error::Shape(format!("{} scores for {} labels", scores.len(), y.len())));
    }
    let (pos, neg) = class_counts(y)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut roc = Roc {
        fpr: vec![0.0],
        tpr: vec![0.0],
        thresholds: vec![f64::INFINITY],
    };
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if y[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        roc.thresholds.push(s);
        roc.tpr.push(tp as f64 / pos as f64);
        roc.fpr.push(fp as f64 / neg as f64);
    }
    Ok(roc)
}

/// Trapezoidal area under the curve.
pub fn auc(roc: &Roc) -> f64 {
    roc.fpr
        .windows(2)
        .zip(roc.tpr.windows(2))
        .map(|(f, t)| (f[1] - f[0]) * 0.5 * (t[0] + t[1]))
        .sum()
}

/// First finite threshold (descending) with `tpr >= tau`; otherwise the first
/// threshold of maximal `tpr`.
pub fn select_threshold(roc: &Roc, tau: f64) -> f64 {
    for k in 1..roc.thresholds.len() {
        if roc.tpr[k] >= tau {
            return roc.thresholds[k];
        }
    }
    let mut best = 1.min(roc.thresholds.len() - 1);
    for k in 1..roc.thresholds.len() {
        if roc.tpr[k] > roc.tpr[best] {
            best = k;
        }
    }
    roc.thresholds[best]
}

/// Balanced weights `N / (2 n_c)`, the generated class scaled by `m`.
pub fn class_weights(y: &[bool], m: f64) -> Result<Vec<f64>> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("weight multiplier must be positive, got {m}")));
    }
    let (pos, neg) = class_counts(y)?;
    let n = y.len() as f64;
    let wp = n / (2.0 * pos as f64) * m;
    let wn = n / (2.0 * neg as f64);
    Ok(y.iter().map(|&b| if b { wp } else { wn }).collect())
}

/// Zero unless the generated detection rate reaches `tau`.
pub fn objective(accuracy: f64, gdr: f64, tau: f64) -> f64 {
    if gdr < tau {
        0.0
    } else {
        ACC_WEIGHT * accuracy + GDR_WEIGHT * gdr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_reversed_ranking() {
        let roc = roc_curve(&[0.9, 0.1], &[true, false]).unwrap();
        assert_eq!(roc.fpr, vec![0.0, 0.0, 1.0]);
        assert_eq!(roc.tpr, vec![0.0, 1.0, 1.0]);
        assert_eq!(auc(&roc), 1.0);
        assert_eq!(auc(&roc_curve(&[0.1, 0.9], &[true, false]).unwrap()), 0.0);
        assert!(roc_curve(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn threshold_hits_target_rate() {
        let gen = [0.9, 0.7, 0.6, 0.5, 0.1];
        let real = [0.8, 0.4, 0.3, 0.2, 0.05];
        let scores: Vec<f64> = gen.iter().chain(&real).copied().collect();
        let y: Vec<bool> = (0..10).map(|i| i < 5).collect();
        let roc = roc_curve(&scores, &y).unwrap();
        assert_eq!(select_threshold(&roc, 0.8), 0.5);
        assert_eq!(select_threshold(&roc, 0.0), 0.9);
    }

    #[test]
    fn fallback_is_lowest_threshold() {
        let roc = roc_curve(&[0.1, 0.2, 0.8, 0.9], &[true, true, false, false]).unwrap();
        assert_eq!(select_threshold(&roc, 0.9), 0.1);
        assert_eq!(select_threshold(&roc, 1.5), 0.1);
    }

    #[test]
    fn weights_and_gate() {
        let y: Vec<bool> = (0..20).map(|i| i < 10).collect();
        let w = class_weights(&y, 1.008).unwrap();
        assert!((w[0] - 1.008).abs() < 1e-12 && (w[19] - 1.0).abs() < 1e-12);
        let y: Vec<bool> = (0..40).map(|i| i < 10).collect();
        let w = class_weights(&y, 1.0).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-12 && (w[39] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(objective(0.9, 0.7, 0.8), 0.0);
        assert!((objective(0.763, 0.803, 0.8) - 0.775).abs() < 1e-12);
        assert_eq!(objective(1.0, 1.0, 0.8), 1.0);
    }
}
