//! Train/validation feature scoring: ANOVA F on train, univariate logistic
//! coefficients on validation, blended after min-max normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::stats::{is_degenerate, mean, variance};

pub const TRAIN_WEIGHT: f64 = 0.4;
pub const VAL_WEIGHT: f64 = 0.6;
/// Ridge penalty on the slope of the univariate logistic fit.
const LOGIT_RIDGE: f64 = 1e-2;
const NEWTON_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub s_train: f64,
    pub s_val: f64,
    pub s_combined: f64,
}

pub fn combine(s_train: f64, s_val: f64) -> f64 {
    TRAIN_WEIGHT * s_train + VAL_WEIGHT * s_val
}

/// One-way ANOVA F statistic for two groups.
pub fn anova_f(x: &[f64], y: &[bool]) -> f64 {
    let (a, b): (Vec<(f64, bool)>, Vec<(f64, bool)>) = x.iter().copied().zip(y.iter().copied()).partition(|p| p.1);
    let (a, b): (Vec<f64>, Vec<f64>) = (a.into_iter().map(|p| p.0).collect(), b.into_iter().map(|p| p.0).collect());
    let n = x.len() as f64;
    if a.is_empty() || b.is_empty() || x.len() < 3 {
        return 0.0;
    }
    let grand = mean(x);
    let (ma, mb) = (mean(&a), mean(&b));
    let ssb = a.len() as f64 * (ma - grand).powi(2) + b.len() as f64 * (mb - grand).powi(2);
    let ssw = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() + b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
    if ssb <= f64::MIN_POSITIVE || is_degenerate(ssb / n, grand) {
        return 0.0;
    }
    ssb / (ssw / (n - 2.0)).max(f64::MIN_POSITIVE)
}

/// Slope of a ridge-penalized logistic fit of `y` on standardized `x`.
pub fn logistic_coefficient(x: &[f64], y: &[bool]) -> f64 {
    let m = mean(x);
    let var = variance(x);
    if x.is_empty() || is_degenerate(var, m) {
        return 0.0;
    }
    let sd = var.sqrt();
    let z: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for _ in 0..NEWTON_ITERS {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&zi, &yi) in z.iter().zip(y) {
            let p = 1.0 / (1.0 + (-(b0 + b1 * zi)).exp());
            let r = p - if yi { 1.0 } else { 0.0 };
            let w = (p * (1.0 - p)).max(1e-12);
            g0 += r;
            g1 += r * zi;
            h00 += w;
            h01 += w * zi;
            h11 += w * zi * zi;
        }
        g1 += LOGIT_RIDGE * b1;
        h11 += LOGIT_RIDGE;
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        b0 -= d0;
        b1 -= d1;
        if d0.abs().max(d1.abs()) < 1e-10 {
            break;
        }
    }
    b1
}

/// Min-max normalization; zero spread maps everything to 0.
pub fn min_max(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(hi > lo) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// Per-feature scores; `train[f]` and `val[f]` are feature columns.
pub fn combined_score(
    train: &[Vec<f64>],
    y_train: &[bool],
    val: &[Vec<f64>],
    y_val: &[bool],
) -> Result<Vec<FeatureScore>> {
    if train.len() != val.len() {
        return Err(Error::Shape(format!(
            "{} train features vs {} validation features",
            train.len(),
            val.len()
        )));
    }
    if y_train.is_empty() || y_val.is_empty() {
        return Err(Error::InvalidArgument("scoring needs non-empty train and validation splits".into()));
    }
    let f: Vec<f64> = train.iter().map(|c| anova_f(c, y_train)).collect();
    let beta: Vec<f64> = val.iter().map(|c| logistic_coefficient(c, y_val).abs()).collect();
    let (st, sv) = (min_max(&f), min_max(&beta));
    Ok(st
        .into_iter()
        .zip(sv)
        .map(|(s_train, s_val)| FeatureScore {
            s_train,
            s_val,
            s_combined: combine(s_train, s_val),
        })
        .collect())
}
