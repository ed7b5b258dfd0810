//! Shared descriptive statistics. Population (divide-by-n) moments throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::FeatureVector;

/// Variance below this fraction of the mean square counts as zero.
const DEGENERATE_REL: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub variance: f64,
    pub max: f64,
    pub min: f64,
    pub median: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

pub const SUMMARY_NAMES: [&str; 8] = ["mean", "std", "var", "max", "min", "median", "skew", "kurt"];

impl SummaryStats {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.mean,
            self.std,
            self.variance,
            self.max,
            self.min,
            self.median,
            self.skewness,
            self.kurtosis,
        ]
    }

    /// Append the eight statistics as `prefix.mean`, `prefix.std`, ...
    pub fn emit(&self, fv: &mut FeatureVector, prefix: &str) {
        for (name, v) in SUMMARY_NAMES.iter().zip(self.as_array()) {
            fv.put(prefix, name, v);
        }
    }

    /// Emit stats of `series`, or zeros when it is empty.
    pub fn emit_series(fv: &mut FeatureVector, prefix: &str, series: &[f64]) {
        summary_stats(series).unwrap_or_default().emit(fv, prefix);
    }
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    central_moment(x, m, 2)
}

pub fn central_moment(x: &[f64], mean: f64, k: i32) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / x.len() as f64
}

/// True when the spread of `x` is numerically indistinguishable from zero.
pub fn is_degenerate(var: f64, mean: f64) -> bool {
    var <= DEGENERATE_REL * mean * mean || var <= f64::MIN_POSITIVE
}

pub fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn summary_stats(series: &[f64]) -> Result<SummaryStats> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("summary of an empty series".into()));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in series {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (skewness, kurtosis) = if is_degenerate(m2, mean) || lo == hi {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    let variance = if lo == hi { 0.0 } else { m2 };
    Ok(SummaryStats {
        mean,
        std: variance.sqrt(),
        variance,
        max: hi,
        min: lo,
        median: median_of_sorted(&sorted),
        skewness,
        kurtosis,
    })
}

/// Pearson correlation; zero-variance operands give 0.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let (x, y) = (&x[..n], &y[..n]);
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let nf = n as f64;
    if is_degenerate(sxx / nf, mx) || is_degenerate(syy / nf, my) {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Equal-width bin index over `[lo, hi]`; `hi` lands in the last bin.
fn bin_of(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    (((v - lo) / width) as usize).min(bins - 1)
}

fn range(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Shannon entropy in bits of an equal-width histogram over the data's own range.
pub fn histogram_entropy(x: &[f64], bins: usize) -> f64 {
    let (lo, hi) = range(x);
    if x.is_empty() || !(hi > lo) {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        counts[bin_of(v, lo, width, bins)] += 1;
    }
    entropy_of_counts(&counts, x.len())
}

pub fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Histogram mutual information in bits, `bins` equal-width bins per marginal.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> f64 {
    let n = x.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    let ((xl, xh), (yl, yh)) = (range(&x[..n]), range(&y[..n]));
    if !(xh > xl) || !(yh > yl) {
        return 0.0;
    }
    let (wx, wy) = ((xh - xl) / bins as f64, (yh - yl) / bins as f64);
    let mut joint = vec![0usize; bins * bins];
    let mut px = vec![0usize; bins];
    let mut py = vec![0usize; bins];
    for (&a, &b) in x[..n].iter().zip(&y[..n]) {
        let (i, j) = (bin_of(a, xl, wx, bins), bin_of(b, yl, wy, bins));
        joint[i * bins + j] += 1;
        px[i] += 1;
        py[j] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c == 0 {
                continue;
            }
            let pxy = c as f64 / nf;
            mi += pxy * (pxy * nf * nf / (px[i] as f64 * py[j] as f64)).log2();
        }
    }
    mi.max(0.0)
}

/// Autocorrelation of a series at `lag`, normalized by the lag-0 sum of squares.
pub fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    let m = mean(x);
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if is_degenerate(denom / x.len() as f64, m) {
        return 0.0;
    }
    let num: f64 = x
        .iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    num / denom
}
