//! Discrete wavelet transforms and the multiscale wavelet features.

use serde::{Deserialize, Serialize};

use super::stats::{mean, pearson, variance};
use crate::error::{Error, Result};
use crate::registry::FeatureVector;
use crate::tensor::Inds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Haar,
    Db4,
    #[serde(rename = "bior2.2")]
    Bior22,
}

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

const HAAR_LO: [f64; 2] = [S, S];
const HAAR_HI: [f64; 2] = [-S, S];
const DB4_LO: [f64; 8] = [
    -0.010597401785069032,
    0.0328830116668852,
    0.030841381835560764,
    -0.18703481171909309,
    -0.027983769416859854,
    0.6308807679298589,
    0.7148465705529157,
    0.2303778133088965,
];
const DB4_HI: [f64; 8] = [
    -0.2303778133088965,
    0.7148465705529157,
    -0.6308807679298589,
    -0.027983769416859854,
    0.18703481171909309,
    0.030841381835560764,
    -0.0328830116668852,
    -0.010597401785069032,
];
const BIOR22_LO: [f64; 6] = [
    0.0,
    -0.1767766952966369,
    0.3535533905932738,
    1.0606601717798212,
    0.3535533905932738,
    -0.1767766952966369,
];
const BIOR22_HI: [f64; 6] = [
    0.0,
    0.3535533905932738,
    -0.7071067811865476,
    0.3535533905932738,
    0.0,
    0.0,
];

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Db4, Basis::Haar, Basis::Bior22];

    /// Decomposition filters `(low, high)`.
    pub fn filters(self) -> (&'static [f64], &'static [f64]) {
        match self {
            Basis::Haar => (&HAAR_LO, &HAAR_HI),
            Basis::Db4 => (&DB4_LO, &DB4_HI),
            Basis::Bior22 => (&BIOR22_LO, &BIOR22_HI),
        }
    }

    pub fn filter_len(self) -> usize {
        self.filters().0.len()
    }

    pub fn is_orthogonal(self) -> bool {
        !matches!(self, Basis::Bior22)
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::Haar => "haar",
            Basis::Db4 => "db4",
            Basis::Bior22 => "bior2.2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveletConfig {
    pub bases: Vec<Basis>,
    pub levels: usize,
    pub temporal_grid_stride: usize,
    pub spatial_time_stride: usize,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            bases: Basis::ALL.to_vec(),
            levels: 2,
            temporal_grid_stride: 16,
            spatial_time_stride: 2,
        }
    }
}

impl WaveletConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.temporal_grid_stride == 0 || self.spatial_time_stride == 0 {
            return Err(Error::InvalidArgument(
                "wavelet levels and strides must be at least 1".into(),
            ));
        }
        if self.bases.is_empty() {
            return Err(Error::InvalidArgument("no wavelet bases configured".into()));
        }
        Ok(())
    }
}

/// Half-sample symmetric index reflection (`x[-1] = x[0]`).
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i - 1;
    }
    i as usize
}

/// Single-level DWT with symmetric extension; output length `floor((n + L - 1) / 2)`.
pub fn dwt_symmetric(x: &[f64], basis: Basis) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = basis.filters();
    let l = lo.len();
    let n = x.len();
    let out = (n + l - 1) / 2;
    let mut a = Vec::with_capacity(out);
    let mut d = Vec::with_capacity(out);
    for k in 0..out {
        let (mut sa, mut sd) = (0.0, 0.0);
        for j in 0..l {
            let v = x[reflect(2 * k as isize + 1 - j as isize, n)];
            sa += lo[j] * v;
            sd += hi[j] * v;
        }
        a.push(sa);
        d.push(sd);
    }
    (a, d)
}

/// Single-level periodized DWT; odd inputs are extended by repeating the last sample.
/// Output length `ceil(n / 2)`.
pub fn dwt_periodic(x: &[f64], basis: Basis) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = basis.filters();
    let l = lo.len();
    let n = x.len() + x.len() % 2;
    let at = |i: usize| x[i.min(x.len() - 1)];
    let mut a = Vec::with_capacity(n / 2);
    let mut d = Vec::with_capacity(n / 2);
    for k in 0..n / 2 {
        let (mut sa, mut sd) = (0.0, 0.0);
        for j in 0..l {
            let idx = (2 * k + l / 2 + n * l - j) % n;
            let v = at(idx);
            sa += lo[j] * v;
            sd += hi[j] * v;
        }
        a.push(sa);
        d.push(sd);
    }
    (a, d)
}

/// One level of a separable 2D periodized DWT: `[ll, lh, hl, hh]` with the first
/// letter the filter along rows (height) and the second along columns (width).
pub fn dwt2_periodic(x: &[f64], h: usize, w: usize, basis: Basis) -> ([Vec<f64>; 4], usize, usize) {
    let w2 = w.div_ceil(2);
    let h2 = h.div_ceil(2);
    let mut lo_w = vec![0.0; h * w2];
    let mut hi_w = vec![0.0; h * w2];
    for y in 0..h {
        let (a, d) = dwt_periodic(&x[y * w..(y + 1) * w], basis);
        lo_w[y * w2..(y + 1) * w2].copy_from_slice(&a);
        hi_w[y * w2..(y + 1) * w2].copy_from_slice(&d);
    }
    let columns = |src: &[f64]| {
        let mut lo = vec![0.0; h2 * w2];
        let mut hi = vec![0.0; h2 * w2];
        let mut col = vec![0.0; h];
        for xx in 0..w2 {
            for y in 0..h {
                col[y] = src[y * w2 + xx];
            }
            let (a, d) = dwt_periodic(&col, basis);
            for y in 0..h2 {
                lo[y * w2 + xx] = a[y];
                hi[y * w2 + xx] = d[y];
            }
        }
        (lo, hi)
    };
    let (ll, hl) = columns(&lo_w);
    let (lh, hh) = columns(&hi_w);
    ([ll, lh, hl, hh], h2, w2)
}

/// Accumulates coefficients of one subband across signals.
#[derive(Debug, Clone, Default)]
struct Band {
    coeffs: Vec<f64>,
    signals: usize,
}

impl Band {
    fn add(&mut self, c: &[f64]) {
        self.coeffs.extend_from_slice(c);
        self.signals += 1;
    }

    fn emit(&self, fv: &mut FeatureVector, prefix: &str) {
        let energy = if self.signals == 0 {
            0.0
        } else {
            self.coeffs.iter().map(|c| c * c).sum::<f64>() / self.signals as f64
        };
        let abs: Vec<f64> = self.coeffs.iter().map(|c| c.abs()).collect();
        fv.put(prefix, "energy", energy);
        fv.put(prefix, "mean_abs", mean(&abs));
        fv.put(prefix, "std", variance(&self.coeffs).sqrt());
    }
}

fn energy(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum()
}

/// Linear resampling of `x` to `n` points.
fn resample(x: &[f64], n: usize) -> Vec<f64> {
    if x.len() == n {
        return x.to_vec();
    }
    if x.len() == 1 {
        return vec![x[0]; n];
    }
    (0..n)
        .map(|i| {
            let pos = if n == 1 {
                0.0
            } else {
                i as f64 * (x.len() - 1) as f64 / (n - 1) as f64
            };
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(x.len() - 1);
            let f = pos - lo as f64;
            x[lo] * (1.0 - f) + x[hi] * f
        })
        .collect()
}

pub fn temporal_grid(h: usize, w: usize, stride: usize) -> Vec<(usize, usize)> {
    (0..h)
        .step_by(stride)
        .flat_map(|y| (0..w).step_by(stride).map(move |x| (y, x)))
        .collect()
}

pub fn wavelet_features(inds: &Inds, cfg: &WaveletConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let (h, w) = (inds.height(), inds.width());
    let maps: Vec<Vec<f64>> = (0..inds.len()).map(|t| inds.channel_mean(t)).collect();
    let sites = temporal_grid(h, w, cfg.temporal_grid_stride);
    let frames: Vec<usize> = (0..inds.len()).step_by(cfg.spatial_time_stride).collect();
    let mut fv = FeatureVector::new();

    for &basis in &cfg.bases {
        let name = basis.name();

        // Temporal pathway.
        let mut approx = vec![Band::default(); cfg.levels];
        let mut detail = vec![Band::default(); cfg.levels];
        let mut site_detail = Vec::with_capacity(sites.len());
        for &(y, x) in &sites {
            let mut sig: Vec<f64> = maps.iter().map(|m| m[y * w + x]).collect();
            let mut e = 0.0;
            for lvl in 0..cfg.levels {
                if lvl > 0 && sig.len() < basis.filter_len() {
                    break;
                }
                let (a, d) = dwt_symmetric(&sig, basis);
                e += energy(&d);
                approx[lvl].add(&a);
                detail[lvl].add(&d);
                sig = a;
            }
            site_detail.push(e);
        }
        for lvl in 0..cfg.levels {
            approx[lvl].emit(&mut fv, &format!("wavelet.temporal.{name}.l{}.a", lvl + 1));
            detail[lvl].emit(&mut fv, &format!("wavelet.temporal.{name}.l{}.d", lvl + 1));
        }

        // Spatial pathway.
        let mut bands = vec![vec![Band::default(); 4]; cfg.levels];
        let mut frame_detail = Vec::with_capacity(frames.len());
        for &t in &frames {
            let (mut img, mut hh, mut ww) = (maps[t].clone(), h, w);
            let mut e = 0.0;
            for lvl_bands in bands.iter_mut() {
                if hh < 2 || ww < 2 {
                    break;
                }
                let (sub, h2, w2) = dwt2_periodic(&img, hh, ww, basis);
                for (b, c) in lvl_bands.iter_mut().zip(&sub) {
                    b.add(c);
                }
                e += sub[1..].iter().map(|c| energy(c)).sum::<f64>();
                let [ll, ..] = sub;
                img = ll;
                hh = h2;
                ww = w2;
            }
            frame_detail.push(e);
        }
        for (lvl, lvl_bands) in bands.iter().enumerate() {
            for (b, sub) in lvl_bands.iter().zip(["ll", "lh", "hl", "hh"]) {
                b.emit(&mut fv, &format!("wavelet.spatial.{name}.l{}.{sub}", lvl + 1));
            }
        }

        let n = site_detail.len().max(frame_detail.len());
        fv.push(
            format!("wavelet.fused.{name}"),
            pearson(&resample(&site_detail, n), &resample(&frame_detail, n)),
        );
    }
    Ok(fv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn haar_constant_signal() {
        let (a, d) = dwt_symmetric(&[1.0; 4], Basis::Haar);
        close(&a, &[2f64.sqrt(); 2], 1e-12);
        close(&d, &[0.0; 2], 1e-12);
    }

    #[test]
    fn db4_and_bior_on_ramp() {
        let x: Vec<f64> = (1..=7).map(f64::from).collect();
        let (a, d) = dwt_symmetric(&x, Basis::Db4);
        close(
            &a,
            &[7.06453146, 4.23073611, 1.41360717, 2.84665168, 5.587978, 8.79298536, 9.66148997],
            1e-7,
        );
        close(
            &d,
            &[0.02371313, 0.04096209, -0.06467522, 0.23037781, -0.36176988, 0.12079466, 0.0105974],
            1e-7,
        );
        let (a, d) = dwt_symmetric(&x, Basis::Bior22);
        close(&a, &[2.65165043, 1.23743687, 4.24264069, 7.07106781, 10.07627163, 8.66205807], 1e-7);
        close(&d, &[0.35355339, 0.0, 0.0, 0.0, -0.35355339, 0.0], 1e-7);
    }

    #[test]
    fn periodic_orthogonal_bases_preserve_energy() {
        let x: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3 + (i as f64).sin()).collect();
        for basis in [Basis::Haar, Basis::Db4] {
            let (a, d) = dwt_periodic(&x, basis);
            assert!((energy(&a) + energy(&d) - energy(&x)).abs() < 1e-9 * energy(&x));
        }
    }

    #[test]
    fn grid_site_counts() {
        assert_eq!(temporal_grid(64, 64, 16).len(), 16);
        assert_eq!(temporal_grid(8, 8, 16).len(), 1);
    }

    #[test]
    fn resample_linear() {
        close(&resample(&[0.0, 3.0], 4), &[0.0, 1.0, 2.0, 3.0], 1e-12);
    }
}
