//! Fourier features: temporal site spectra, radial spatial profiles, bands,
//! peaks and cross-time spectral consistency.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::stats::{pearson, SummaryStats};
use crate::registry::FeatureVector;
use crate::tensor::Inds;

const BAND_EPS: f64 = 1e-12;
/// Fraction of total energy below which a spectrum counts as empty.
const NEGLIGIBLE: f64 = 1e-24;
pub const TOP_PEAKS: usize = 3;
pub const CONSISTENCY_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpectrum {
    /// Ring mean of `|F|^2`, indexed by ring.
    pub power: Vec<f64>,
    /// Ring populations.
    pub counts: Vec<usize>,
}

impl RadialSpectrum {
    pub fn max_ring(&self) -> usize {
        self.power.len().saturating_sub(1)
    }

    pub fn total(&self) -> f64 {
        self.power
            .iter()
            .zip(&self.counts)
            .map(|(p, &n)| p * n as f64)
            .sum()
    }

    /// Average of several profiles on the same grid.
    pub fn mean_of(profiles: &[RadialSpectrum]) -> RadialSpectrum {
        let mut power = vec![0.0; profiles[0].power.len()];
        for p in profiles {
            for (a, b) in power.iter_mut().zip(&p.power) {
                *a += b;
            }
        }
        let k = profiles.len() as f64;
        power.iter_mut().for_each(|v| *v /= k);
        RadialSpectrum {
            power,
            counts: profiles[0].counts.clone(),
        }
    }
}

/// Unnormalized 2D DFT power `|F(u,v)|^2`, row-major `h x w`.
pub fn power_spectrum_2d(frame: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = frame.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let row = planner.plan_fft_forward(w);
    for r in buf.chunks_exact_mut(w) {
        row.process(r);
    }
    let col = planner.plan_fft_forward(h);
    let mut tmp = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            tmp[y] = buf[y * w + x];
        }
        col.process(&mut tmp);
        for y in 0..h {
            buf[y * w + x] = tmp[y];
        }
    }
    buf.iter().map(|c| c.norm_sqr()).collect()
}

fn centered(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

pub fn ring_index(ky: usize, kx: usize, h: usize, w: usize) -> usize {
    let (u, v) = (centered(ky, h), centered(kx, w));
    (u * u + v * v).sqrt().round() as usize
}

pub fn spatial_radial_profile(frame: &[f64], h: usize, w: usize) -> RadialSpectrum {
    let power = power_spectrum_2d(frame, h, w);
    let rings = ring_index(h / 2, w / 2, h, w) + 1;
    let mut sum = vec![0.0; rings];
    let mut counts = vec![0usize; rings];
    for ky in 0..h {
        for kx in 0..w {
            let r = ring_index(ky, kx, h, w);
            sum[r] += power[ky * w + kx];
            counts[r] += 1;
        }
    }
    let power = sum
        .iter()
        .zip(&counts)
        .map(|(s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
        .collect();
    RadialSpectrum { power, counts }
}

/// Band energies `(low, mid, high)` over ring thirds of the maximum ring.
pub fn band_energies(spec: &RadialSpectrum) -> [f64; 3] {
    let r_max = spec.max_ring() as f64;
    let mut e = [0.0; 3];
    for (r, (p, &n)) in spec.power.iter().zip(&spec.counts).enumerate() {
        let r = r as f64;
        let band = if r < r_max / 3.0 {
            0
        } else if r < 2.0 * r_max / 3.0 {
            1
        } else {
            2
        };
        e[band] += p * n as f64;
    }
    e
}

pub fn band_features(spec: &RadialSpectrum) -> FeatureVector {
    let e = band_energies(spec);
    let total: f64 = e.iter().sum();
    let mut fv = FeatureVector::new();
    for (name, v) in ["low", "mid", "high"].iter().zip(e) {
        fv.push(format!("spectrum.band.energy_{name}"), v);
    }
    let degenerate = total <= f64::MIN_POSITIVE;
    for (name, v) in ["low", "mid", "high"].iter().zip(e) {
        fv.push(
            format!("spectrum.band.prop_{name}"),
            if degenerate { 0.0 } else { v / total },
        );
    }
    let ratio = |a: f64, b: f64| if degenerate { 0.0 } else { a / (b + BAND_EPS) };
    fv.push("spectrum.band.ratio_low_mid", ratio(e[0], e[1]));
    fv.push("spectrum.band.ratio_mid_high", ratio(e[1], e[2]));
    fv.push("spectrum.band.ratio_low_high", ratio(e[0], e[2]));
    fv
}

/// Strict interior local maxima `(ring, height)` for rings `r >= 1`, tallest first.
pub fn spectral_peaks(power: &[f64]) -> Vec<(usize, f64)> {
    let mut peaks: Vec<(usize, f64)> = (1..power.len().saturating_sub(1))
        .filter(|&r| power[r] > power[r - 1] && power[r] > power[r + 1])
        .map(|r| (r, power[r]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    peaks
}

pub fn spectral_peak_features(spec: &RadialSpectrum) -> FeatureVector {
    let peaks = spectral_peaks(&spec.power);
    let mut fv = FeatureVector::new();
    fv.push("spectrum.peak.count", peaks.len() as f64);
    for k in 0..TOP_PEAKS {
        let (pos, height) = peaks.get(k).map_or((0.0, 0.0), |&(r, p)| (r as f64, p));
        fv.push(format!("spectrum.peak.{k}.position"), pos);
        fv.push(format!("spectrum.peak.{k}.height"), height);
    }
    fv
}

/// Four corners then the center.
pub fn temporal_sites(h: usize, w: usize) -> [(usize, usize); 5] {
    [
        (0, 0),
        (0, w - 1),
        (h - 1, 0),
        (h - 1, w - 1),
        (h / 2, w / 2),
    ]
}

/// Magnitude-squared DFT of a short real series.
fn power_spectrum_1d(x: &[f64]) -> Vec<f64> {
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(x.len()).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

pub fn temporal_spectrum_features(inds: &Inds) -> FeatureVector {
    let maps: Vec<Vec<f64>> = (0..inds.len()).map(|t| inds.channel_mean(t)).collect();
    let w = inds.width();
    let mut fv = FeatureVector::new();
    for (s, (y, x)) in temporal_sites(inds.height(), w).into_iter().enumerate() {
        let traj: Vec<f64> = maps.iter().map(|m| m[y * w + x]).collect();
        let p = power_spectrum_1d(&traj);
        let energy: f64 = p.iter().sum();
        let empty = energy <= NEGLIGIBLE;
        let mut dominant = 0;
        if !empty {
            for k in 1..=p.len() / 2 {
                if dominant == 0 || p[k] > p[dominant] {
                    dominant = k;
                }
            }
            if p[dominant] <= NEGLIGIBLE * energy {
                dominant = 0;
            }
        }
        let prefix = format!("spectrum.temporal.site{s}");
        fv.put(&prefix, "energy", energy);
        fv.put(&prefix, "dominant", dominant as f64);
        fv.put(&prefix, "dc_fraction", if empty { 0.0 } else { p[0] / energy });
    }
    fv
}

/// Diff indices sampled at start, quarter, middle, three quarters and end.
pub fn consistency_indices(len: usize) -> Vec<usize> {
    let last = (len - 1) as f64;
    // Halves round down: 0.25 * 6 lands on 1.
    CONSISTENCY_FRACTIONS
        .iter()
        .map(|f| (f * last - 0.5).ceil().max(0.0) as usize)
        .collect()
}

fn profiles(inds: &Inds, indices: impl Iterator<Item = usize>) -> Vec<RadialSpectrum> {
    indices
        .map(|t| spatial_radial_profile(&inds.channel_mean(t), inds.height(), inds.width()))
        .collect()
}

pub fn spectral_consistency_features(inds: &Inds) -> FeatureVector {
    let p = profiles(inds, consistency_indices(inds.len()).into_iter());
    let r: Vec<f64> = p.windows(2).map(|w| pearson(&w[0].power, &w[1].power)).collect();
    let mut fv = FeatureVector::new();
    for (k, v) in r.iter().enumerate() {
        fv.push(format!("spectrum.consistency.r{k}"), *v);
    }
    SummaryStats::emit_series(&mut fv, "spectrum.consistency", &r);
    fv
}

/// Video-level radial profile: mean over all channel-averaged diff maps.
pub fn video_radial_profile(inds: &Inds) -> RadialSpectrum {
    RadialSpectrum::mean_of(&profiles(inds, 0..inds.len()))
}

pub fn spectrum_features(inds: &Inds) -> FeatureVector {
    let mut fv = temporal_spectrum_features(inds);
    let profile = video_radial_profile(inds);
    fv.append(band_features(&profile));
    fv.append(spectral_peak_features(&profile));
    fv.append(spectral_consistency_features(inds));
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::LatentTensor;
    use std::f64::consts::PI;

    #[test]
    fn dc_only_frame() {
        let n = 8;
        let spec = spatial_radial_profile(&vec![2.0; n * n], n, n);
        assert!((spec.power[0] - (2.0 * 64.0f64).powi(2)).abs() < 1e-9);
        assert!(spec.power[1..].iter().all(|&p| p.abs() < 1e-9));
        let fv = band_features(&spec);
        assert_eq!(fv.get("spectrum.band.prop_low"), Some(1.0));
        assert_eq!(fv.get("spectrum.band.prop_high"), Some(0.0));
    }

    #[test]
    fn horizontal_cosine_lands_on_its_ring() {
        let (h, w, k) = (8, 16, 3);
        let frame: Vec<f64> = (0..h * w)
            .map(|i| (2.0 * PI * k as f64 * (i % w) as f64 / w as f64).cos())
            .collect();
        let spec = spatial_radial_profile(&frame, h, w);
        let (argmax, _) = spec
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(argmax, k);
    }

    #[test]
    fn peaks_and_padding() {
        let fv = spectral_peak_features(&RadialSpectrum {
            power: vec![5.0, 4.0, 3.0, 2.0, 1.0],
            counts: vec![1; 5],
        });
        assert_eq!(fv.len(), 1 + 2 * TOP_PEAKS);
        assert!(fv.values().iter().all(|&v| v == 0.0));
        let fv = spectral_peak_features(&RadialSpectrum {
            power: vec![5.0, 1.0, 1.0, 9.0, 1.0, 0.5],
            counts: vec![1; 6],
        });
        assert_eq!(fv.get("spectrum.peak.count"), Some(1.0));
        assert_eq!(fv.get("spectrum.peak.0.position"), Some(3.0));
        assert_eq!(fv.get("spectrum.peak.0.height"), Some(9.0));
    }

    #[test]
    fn consistency_sampling_points() {
        assert_eq!(consistency_indices(7), vec![0, 1, 3, 4, 6]);
    }

    #[test]
    fn temporal_cosine_dominant_bin() {
        let diffs = (0..7)
            .map(|t| LatentTensor::filled(&[2, 4, 4], (2.0 * PI * t as f64 * 2.0 / 7.0).cos()))
            .collect();
        let fv = temporal_spectrum_features(&Inds::new(diffs).unwrap());
        for s in 0..5 {
            assert_eq!(fv.get(&format!("spectrum.temporal.site{s}.dominant")), Some(2.0));
        }
        let flat = Inds::new(vec![LatentTensor::filled(&[2, 4, 4], 1.5); 7]).unwrap();
        let fv = temporal_spectrum_features(&flat);
        assert_eq!(fv.get("spectrum.temporal.site0.dominant"), Some(0.0));
        assert!((fv.get("spectrum.temporal.site0.dc_fraction").unwrap() - 1.0).abs() < 1e-12);
        let fv = spectral_consistency_features(&flat);
        for k in 0..4 {
            // A single nonzero ring correlates perfectly with itself.
            assert!((fv.get(&format!("spectrum.consistency.r{k}")).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
