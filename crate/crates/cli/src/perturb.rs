//! Pixel-domain perturbations applied to sampled frames before encoding.

use std::fmt;
use std::path::Path;
use std::process::Command;
use std::str::FromStr;

use dbinds_core::tensor::LatentTensor;
use dbinds_core::Error;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// `blur:<sigma>` | `jpeg:<quality>` | `resize:<factor>` | `noise:<sigma>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Perturbation {
    Blur(f64),
    Jpeg(u8),
    Resize(f64),
    Noise(f64),
}

pub const DEFAULT_GRID: [Perturbation; 4] = [
    Perturbation::Blur(1.0),
    Perturbation::Blur(2.0),
    Perturbation::Jpeg(95),
    Perturbation::Jpeg(90),
];

impl FromStr for Perturbation {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = |why: &str| CliError::Usage(format!("perturbation {s:?}: {why}"));
        let (kind, arg) = s.trim().split_once(':').ok_or_else(|| bad("expected <kind>:<value>"))?;
        let num = || arg.trim().parse::<f64>().map_err(|_| bad("value is not a number"));
        match kind {
            "blur" => match num()? {
                v if v > 0.0 && v.is_finite() => Ok(Perturbation::Blur(v)),
                _ => Err(bad("sigma must be positive")),
            },
            "noise" => match num()? {
                v if v >= 0.0 && v.is_finite() => Ok(Perturbation::Noise(v)),
                _ => Err(bad("sigma must be non-negative")),
            },
            "resize" => match num()? {
                v if v > 0.0 && v <= 1.0 => Ok(Perturbation::Resize(v)),
                _ => Err(bad("factor must lie in (0, 1]")),
            },
            "jpeg" => match arg.trim().parse::<u8>() {
                Ok(q) if (1..=100).contains(&q) => Ok(Perturbation::Jpeg(q)),
                _ => Err(bad("quality must be an integer in 1..=100")),
            },
            _ => Err(bad("unknown kind")),
        }
    }
}

impl TryFrom<String> for Perturbation {
    type Error = CliError;

    fn try_from(s: String) -> CliResult<Self> {
        s.parse()
    }
}

impl From<Perturbation> for String {
    fn from(p: Perturbation) -> String {
        p.to_string()
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Blur(s) => write!(f, "blur:{s:?}"),
            Perturbation::Jpeg(q) => write!(f, "jpeg:{q}"),
            Perturbation::Resize(v) => write!(f, "resize:{v:?}"),
            Perturbation::Noise(s) => write!(f, "noise:{s:?}"),
        }
    }
}

fn hwc(frame: &LatentTensor) -> CliResult<(usize, usize, usize)> {
    match *frame.dims() {
        [h, w, c] if h > 0 && w > 0 && c > 0 => Ok((h, w, c)),
        ref d => Err(Error::Shape(format!("pixel frame must be H x W x C, got {d:?}")).into()),
    }
}

/// Normalized Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-r..=r).map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian blur with replicated borders.
pub fn blur(frame: &LatentTensor, sigma: f64) -> CliResult<LatentTensor> {
    let (h, w, c) = hwc(frame)?;
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let clampi = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let src = frame.data();
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                tmp[(y * w + x) * c + ch] = k
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t * src[(y * w + clampi(x as i64 + i as i64 - r, w)) * c + ch])
                    .sum();
            }
        }
    }
    let mut out = LatentTensor::zeros(frame.dims());
    let dst = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                dst[(y * w + x) * c + ch] = k
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t * tmp[(clampi(y as i64 + i as i64 - r, h) * w + x) * c + ch])
                    .sum();
            }
        }
    }
    Ok(out)
}

/// Overlap weights of the source cells covered by each output cell.
fn area_weights(n: usize, m: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = n as f64 / m as f64;
    (0..m)
        .map(|i| {
            let (a, b) = (i as f64 * scale, (i + 1) as f64 * scale);
            let mut taps = Vec::new();
            let mut j = a.floor() as usize;
            while (j as f64) < b && j < n {
                let overlap = (b.min((j + 1) as f64) - a.max(j as f64)).max(0.0);
                if overlap > 0.0 {
                    taps.push((j, overlap / scale));
                }
                j += 1;
            }
            taps
        })
        .collect()
}

/// Downscale by `factor` with area averaging.
pub fn resize(frame: &LatentTensor, factor: f64) -> CliResult<LatentTensor> {
    let (h, w, c) = hwc(frame)?;
    let (oh, ow) = (((h as f64 * factor).round() as usize).max(1), ((w as f64 * factor).round() as usize).max(1));
    let (wy, wx) = (area_weights(h, oh), area_weights(w, ow));
    let src = frame.data();
    let mut out = LatentTensor::zeros(&[oh, ow, c]);
    let dst = out.data_mut();
    for (oy, ty) in wy.iter().enumerate() {
        for (ox, tx) in wx.iter().enumerate() {
            for ch in 0..c {
                let mut acc = 0.0;
                for &(y, a) in ty {
                    for &(x, b) in tx {
                        acc += a * b * src[(y * w + x) * c + ch];
                    }
                }
                dst[(oy * ow + ox) * c + ch] = acc;
            }
        }
    }
    Ok(out)
}

/// Additive Gaussian noise, clipped to `[0, 1]`.
pub fn add_noise(frame: &LatentTensor, sigma: f64, rng: &mut impl Rng) -> LatentTensor {
    let mut out = frame.clone();
    for v in out.data_mut() {
        let n: f64 = rng.sample(StandardNormal);
        *v = (*v + sigma * n).clamp(0.0, 1.0);
    }
    out
}

fn to_rgb8(frame: &LatentTensor) -> CliResult<image::RgbImage> {
    let (h, w, c) = hwc(frame)?;
    let src = frame.data();
    Ok(image::RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let p = (y as usize * w + x as usize) * c;
        let px = |k: usize| (src[p + if c >= 3 { k } else { 0 }].clamp(0.0, 1.0) * 255.0).round() as u8;
        image::Rgb([px(0), px(1), px(2)])
    }))
}

/// Round-trip a frame through an external JPEG transcoder.
///
/// The template is split on whitespace; `{in}`, `{out}` and `{quality}` are
/// substituted in every argument. The input is written as PNG.
pub fn jpeg_roundtrip(frame: &LatentTensor, quality: u8, template: &str) -> CliResult<LatentTensor> {
    let (h, w, c) = hwc(frame)?;
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let (input, output) = (dir.path().join("in.png"), dir.path().join("out.jpg"));
    to_rgb8(frame)?
        .save(&input)
        .map_err(|e| CliError::Data(format!("encode {}: {e}", input.display())))?;
    let subst = |a: &str| {
        a.replace("{in}", &input.to_string_lossy())
            .replace("{out}", &output.to_string_lossy())
            .replace("{quality}", &quality.to_string())
    };
    let mut parts = template.split_whitespace().map(subst);
    let program = parts.next().ok_or_else(|| CliError::Usage("empty JPEG transcoder command".into()))?;
    let status = Command::new(&program)
        .args(parts)
        .status()
        .map_err(|e| CliError::Data(format!("transcoder {program:?}: {e}")))?;
    if !status.success() {
        return Err(CliError::Data(format!("transcoder {program:?} exited with {status}")));
    }
    read_rgb(&output, h, w, c)
}

fn read_rgb(path: &Path, h: usize, w: usize, c: usize) -> CliResult<LatentTensor> {
    let img = image::open(path)
        .map_err(|e| CliError::Data(format!("decode {}: {e}", path.display())))?
        .to_rgb8();
    if img.width() as usize != w || img.height() as usize != h {
        return Err(CliError::Data(format!(
            "transcoder returned {}x{}, expected {w}x{h}",
            img.width(),
            img.height()
        )));
    }
    let mut out = LatentTensor::zeros(&[h, w, c]);
    let dst = out.data_mut();
    for (x, y, px) in img.enumerate_pixels() {
        let p = (y as usize * w + x as usize) * c;
        for k in 0..c {
            dst[p + k] = if c >= 3 {
                px[k.min(2)] as f64 / 255.0
            } else {
                px.0.iter().map(|&v| v as f64).sum::<f64>() / (3.0 * 255.0)
            };
        }
    }
    Ok(out)
}

/// Apply one perturbation to a pixel frame.
pub fn apply(frame: &LatentTensor, p: Perturbation, transcoder: Option<&str>, rng: &mut impl Rng) -> CliResult<LatentTensor> {
    match p {
        Perturbation::Blur(s) => blur(frame, s),
        Perturbation::Resize(f) => resize(frame, f),
        Perturbation::Noise(s) => Ok(add_noise(frame, s, rng)),
        Perturbation::Jpeg(q) => {
            let t = transcoder.ok_or_else(|| CliError::Usage("jpeg perturbation needs a transcoder".into()))?;
            jpeg_roundtrip(frame, q, t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn grammar_round_trips() {
        for s in ["blur:1.0", "jpeg:95", "resize:0.5", "noise:0.05"] {
            assert_eq!(s.parse::<Perturbation>().unwrap().to_string(), s);
        }
        for s in ["blur:0", "jpeg:0", "jpeg:101", "resize:1.5", "warp:1", "blur"] {
            assert!(s.parse::<Perturbation>().is_err(), "{s}");
        }
    }

    #[test]
    fn constant_frame_survives_blur() {
        let f = LatentTensor::filled(&[9, 7, 3], 0.4);
        for v in blur(&f, 2.0).unwrap().data() {
            assert!((v - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_matches_direct_kernel() {
        let n = 15;
        let mut f = LatentTensor::zeros(&[n, n, 1]);
        f.data_mut()[(7 * n) + 7] = 1.0;
        let b = blur(&f, 1.0).unwrap();
        let g = |d: i64| (-(d * d) as f64 / 2.0).exp();
        let norm: f64 = (-3..=3).map(g).sum();
        for y in 0..n as i64 {
            for x in 0..n as i64 {
                let (dy, dx) = (y - 7, x - 7);
                let want = if dy.abs() <= 3 && dx.abs() <= 3 { g(dy) * g(dx) / (norm * norm) } else { 0.0 };
                assert!((b.data()[(y * n as i64 + x) as usize] - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn wider_blur_removes_more_high_frequency() {
        let n = 32;
        let f = LatentTensor::from_fn(&[n, n, 1], |i| if (i / n + i % n) % 2 == 0 { 1.0 } else { 0.0 });
        let hf = |t: &LatentTensor| -> f64 {
            let d = t.data();
            (0..n * n - 1).filter(|i| (i + 1) % n != 0).map(|i| (d[i] - d[i + 1]).powi(2)).sum()
        };
        let (b1, b2) = (blur(&f, 1.0).unwrap(), blur(&f, 2.0).unwrap());
        assert!(hf(&b2) < hf(&b1) && hf(&b1) < hf(&f));
    }

    #[test]
    fn area_resize_averages_blocks() {
        let f = LatentTensor::from_fn(&[4, 4, 1], |i| i as f64);
        let r = resize(&f, 0.5).unwrap();
        assert_eq!(r.dims(), &[2, 2, 1]);
        assert_eq!(r.data(), &[2.5, 4.5, 10.5, 12.5]);
        let r = resize(&LatentTensor::filled(&[6, 6, 2], 0.3), 1.0 / 3.0 * 2.0).unwrap();
        assert!(r.data().iter().all(|v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn noise_is_seeded_and_clipped() {
        let f = LatentTensor::filled(&[4, 4, 3], 0.5);
        let a = add_noise(&f, 0.2, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let b = add_noise(&f, 0.2, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_ne!(a, f);
    }

    #[test]
    fn jpeg_requires_a_transcoder() {
        let f = LatentTensor::filled(&[8, 8, 3], 0.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert!(apply(&f, Perturbation::Jpeg(95), None, &mut rng).is_err());
        assert!(apply(&f, Perturbation::Jpeg(95), Some("false {in} {out}"), &mut rng).is_err());
    }
}
