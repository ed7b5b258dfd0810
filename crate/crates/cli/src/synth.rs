//! Synthetic corpora with a controlled contrast between the two classes.
//!
//! Generated-like videos evolve inside a low-rank temporal subspace with small
//! isotropic noise; real-like videos take independent heavy-tailed steps.

use std::path::Path;

use dbinds_core::ltns::write_tensor;
use dbinds_core::manifest::{write_manifest, InputKind, Label};
use dbinds_core::{Error, LatentTensor, VideoManifestEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SOURCE_REAL: &str = "synth-real";
pub const SOURCE_GENERATED: &str = "synth-generated";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_real: usize,
    pub n_generated: usize,
    /// Temporal rank of generated-like deltas.
    pub rank_generated: usize,
    pub noise_scale_real: f64,
    pub noise_scale_generated: f64,
    /// `noise`, `latents` or `frames`.
    pub kind: InputKind,
    /// Sequence length for noise and latent outputs; frame count for pixel outputs.
    pub frames: usize,
    pub channels: usize,
    /// Spatial edge of latent-domain outputs.
    pub size: usize,
    /// Spatial edge of pixel outputs.
    pub pixel_size: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_real: 100,
            n_generated: 100,
            rank_generated: 2,
            noise_scale_real: 1.0,
            noise_scale_generated: 0.1,
            kind: InputKind::Noise,
            frames: 8,
            channels: 4,
            size: 32,
            pixel_size: 64,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> CliResult<()> {
        let counts = [
            ("n_real", self.n_real),
            ("n_generated", self.n_generated),
            ("rank_generated", self.rank_generated),
            ("channels", self.channels),
            ("size", self.size),
            ("pixel_size", self.pixel_size),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::Usage(format!("{name} must be at least 1")));
            }
        }
        if self.frames < 2 {
            return Err(CliError::Usage("frames must be at least 2".into()));
        }
        if !(self.noise_scale_real >= self.noise_scale_generated && self.noise_scale_generated >= 0.0) {
            return Err(CliError::Usage("need noise_scale_real >= noise_scale_generated >= 0".into()));
        }
        if self.kind == InputKind::Inds {
            return Err(CliError::Usage("synthetic output kind must be noise, latents or frames".into()));
        }
        Ok(())
    }
}

fn video_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ index as u64)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `frames x channels x size x size` sequence built from per-step deltas.
pub fn latent_sequence(spec: &SyntheticSpec, generated: bool, rng: &mut ChaCha8Rng) -> LatentTensor {
    let plane = spec.channels * spec.size * spec.size;
    let mut x: Vec<f64> = (0..plane).map(|_| normal(rng)).collect();
    let mut out = Vec::with_capacity(plane * spec.frames);
    out.extend_from_slice(&x);
    let basis: Vec<Vec<f64>> = if generated {
        (0..spec.rank_generated).map(|_| (0..plane).map(|_| normal(rng)).collect()).collect()
    } else {
        Vec::new()
    };
    let t3 = StudentT::new(3.0).expect("valid degrees of freedom");
    for _ in 1..spec.frames {
        if generated {
            let coeffs: Vec<f64> = basis.iter().map(|_| normal(rng)).collect();
            for (i, v) in x.iter_mut().enumerate() {
                let structured: f64 = basis.iter().zip(&coeffs).map(|(b, a)| a * b[i]).sum();
                *v += structured + spec.noise_scale_generated * normal(rng);
            }
        } else {
            for v in x.iter_mut() {
                let step: f64 = t3.sample(rng);
                *v += spec.noise_scale_real * step;
            }
        }
        out.extend_from_slice(&x);
    }
    LatentTensor::new(vec![spec.frames, spec.channels, spec.size, spec.size], out).expect("consistent shape")
}

/// `frames x P x P x 3` pixel clip in `[0, 1]`.
pub fn pixel_video(spec: &SyntheticSpec, generated: bool, rng: &mut ChaCha8Rng) -> LatentTensor {
    let p = spec.pixel_size;
    let waves: Vec<[f64; 4]> = (0..3)
        .map(|_| {
            [
                rng.random_range(1.0..4.0),
                rng.random_range(1.0..4.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.05..0.2),
            ]
        })
        .collect();
    let (vy, vx) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut out = Vec::with_capacity(spec.frames * p * p * 3);
    for t in 0..spec.frames {
        for y in 0..p {
            for x in 0..p {
                let (fy, fx) = ((y as f64 + vy * t as f64) / p as f64, (x as f64 + vx * t as f64) / p as f64);
                for (c, w) in waves.iter().enumerate() {
                    let base = 0.5 + w[3] * (std::f64::consts::TAU * (w[0] * fy + w[1] * fx) + w[2] + c as f64).sin();
                    let jitter = if generated {
                        spec.noise_scale_generated * 0.05 * normal(rng)
                    } else {
                        spec.noise_scale_real * 0.05 * normal(rng)
                    };
                    out.push((base + jitter).clamp(0.0, 1.0));
                }
            }
        }
    }
    LatentTensor::new(vec![spec.frames, p, p, 3], out).expect("consistent shape")
}

/// Write every video under `dir/tensors` plus `dir/manifest.jsonl`.
pub fn synth_dataset(spec: &SyntheticSpec, seed: u64, dir: impl AsRef<Path>) -> CliResult<Vec<VideoManifestEntry>> {
    spec.validate()?;
    let dir = dir.as_ref();
    let tensors = dir.join("tensors");
    std::fs::create_dir_all(&tensors).map_err(|e| Error::io(&tensors, e))?;
    let total = spec.n_real + spec.n_generated;
    let mut entries = Vec::with_capacity(total);
    for i in 0..total {
        let generated = i >= spec.n_real;
        let mut rng = video_rng(seed, i);
        let t = match spec.kind {
            InputKind::Frames => pixel_video(spec, generated, &mut rng),
            _ => latent_sequence(spec, generated, &mut rng),
        };
        let (label, source) = if generated {
            (Label::Generated, SOURCE_GENERATED)
        } else {
            (Label::Real, SOURCE_REAL)
        };
        let id = format!("{}-{i:05}", if generated { "gen" } else { "real" });
        let rel = Path::new("tensors").join(format!("{id}.ltns"));
        write_tensor(&t, dir.join(&rel))?;
        entries.push(VideoManifestEntry {
            id,
            tensor_path: rel,
            label,
            source: source.into(),
            kind: spec.kind,
        });
    }
    write_manifest(&entries, dir.join(MANIFEST_FILE))?;
    Ok(entries)
}
