//! Manifest ingestion: tensors to INDS to feature rows, one video at a time.

use std::path::Path;
use std::time::{Duration, Instant};

use dbinds_core::belm::invert_video;
use dbinds_core::encoder::encode_frame;
use dbinds_core::frames::{sample_frame_indices, standardize_frame};
use dbinds_core::ltns::read_tensor;
use dbinds_core::manifest::InputKind;
use dbinds_core::schedule::NoiseSchedule;
use dbinds_core::{build_inds, extract_features, Error, FeatureMatrix, Inds, LatentTensor, NoisePredictor, NoiseSequence, VideoManifestEntry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::{FeatureSet, SampleMeta};
use crate::error::{CliError, CliResult};
use crate::perturb::{self, Perturbation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoFailure {
    pub id: String,
    pub error: String,
    pub predictor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub total: usize,
    pub succeeded: usize,
    pub failures: Vec<VideoFailure>,
    pub inversion_steps: usize,
    pub predictor: String,
    /// Summed wall-clock spent inside the inversion loop.
    pub inversion_seconds: f64,
    pub total_seconds: f64,
    pub perturbation: Option<Perturbation>,
}

fn needs_inversion(kind: InputKind) -> bool {
    matches!(kind, InputKind::Frames | InputKind::Latents)
}

/// Sample, optionally perturb, standardize and encode `F x H x W x C` pixel frames.
pub fn encode_frames(
    video: &LatentTensor,
    cfg: &PipelineConfig,
    perturbation: Option<Perturbation>,
    rng: &mut ChaCha8Rng,
) -> CliResult<Vec<LatentTensor>> {
    if video.rank() != 4 {
        return Err(Error::Shape(format!("pixel video must be F x H x W x C, got {:?}", video.dims())).into());
    }
    let frames = video.unstack()?;
    let idx = sample_frame_indices(frames.len(), cfg.frames, cfg.stride)?;
    idx.into_iter()
        .map(|i| {
            let mut f = frames[i].clone();
            if let Some(p) = perturbation {
                f = perturb::apply(&f, p, cfg.jpeg_transcoder.as_deref(), rng)?;
            }
            let f = standardize_frame(&f, cfg.target_size)?;
            Ok(encode_frame(&f, cfg.encoder_block)?)
        })
        .collect()
}

fn invert(latents: &[LatentTensor], sched: &NoiseSchedule, pred: Option<&dyn NoisePredictor>) -> CliResult<(NoiseSequence, Duration)> {
    let pred = pred.expect("predictor built for inputs that need inversion");
    let start = Instant::now();
    let seq = invert_video(latents, sched, pred)?;
    Ok((seq, start.elapsed()))
}

/// INDS for one manifest entry, plus the time spent inverting.
pub fn video_inds(
    entry: &VideoManifestEntry,
    base: &Path,
    cfg: &PipelineConfig,
    sched: &NoiseSchedule,
    pred: Option<&dyn NoisePredictor>,
    perturbation: Option<Perturbation>,
    index: usize,
) -> CliResult<(Inds, Duration)> {
    let t = read_tensor(entry.resolve(base))?;
    let (seq, took) = match entry.kind {
        InputKind::Inds => return Ok((Inds::from_stacked(&t)?, Duration::ZERO)),
        InputKind::Noise => (NoiseSequence::from_stacked(&t)?, Duration::ZERO),
        InputKind::Latents => invert(&t.unstack()?, sched, pred)?,
        InputKind::Frames => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let latents = encode_frames(&t, cfg, perturbation, &mut rng)?;
            invert(&latents, sched, pred)?
        }
    };
    Ok((build_inds(&seq)?, took))
}

/// Extract one feature row per entry. Failing videos are recorded and skipped;
/// more than half failing aborts the run.
pub fn extract_entries(
    entries: &[VideoManifestEntry],
    base: &Path,
    cfg: &PipelineConfig,
    perturbation: Option<Perturbation>,
) -> CliResult<(FeatureSet, ExtractReport)> {
    cfg.validate()?;
    if entries.is_empty() {
        return Err(CliError::Data("manifest has no entries".into()));
    }
    if perturbation.is_some() {
        if let Some(e) = entries.iter().find(|e| e.kind != InputKind::Frames) {
            return Err(CliError::Usage(format!(
                "perturbations apply to pixel frames only; entry {} is {:?}",
                e.id, e.kind
            )));
        }
    }
    let start = Instant::now();
    let sched = cfg.schedule()?;
    let pred = if entries.iter().any(|e| needs_inversion(e.kind)) {
        Some(cfg.predictor.build()?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    let results: Vec<CliResult<(dbinds_core::FeatureVector, Duration)>> = pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| {
                let (inds, took) = video_inds(e, base, cfg, &sched, pred.as_deref(), perturbation, i)?;
                Ok((extract_features(&inds, &cfg.features)?, took))
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    let mut first_predictor_error: Option<Error> = None;
    let mut inversion = Duration::ZERO;
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok((fv, took)) => {
                inversion += took;
                rows.push(fv);
                samples.push(SampleMeta {
                    id: e.id.clone(),
                    label: e.label,
                    source: e.source.clone(),
                });
            }
            Err(err) => {
                let predictor = matches!(&err, CliError::Core(c) if c.is_predictor());
                log::warn!("video {} failed: {err}", e.id);
                failures.push(VideoFailure {
                    id: e.id.clone(),
                    error: err.to_string(),
                    predictor,
                });
                if let (true, None, CliError::Core(c)) = (predictor, &first_predictor_error, err) {
                    first_predictor_error = Some(c);
                }
            }
        }
    }
    if failures.len() * 2 > entries.len() {
        if failures.iter().all(|f| f.predictor) {
            if let Some(e) = first_predictor_error {
                return Err(e.into());
            }
        }
        let shown: Vec<String> = failures.iter().take(5).map(|f| format!("{}: {}", f.id, f.error)).collect();
        return Err(CliError::Data(format!(
            "{} of {} videos failed; first failures: {}",
            failures.len(),
            entries.len(),
            shown.join("; ")
        )));
    }
    let matrix = FeatureMatrix::from_vectors(&rows)?;
    let report = ExtractReport {
        total: entries.len(),
        succeeded: rows.len(),
        failures,
        inversion_steps: cfg.inversion_steps,
        predictor: cfg.predictor.to_string(),
        inversion_seconds: inversion.as_secs_f64(),
        total_seconds: start.elapsed().as_secs_f64(),
        perturbation,
    };
    Ok((FeatureSet::new(matrix, samples)?, report))
}
