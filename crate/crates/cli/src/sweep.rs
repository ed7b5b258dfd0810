//! Inversion-step sweep: full extract, train and eval per step count on fixed splits.

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use dbinds_core::classify::{stratified_split, EvalReport};
use dbinds_core::manifest::Label;
use dbinds_core::VideoManifestEntry;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::FeatureSet;
use crate::error::CliResult;
use crate::extract::extract_entries;
use crate::train::train;

pub const DEFAULT_STEPS: [usize; 5] = [1, 5, 10, 15, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub steps: usize,
    /// Wall-clock inside the inversion loop, summed over videos.
    pub inversion_seconds: f64,
    pub seconds_per_video: f64,
    pub total_seconds: f64,
    pub failed_videos: usize,
    pub best_objective: Option<f64>,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub predictor: String,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Stratified `(first, second)` split of manifest entries.
pub fn split_entries(entries: &[VideoManifestEntry], fraction: f64, seed: u64) -> CliResult<(Vec<VideoManifestEntry>, Vec<VideoManifestEntry>)> {
    let y: Vec<bool> = entries.iter().map(|e| e.label == Label::Generated).collect();
    let (a, b) = stratified_split(&y, fraction, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| entries[i].clone()).collect();
    Ok((pick(&a), pick(&b)))
}

fn rows_with_ids(set: &FeatureSet, ids: &HashSet<&str>) -> Vec<usize> {
    (0..set.samples.len()).filter(|&i| ids.contains(set.samples[i].id.as_str())).collect()
}

fn run_step(entries: &[VideoManifestEntry], base: &Path, cfg: &PipelineConfig, train_ids: &HashSet<&str>, test_ids: &HashSet<&str>) -> CliResult<SweepRow> {
    let start = Instant::now();
    let (set, rep) = extract_entries(entries, base, cfg, None)?;
    let outcome = train(&set.subset(&rows_with_ids(&set, train_ids)), cfg)?;
    let report = outcome.bundle.evaluate(&set.subset(&rows_with_ids(&set, test_ids)))?;
    let row = SweepRow {
        steps: cfg.inversion_steps,
        inversion_seconds: rep.inversion_seconds,
        seconds_per_video: rep.inversion_seconds / rep.succeeded.max(1) as f64,
        total_seconds: start.elapsed().as_secs_f64(),
        failed_videos: rep.failures.len(),
        best_objective: Some(outcome.bundle.best.objective),
        report: Some(report),
        error: None,
    };
    Ok(row)
}

/// One row per step count; a failing step is recorded and the sweep continues.
pub fn sweep_steps(entries: &[VideoManifestEntry], base: &Path, cfg: &PipelineConfig, steps: &[usize]) -> CliResult<SweepReport> {
    cfg.validate()?;
    let (tr, te) = split_entries(entries, 1.0 - cfg.val_fraction, cfg.seed)?;
    let train_ids: HashSet<&str> = tr.iter().map(|e| e.id.as_str()).collect();
    let test_ids: HashSet<&str> = te.iter().map(|e| e.id.as_str()).collect();
    let mut rows = Vec::with_capacity(steps.len());
    for &s in steps {
        let step_cfg = PipelineConfig {
            inversion_steps: s,
            ..cfg.clone()
        };
        let start = Instant::now();
        let row = match run_step(entries, base, &step_cfg, &train_ids, &test_ids) {
            Ok(row) => row,
            Err(e) => {
                log::warn!("sweep step {s} failed: {e}");
                SweepRow {
                    steps: s,
                    inversion_seconds: 0.0,
                    seconds_per_video: 0.0,
                    total_seconds: start.elapsed().as_secs_f64(),
                    failed_videos: 0,
                    best_objective: None,
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    Ok(SweepReport {
        predictor: cfg.predictor.to_string(),
        train_ids: tr.into_iter().map(|e| e.id).collect(),
        test_ids: te.into_iter().map(|e| e.id).collect(),
        rows,
    })
}
