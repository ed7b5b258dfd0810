//! Robustness grid: a trained bundle evaluated on perturbed pixel inputs.

use std::path::Path;

use dbinds_core::classify::EvalReport;
use dbinds_core::VideoManifestEntry;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::extract::extract_entries;
use crate::perturb::Perturbation;
use crate::train::Bundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    /// `clean` for the unperturbed baseline.
    pub condition: String,
    pub status: CellStatus,
    pub detail: Option<String>,
    pub report: Option<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub cells: Vec<GridCell>,
}

impl RobustnessReport {
    /// Every cell either evaluated or explicitly skipped.
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| match c.status {
            CellStatus::Ok => c.report.is_some(),
            CellStatus::Skipped => c.detail.is_some(),
            CellStatus::Error => false,
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12}  {:<8}  {:>8}  {:>6}  {:>9}\n", "condition", "status", "accuracy", "gdr", "real_rate");
        for c in &self.cells {
            let status = match c.status {
                CellStatus::Ok => "ok",
                CellStatus::Skipped => "skipped",
                CellStatus::Error => "error",
            };
            match &c.report {
                Some(r) => out.push_str(&format!(
                    "{:<12}  {:<8}  {:>8.4}  {:>6.4}  {:>9.4}\n",
                    c.condition, status, r.accuracy, r.gdr, r.real_rate
                )),
                None => out.push_str(&format!("{:<12}  {:<8}  {}\n", c.condition, status, c.detail.as_deref().unwrap_or(""))),
            }
        }
        out
    }
}

fn evaluate_condition(entries: &[VideoManifestEntry], base: &Path, bundle: &Bundle, transcoder: Option<&str>, p: Option<Perturbation>) -> GridCell {
    let condition = p.map_or_else(|| "clean".to_string(), |p| p.to_string());
    if let (Some(Perturbation::Jpeg(_)), None) = (p, transcoder) {
        return GridCell {
            condition,
            status: CellStatus::Skipped,
            detail: Some("skipped: no JPEG transcoder configured".into()),
            report: None,
        };
    }
    let mut cfg = bundle.config.clone();
    cfg.jpeg_transcoder = transcoder.map(str::to_string);
    let run = || -> CliResult<EvalReport> {
        let (set, _) = extract_entries(entries, base, &cfg, p)?;
        bundle.evaluate(&set)
    };
    match run() {
        Ok(r) => GridCell {
            condition,
            status: CellStatus::Ok,
            detail: None,
            report: Some(r),
        },
        Err(e) => GridCell {
            condition,
            status: CellStatus::Error,
            detail: Some(e.to_string()),
            report: None,
        },
    }
}

/// Clean baseline followed by one cell per perturbation.
pub fn robustness_grid(
    entries: &[VideoManifestEntry],
    base: &Path,
    bundle: &Bundle,
    perturbations: &[Perturbation],
    transcoder: Option<&str>,
) -> CliResult<RobustnessReport> {
    bundle.check()?;
    let mut cells = vec![evaluate_condition(entries, base, bundle, transcoder, None)];
    for &p in perturbations {
        cells.push(evaluate_condition(entries, base, bundle, transcoder, Some(p)));
    }
    Ok(RobustnessReport { cells })
}
