//! Pipeline configuration: defaults, JSON config files and flag overrides.

use std::path::Path;

use dbinds_core::classify::OptimConfig;
use dbinds_core::schedule::{make_schedule, LinearBetaParams, NoiseSchedule};
use dbinds_core::select::{SelectionConfig, Strategy};
use dbinds_core::{FeatureConfig, PredictorSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const PREDICTOR_ENV: &str = "DBINDS_PREDICTOR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Frames sampled per video.
    pub frames: usize,
    pub stride: usize,
    /// Square pixel size frames are cropped or padded to before encoding.
    pub target_size: usize,
    /// Pixel block edge of the built-in encoder.
    pub encoder_block: usize,
    pub inversion_steps: usize,
    pub schedule: LinearBetaParams,
    pub features: FeatureConfig,
    pub strategy: Strategy,
    pub selection: SelectionConfig,
    pub optim: OptimConfig,
    pub predictor: PredictorSpec,
    pub seed: u64,
    /// Share of each class held out for validation during training.
    pub val_fraction: f64,
    /// Worker threads for video-level parallelism; 0 picks the core count.
    pub workers: usize,
    /// Command template for JPEG round trips, with `{in}`, `{out}` and `{quality}`.
    pub jpeg_transcoder: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frames: 8,
            stride: 2,
            target_size: 512,
            encoder_block: 8,
            inversion_steps: 10,
            schedule: LinearBetaParams::default(),
            features: FeatureConfig::default(),
            strategy: Strategy::All,
            selection: SelectionConfig::default(),
            optim: OptimConfig::default(),
            predictor: PredictorSpec::default(),
            seed: 0,
            val_fraction: 0.2,
            workers: 0,
            jpeg_transcoder: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Replace the predictor with `DBINDS_PREDICTOR` when set.
    pub fn apply_env(&mut self) -> CliResult<()> {
        if let Ok(v) = std::env::var(PREDICTOR_ENV) {
            if !v.trim().is_empty() {
                self.predictor = v
                    .parse()
                    .map_err(|e| CliError::Usage(format!("{PREDICTOR_ENV}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let counts = [
            ("frames", self.frames),
            ("stride", self.stride),
            ("target_size", self.target_size),
            ("encoder_block", self.encoder_block),
            ("inversion_steps", self.inversion_steps),
            ("optim.trials", self.optim.trials),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::Usage(format!("{name} must be at least 1")));
            }
        }
        if self.frames < 2 {
            return Err(CliError::Usage("frames must be at least 2 to form differences".into()));
        }
        if self.features.modules.is_empty() {
            return Err(CliError::Usage("at least one feature module is required".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(CliError::Usage(format!("val_fraction must lie in (0, 1), got {}", self.val_fraction)));
        }
        self.features.wavelet.validate()?;
        Ok(())
    }

    pub fn schedule(&self) -> CliResult<NoiseSchedule> {
        Ok(make_schedule(self.inversion_steps, self.schedule)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let c = PipelineConfig::default();
        let back: PipelineConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"inversion_steps": 5, "strategy": "topk:80"}"#).unwrap();
        assert_eq!(c.inversion_steps, 5);
        assert_eq!(c.strategy, Strategy::TopK(80));
        assert_eq!(c.frames, 8);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"strategy": "nope"}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"framez": 3}"#).is_err());
    }
}
