//! Feature extraction over the INDS.
//!
//! Every extractor is a pure function of the INDS and emits names prefixed with
//! its module tag (`energy.`, `spectrum.`, `texture.` and so on). Spectral,
//! wavelet and texture maps are channel-averaged before their 2D transforms.

pub mod spacetime;
pub mod spectrum;
pub mod statistical;
pub mod stats;
pub mod texture;
pub mod wavelet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::registry::{impute_invalid, FeatureVector, ImputePolicy};
use crate::tensor::Inds;

pub use stats::{summary_stats, SummaryStats};
pub use wavelet::{Basis, WaveletConfig};

/// Extractor groups that can be switched on and off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureModule {
    Energy,
    Gradient,
    Correlation,
    Channel,
    Spectrum,
    Wavelet,
    Statistical,
    Texture,
}

impl FeatureModule {
    pub const ALL: [FeatureModule; 8] = [
        FeatureModule::Energy,
        FeatureModule::Gradient,
        FeatureModule::Correlation,
        FeatureModule::Channel,
        FeatureModule::Spectrum,
        FeatureModule::Wavelet,
        FeatureModule::Statistical,
        FeatureModule::Texture,
    ];

    pub fn extract(self, inds: &Inds, cfg: &FeatureConfig) -> Result<FeatureVector> {
        Ok(match self {
            FeatureModule::Energy => spacetime::energy_features(inds),
            FeatureModule::Gradient => spacetime::gradient_features(inds),
            FeatureModule::Correlation => spacetime::correlation_features(inds),
            FeatureModule::Channel => spacetime::channel_interaction_features(inds),
            FeatureModule::Spectrum => spectrum::spectrum_features(inds),
            FeatureModule::Wavelet => wavelet::wavelet_features(inds, &cfg.wavelet)?,
            FeatureModule::Statistical => statistical::statistical_features(inds),
            FeatureModule::Texture => texture::texture_features(inds),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub modules: Vec<FeatureModule>,
    pub wavelet: WaveletConfig,
    pub impute: ImputePolicy,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            modules: FeatureModule::ALL.to_vec(),
            wavelet: WaveletConfig::default(),
            impute: ImputePolicy::Median,
        }
    }
}

/// Run the configured extractors and impute any non-finite values.
pub fn extract_features(inds: &Inds, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let mut fv = FeatureVector::new();
    for m in &cfg.modules {
        fv.append(m.extract(inds, cfg)?);
    }
    fv.check_unique()?;
    Ok(impute_invalid(fv, cfg.impute))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::LatentTensor;

    #[test]
    fn layout_is_fixed_and_finite() {
        let mk = |k: f64| {
            Inds::new(
                (0..7)
                    .map(|t| LatentTensor::from_fn(&[4, 8, 8], |i| ((i as f64 + k) * (t as f64 + 1.3)).sin()))
                    .collect(),
            )
            .unwrap()
        };
        let cfg = FeatureConfig::default();
        let a = extract_features(&mk(0.0), &cfg).unwrap();
        let b = extract_features(&mk(2.0), &cfg).unwrap();
        let z = extract_features(&Inds::new(vec![LatentTensor::zeros(&[4, 8, 8]); 7]).unwrap(), &cfg).unwrap();
        assert_eq!(a.names(), b.names());
        assert_eq!(a.names(), z.names());
        assert!(a.values().iter().chain(z.values()).all(|v| v.is_finite()));
    }
}
