//! Latent-space detection of generated video from reconstructed initial noise.
//!
//! Frames are inverted to their initial diffusion noise with a bidirectional
//! multistep scheme, consecutive noise frames are differenced into an INDS, and
//! multi-domain features of the INDS feed staged selection and a cost-sensitive
//! boosted-tree classifier.

pub mod belm;
pub mod classify;
pub mod encoder;
pub mod error;
pub mod features;
pub mod frames;
pub mod ltns;
pub mod manifest;
pub mod matrix;
pub mod predictor;
pub mod protocol;
pub mod registry;
pub mod schedule;
pub mod select;
pub mod tensor;

pub use error::{Error, Result};
pub use features::{extract_features, FeatureConfig, FeatureModule};
pub use matrix::FeatureMatrix;
pub use manifest::{InputKind, Label, VideoManifestEntry};
pub use predictor::{NoisePredictor, PredictorSpec};
pub use registry::FeatureVector;
pub use schedule::NoiseSchedule;
pub use tensor::{build_inds, Inds, LatentTensor, NoiseSequence};
