//! JSON Lines video manifests.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Generated,
}

impl Label {
    /// 1 for generated (the positive class), 0 for real.
    pub fn as_target(self) -> u8 {
        match self {
            Label::Real => 0,
            Label::Generated => 1,
        }
    }

    pub fn from_target(y: u8) -> Self {
        if y == 0 {
            Label::Real
        } else {
            Label::Generated
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Real => "real",
            Label::Generated => "generated",
        })
    }
}

/// What the tensor behind a manifest entry holds.
///
/// Absent in the four-field exchange format, in which case `latents` is assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// `F x H x W x C` pixel frames in `[0, 1]`.
    Frames,
    /// `8 x C x h x w` encoded latents, inverted before differencing.
    #[default]
    Latents,
    /// `8 x C x h x w` initial-noise sequence; inversion is skipped.
    Noise,
    /// `7 x C x h x w` precomputed difference sequence.
    Inds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoManifestEntry {
    pub id: String,
    pub tensor_path: PathBuf,
    pub label: Label,
    pub source: String,
    #[serde(default, skip_serializing_if = "is_default_kind")]
    pub kind: InputKind,
}

fn is_default_kind(k: &InputKind) -> bool {
    *k == InputKind::Latents
}

impl VideoManifestEntry {
    /// Tensor path resolved against the manifest's directory.
    pub fn resolve(&self, base: &Path) -> PathBuf {
        if self.tensor_path.is_absolute() {
            self.tensor_path.clone()
        } else {
            base.join(&self.tensor_path)
        }
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<VideoManifestEntry>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(file), path)
}

/// Parse JSON Lines, skipping blank lines. Errors carry the 1-based line number.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(reader: impl BufRead, path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            reason: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(items: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn write_manifest(entries: &[VideoManifestEntry], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(entries, path)
}
