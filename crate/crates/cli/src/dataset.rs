//! On-disk feature sets: an LTNS matrix, the name registry and per-row metadata.

use std::path::Path;

use dbinds_core::ltns::{read_tensor, write_tensor};
use dbinds_core::manifest::{read_jsonl, write_jsonl, Label};
use dbinds_core::registry::{registry_for, RegistryEntry};
use dbinds_core::{Error, FeatureMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MATRIX_FILE: &str = "features.ltns";
pub const REGISTRY_FILE: &str = "registry.jsonl";
pub const SAMPLES_FILE: &str = "samples.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub id: String,
    pub label: Label,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub matrix: FeatureMatrix,
    pub samples: Vec<SampleMeta>,
}

impl FeatureSet {
    pub fn new(matrix: FeatureMatrix, samples: Vec<SampleMeta>) -> CliResult<Self> {
        if matrix.rows() != samples.len() {
            return Err(CliError::Data(format!(
                "{} feature rows for {} samples",
                matrix.rows(),
                samples.len()
            )));
        }
        Ok(Self { matrix, samples })
    }

    pub fn labels(&self) -> Vec<bool> {
        self.samples.iter().map(|s| s.label == Label::Generated).collect()
    }

    pub fn sources(&self) -> Vec<String> {
        self.samples.iter().map(|s| s.source.clone()).collect()
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            matrix: self.matrix.select_rows(rows),
            samples: rows.iter().map(|&r| self.samples[r].clone()).collect(),
        }
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> CliResult<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_tensor(&self.matrix.to_tensor(), dir.join(MATRIX_FILE))?;
        write_jsonl(&registry_for(self.matrix.names()), dir.join(REGISTRY_FILE))?;
        write_jsonl(&self.samples, dir.join(SAMPLES_FILE))?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> CliResult<Self> {
        let dir = dir.as_ref();
        let reg: Vec<RegistryEntry> = read_jsonl_file(&dir.join(REGISTRY_FILE))?;
        for (i, e) in reg.iter().enumerate() {
            if e.index != i {
                return Err(CliError::Data(format!("registry entry {i} carries index {}", e.index)));
            }
        }
        let names = reg.into_iter().map(|e| e.name).collect();
        let matrix = FeatureMatrix::from_tensor(&read_tensor(dir.join(MATRIX_FILE))?, names)?;
        let samples = read_jsonl_file(&dir.join(SAMPLES_FILE))?;
        Self::new(matrix, samples)
    }
}

fn read_jsonl_file<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(read_jsonl(std::io::BufReader::new(file), path)?)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> CliResult<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> CliResult<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let m = FeatureMatrix::new(vec!["energy.a".into(), "texture.b".into()], 2, vec![1.0, 2.5, -3.0, 0.125]).unwrap();
        let samples = vec![
            SampleMeta { id: "v0".into(), label: Label::Real, source: "cam".into() },
            SampleMeta { id: "v1".into(), label: Label::Generated, source: "gen".into() },
        ];
        let set = FeatureSet::new(m, samples).unwrap();
        set.save(dir.path()).unwrap();
        assert_eq!(FeatureSet::load(dir.path()).unwrap(), set);
        assert_eq!(set.labels(), vec![false, true]);
    }
}
