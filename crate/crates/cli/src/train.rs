//! Model bundles: selection plus cost-sensitive search, persisted as JSON.

use std::collections::BTreeSet;

use dbinds_core::classify::{evaluate, optimize_classifier, predict_proba, stratified_split, EvalReport, GbdtModel, TrialResult};
use dbinds_core::select::{apply_crosses, run_selection, CrossConfig, CrossTerm, SelectionReport};
use dbinds_core::FeatureMatrix;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::FeatureSet;
use crate::error::{CliError, CliResult};

pub const BUNDLE_FORMAT: &str = "dbinds-bundle";
pub const BUNDLE_VERSION: u32 = 1;

/// How model inputs are derived from an extracted feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDesign {
    /// Cross terms referenced by `selected`.
    pub crosses: Vec<CrossTerm>,
    pub cross_config: CrossConfig,
    /// Model inputs in column order.
    pub selected: Vec<String>,
}

impl FeatureDesign {
    /// Model inputs for `m`, computing any cross terms from their operands.
    pub fn design_matrix(&self, m: &FeatureMatrix) -> CliResult<FeatureMatrix> {
        let cross_names: BTreeSet<String> = self.crosses.iter().map(|c| c.name()).collect();
        let mut needed: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        let operands = self.crosses.iter().flat_map(|c| [c.left.clone(), c.right.clone()]);
        for n in self.selected.iter().filter(|n| !cross_names.contains(*n)).cloned().chain(operands) {
            if seen.insert(n.clone()) {
                needed.push(n);
            }
        }
        let missing: Vec<&str> = needed.iter().filter(|n| m.index_of(n).is_none()).map(|s| s.as_str()).collect();
        if !missing.is_empty() {
            return Err(CliError::Data(format!(
                "feature matrix lacks {} bundle features: {}",
                missing.len(),
                missing.join(", ")
            )));
        }
        let base = m.select_names(&needed)?;
        let full = apply_crosses(&base, &self.crosses, &self.cross_config)?;
        Ok(full.select_names(&self.selected)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub format: String,
    pub version: u32,
    /// Effective configuration, seeds included.
    pub config: PipelineConfig,
    pub design: FeatureDesign,
    pub threshold: f64,
    pub best: TrialResult,
    pub model: GbdtModel,
    pub selection: SelectionReport,
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub bundle: Bundle,
    pub trials: Vec<TrialResult>,
    pub validation: EvalReport,
}

impl Bundle {
    pub fn check(&self) -> CliResult<()> {
        if self.format != BUNDLE_FORMAT || self.version != BUNDLE_VERSION {
            return Err(CliError::Data(format!("unsupported bundle {} v{}", self.format, self.version)));
        }
        if self.model.n_features != self.design.selected.len() {
            return Err(CliError::Data("bundle model and feature list disagree".into()));
        }
        Ok(())
    }

    pub fn predict(&self, m: &FeatureMatrix) -> CliResult<Vec<f64>> {
        Ok(predict_proba(&self.model, &self.design.design_matrix(m)?)?)
    }

    pub fn evaluate(&self, set: &FeatureSet) -> CliResult<EvalReport> {
        self.check()?;
        let probs = self.predict(&set.matrix)?;
        Ok(evaluate(&probs, self.threshold, &set.labels(), &set.sources())?)
    }
}

/// Split, select, search and package the winning model.
pub fn train(set: &FeatureSet, cfg: &PipelineConfig) -> CliResult<TrainOutcome> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.selection.forest.seed = cfg.seed;
    cfg.optim.seed = cfg.seed;

    let y = set.labels();
    let (tr_idx, va_idx) = stratified_split(&y, 1.0 - cfg.val_fraction, cfg.seed)?;
    let (tr, va) = (set.subset(&tr_idx), set.subset(&va_idx));
    let (ytr, yva) = (tr.labels(), va.labels());
    let selection = run_selection(&tr.matrix, &ytr, &va.matrix, &yva, &cfg.strategy, &cfg.selection)?;
    let chosen: BTreeSet<&String> = selection.selected.iter().collect();
    let design = FeatureDesign {
        crosses: selection.crosses.iter().filter(|c| chosen.contains(&c.name())).cloned().collect(),
        cross_config: cfg.selection.cross,
        selected: selection.selected.clone(),
    };
    let xtr = design.design_matrix(&tr.matrix)?;
    let xva = design.design_matrix(&va.matrix)?;
    let outcome = optimize_classifier(&xtr, &ytr, &xva, &yva, &cfg.optim)?;
    let bundle = Bundle {
        format: BUNDLE_FORMAT.into(),
        version: BUNDLE_VERSION,
        config: cfg,
        design,
        threshold: outcome.best.threshold,
        best: outcome.best,
        model: outcome.model,
        selection,
        train_ids: tr.samples.iter().map(|s| s.id.clone()).collect(),
        val_ids: va.samples.iter().map(|s| s.id.clone()).collect(),
    };
    let validation = bundle.evaluate(&va)?;
    Ok(TrainOutcome {
        bundle,
        trials: outcome.trials,
        validation,
    })
}
