//! Staged feature selection: variance filter, forest importance, cross
//! enhancement, combined train/validation scoring and strategy assembly.

pub mod cross;
pub mod forest;
pub mod score;
pub mod strategy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::stats::variance;
use crate::matrix::FeatureMatrix;

pub use cross::{apply_crosses, cross_enhance, plan_crosses, CrossConfig, CrossTerm};
pub use forest::{forest_importance, ForestConfig, ForestImportance};
pub use score::{combined_score, FeatureScore};
pub use strategy::{assemble_combination, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub sigma_min: f64,
    pub cross: CrossConfig,
    pub forest: ForestConfig,
    /// Skip cross enhancement entirely.
    pub no_cross: bool,
    /// Drop selected features whose combined score falls below this.
    pub min_score: Option<f64>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            sigma_min: 1e-10,
            cross: CrossConfig::default(),
            forest: ForestConfig::default(),
            no_cross: false,
            min_score: None,
        }
    }
}

/// Columns whose population variance exceeds `sigma_min`.
pub fn variance_filter(columns: &[Vec<f64>], sigma_min: f64) -> Vec<usize> {
    (0..columns.len())
        .filter(|&j| variance(&columns[j]) > sigma_min)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredFeature {
    pub name: String,
    pub importance: f64,
    pub score: FeatureScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub strategy: Strategy,
    pub input_features: usize,
    pub retained_after_variance: usize,
    /// Importance before cross enhancement, aligned with the retained names.
    pub base_importance: Vec<(String, f64)>,
    pub crosses: Vec<CrossTerm>,
    /// Every candidate after enhancement and re-filtering.
    pub candidates: Vec<ScoredFeature>,
    pub selected: Vec<String>,
    pub forest_single_class: bool,
}

/// Run every stage on a train/validation split and return the chosen features.
pub fn run_selection(
    train: &FeatureMatrix,
    y_train: &[bool],
    val: &FeatureMatrix,
    y_val: &[bool],
    strategy: &Strategy,
    cfg: &SelectionConfig,
) -> Result<SelectionReport> {
    if train.names() != val.names() {
        return Err(Error::Shape("train and validation matrices have different features".into()));
    }
    if train.rows() < 2 {
        return Err(Error::InvalidArgument("selection needs at least 2 training samples".into()));
    }
    let kept = variance_filter(&train.columns(), cfg.sigma_min);
    if kept.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let train_f = train.select_columns(&kept);
    let val_f = val.select_columns(&kept);
    let base = forest_importance(&train_f.columns(), y_train, &cfg.forest);

    let (train_x, val_x, crosses) = if cfg.no_cross || train_f.cols() < 2 {
        (train_f.clone(), val_f.clone(), Vec::new())
    } else {
        let cross_cfg = CrossConfig {
            top_n: cfg.cross.top_n.min(train_f.cols()),
            ..cfg.cross
        };
        let terms = plan_crosses(train_f.names(), &base.importances, &cross_cfg)?;
        let tx = apply_crosses(&train_f, &terms, &cross_cfg)?;
        let vx = apply_crosses(&val_f, &terms, &cross_cfg)?;
        let keep = variance_filter(&tx.columns(), cfg.sigma_min);
        (tx.select_columns(&keep), vx.select_columns(&keep), terms)
    };

    let train_cols = train_x.columns();
    let importance = if crosses.is_empty() {
        base.importances.clone()
    } else {
        forest_importance(&train_cols, y_train, &cfg.forest).importances
    };
    let scores = combined_score(&train_cols, y_train, &val_x.columns(), y_val)?;
    let names = train_x.names();
    let mut selected = assemble_combination(strategy, names, &importance)?;
    if let Some(min) = cfg.min_score {
        selected.retain(|n| {
            let i = train_x.index_of(n).expect("selected from this matrix");
            scores[i].s_combined >= min
        });
        if selected.is_empty() {
            return Err(Error::EmptySelection(format!("no selected feature scores at least {min}")));
        }
    }
    Ok(SelectionReport {
        strategy: strategy.clone(),
        input_features: train.cols(),
        retained_after_variance: kept.len(),
        base_importance: train_f
            .names()
            .iter()
            .cloned()
            .zip(base.importances.iter().copied())
            .collect(),
        crosses,
        candidates: names
            .iter()
            .zip(importance.iter().zip(&scores))
            .map(|(n, (&importance, &score))| ScoredFeature {
                name: n.clone(),
                importance,
                score,
            })
            .collect(),
        selected,
        forest_single_class: base.single_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_removed() {
        let cols = vec![vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]];
        assert_eq!(variance_filter(&cols, 1e-10), vec![1]);
        assert_eq!(variance_filter(&cols, -1.0), vec![0, 1]);
        assert!(variance_filter(&[vec![2.0; 3]], 1e-10).is_empty());
    }

    #[test]
    fn end_to_end_selection() {
        let n = 40;
        let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let names: Vec<String> = ["energy.a", "energy.b", "texture.c", "texture.flat"].iter().map(|s| s.to_string()).collect();
        let mut data = Vec::new();
        for (i, &yi) in y.iter().enumerate() {
            let s = if yi { 1.0 } else { -1.0 };
            data.extend([s + ((i * 7) % 5) as f64 * 0.1, ((i * 3) % 7) as f64, ((i * 11) % 13) as f64 * 0.5, 4.0]);
        }
        let m = FeatureMatrix::new(names, n, data).unwrap();
        let cfg = SelectionConfig {
            cross: CrossConfig { top_n: 3, ..Default::default() },
            forest: ForestConfig { n_trees: 20, ..Default::default() },
            ..Default::default()
        };
        let r = run_selection(&m, &y, &m, &y, &"topk:2".parse().unwrap(), &cfg).unwrap();
        assert_eq!(r.retained_after_variance, 3);
        assert_eq!(r.crosses.len(), 9);
        assert_eq!(r.selected.len(), 2);
        assert!(r.candidates.iter().all(|c| c.name != "texture.flat"));
    }
}
