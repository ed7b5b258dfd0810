//! Cost-sensitive search: TPE over boosting hyperparameters, each trial scored
//! by the gated objective at a validation threshold chosen from the ROC.

use serde::{Deserialize, Serialize};

use super::gbdt::{predict_proba, train_gbdt, GbdtModel, GbdtParams};
use super::roc::{class_weights, objective, roc_curve, select_threshold};
use super::tpe::{best_index, tpe_optimize, Dimension, SearchSpace, TpeConfig};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    /// Required generated detection rate on validation.
    pub tau: f64,
    /// Extra weight on the generated class.
    pub m: f64,
    pub trials: usize,
    pub seed: u64,
    pub tpe: TpeConfig,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            tau: 0.8,
            m: 1.008,
            trials: 60,
            seed: 0,
            tpe: TpeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub params: GbdtParams,
    pub threshold: f64,
    pub objective: f64,
    pub accuracy: f64,
    pub gdr: f64,
    pub real_rate: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimOutcome {
    pub best: TrialResult,
    pub trials: Vec<TrialResult>,
    pub model: GbdtModel,
}

pub const PARAM_NAMES: [&str; 7] = [
    "learning_rate",
    "num_trees",
    "max_leaves",
    "min_samples_leaf",
    "feature_fraction",
    "bagging_fraction",
    "l2_reg",
];

pub fn gbdt_space() -> SearchSpace {
    let n = |i: usize| PARAM_NAMES[i].to_string();
    SearchSpace {
        dims: vec![
            Dimension::Log { name: n(0), lo: 0.01, hi: 0.3 },
            Dimension::Int { name: n(1), lo: 50, hi: 400 },
            Dimension::Int { name: n(2), lo: 7, hi: 63 },
            Dimension::Int { name: n(3), lo: 5, hi: 50 },
            Dimension::Uniform { name: n(4), lo: 0.5, hi: 1.0 },
            Dimension::Uniform { name: n(5), lo: 0.5, hi: 1.0 },
            Dimension::Log { name: n(6), lo: 1e-3, hi: 10.0 },
        ],
    }
}

impl GbdtParams {
    /// Decode a point of [`gbdt_space`].
    pub fn from_point(p: &[f64]) -> Result<Self> {
        if p.len() != PARAM_NAMES.len() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", PARAM_NAMES.len(), p.len())));
        }
        Ok(Self {
            learning_rate: p[0],
            num_trees: p[1] as usize,
            max_leaves: p[2] as usize,
            min_samples_leaf: p[3] as usize,
            feature_fraction: p[4],
            bagging_fraction: p[5],
            l2_reg: p[6],
        })
    }
}

/// Accuracy, generated detection rate and real retention at `threshold`.
pub fn rates(probs: &[f64], y: &[bool], threshold: f64) -> (f64, f64, f64) {
    let (mut tp, mut tn, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &g) in probs.iter().zip(y) {
        let flag = p >= threshold;
        if g {
            pos += 1;
            tp += flag as usize;
        } else {
            neg += 1;
            tn += !flag as usize;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(tp + tn, pos + neg), ratio(tp, pos), ratio(tn, neg))
}

/// Train one candidate and score it on validation.
pub fn evaluate_trial(
    train: &FeatureMatrix,
    weights: &[f64],
    y_train: &[bool],
    val: &FeatureMatrix,
    y_val: &[bool],
    params: &GbdtParams,
    tau: f64,
    seed: u64,
) -> Result<(GbdtModel, f64, (f64, f64, f64))> {
    let model = train_gbdt(train, y_train, weights, params, seed)?;
    let probs = predict_proba(&model, val)?;
    let roc = roc_curve(&probs, y_val)?;
    let threshold = select_threshold(&roc, tau);
    Ok((model, threshold, rates(&probs, y_val, threshold)))
}

/// Search hyperparameters and return the best trial with its trained model.
pub fn optimize_classifier(
    train: &FeatureMatrix,
    y_train: &[bool],
    val: &FeatureMatrix,
    y_val: &[bool],
    cfg: &OptimConfig,
) -> Result<OptimOutcome> {
    if train.names() != val.names() {
        return Err(Error::Shape("train and validation matrices have different features".into()));
    }
    if !(0.0..=1.0).contains(&cfg.tau) {
        return Err(Error::InvalidArgument(format!("tau must lie in [0, 1], got {}", cfg.tau)));
    }
    let weights = class_weights(y_train, cfg.m)?;
    roc_curve(&vec![0.0; y_val.len()], y_val)?;

    let space = gbdt_space();
    let mut trials: Vec<TrialResult> = Vec::with_capacity(cfg.trials);
    let mut models: Vec<Option<GbdtModel>> = Vec::with_capacity(cfg.trials);
    let history = tpe_optimize(&space, cfg.trials, &cfg.tpe, cfg.seed, |t, point| {
        let params = GbdtParams::from_point(point).map_err(|e| e.to_string())?;
        let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(t as u64);
        match evaluate_trial(train, &weights, y_train, val, y_val, &params, cfg.tau, seed) {
            Ok((model, threshold, (accuracy, gdr, real_rate))) => {
                let j = objective(accuracy, gdr, cfg.tau);
                trials.push(TrialResult {
                    trial: t,
                    params,
                    threshold,
                    objective: j,
                    accuracy,
                    gdr,
                    real_rate,
                    error: None,
                });
                models.push(Some(model));
                Ok(j)
            }
            Err(e) => {
                trials.push(TrialResult {
                    trial: t,
                    params,
                    threshold: f64::NAN,
                    objective: 0.0,
                    accuracy: 0.0,
                    gdr: 0.0,
                    real_rate: 0.0,
                    error: Some(e.to_string()),
                });
                models.push(None);
                Err(e.to_string())
            }
        }
    })?;
    let b = best_index(&history).expect("at least one trial");
    // Ties on J keep the earliest trial that produced a model.
    let b = if models[b].is_some() {
        b
    } else {
        models
            .iter()
            .position(Option::is_some)
            .ok_or_else(|| Error::InvalidArgument(format!("every trial failed: {}", trials[b].error.clone().unwrap_or_default())))?
    };
    Ok(OptimOutcome {
        best: trials[b].clone(),
        model: models.swap_remove(b).expect("checked above"),
        trials,
    })
}
