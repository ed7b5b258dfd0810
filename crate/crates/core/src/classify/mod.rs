//! Boosted-tree classifier, ROC thresholding and hyperparameter search.

pub mod eval;
pub mod gbdt;
pub mod optimize;
pub mod roc;
pub mod tpe;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use eval::{evaluate, EvalReport, SourceStats};
pub use gbdt::{predict_proba, train_gbdt, GbdtModel, GbdtParams};
pub use optimize::{gbdt_space, optimize_classifier, rates, OptimConfig, OptimOutcome, TrialResult};
pub use roc::{auc, class_weights, objective, roc_curve, select_threshold, Roc};
pub use tpe::{best_index, random_search, tpe_optimize, Dimension, Observation, SearchSpace, TpeConfig};

/// Stratified split of sample indices into (first, second), with
/// `round(fraction * n_c)` of each class in the first part.
pub fn stratified_split(y: &[bool], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::SingleClass);
        }
        idx.shuffle(&mut rng);
        let k = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        first.extend_from_slice(&idx[..k]);
        second.extend_from_slice(&idx[k..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_stratified_and_disjoint() {
        let y: Vec<bool> = (0..50).map(|i| i < 20).collect();
        let (a, b) = stratified_split(&y, 0.8, 3).unwrap();
        assert_eq!(a.iter().filter(|&&i| y[i]).count(), 16);
        assert_eq!(a.len() + b.len(), 50);
        assert!(a.iter().all(|i| !b.contains(i)));
        assert_eq!(stratified_split(&y, 0.8, 3).unwrap(), (a, b));
    }
}
