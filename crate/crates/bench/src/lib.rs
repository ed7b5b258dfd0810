//! Seeded inputs shared by the benchmarks.

use dbinds_core::{FeatureMatrix, Inds, LatentTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn latent(dims: &[usize], seed: u64) -> LatentTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatentTensor::from_fn(dims, |_| rng.random_range(-1.0..1.0))
}

/// Seven difference frames of shape `c x s x s`.
pub fn inds(c: usize, s: usize, seed: u64) -> Inds {
    Inds::new((0..7).map(|t| latent(&[c, s, s], seed + t)).collect()).expect("consistent frames")
}

/// Two-class matrix whose first `informative` columns shift with the label.
pub fn labelled_matrix(rows: usize, cols: usize, informative: usize, seed: u64) -> (FeatureMatrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<bool> = (0..rows).map(|i| i % 2 == 0).collect();
    let mut data = Vec::with_capacity(rows * cols);
    for &yi in &y {
        for j in 0..cols {
            let shift = if yi && j < informative { 0.7 } else { 0.0 };
            data.push(shift + rng.random_range(-1.0..1.0));
        }
    }
    let names = (0..cols).map(|j| format!("bench.f{j}")).collect();
    (FeatureMatrix::new(names, rows, data).expect("sized buffer"), y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_seeded() {
        assert_eq!(latent(&[2, 3], 1), latent(&[2, 3], 1));
        assert_ne!(latent(&[2, 3], 1), latent(&[2, 3], 2));
        let (m, y) = labelled_matrix(10, 4, 1, 0);
        assert_eq!((m.rows(), m.cols(), y.len()), (10, 4, 10));
        assert_eq!(inds(4, 8, 0).len(), 7);
    }
}
