//! Gini importance from a bagged forest of depth-limited classification trees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 8,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestImportance {
    /// Non-negative, summing to 1 unless `single_class`.
    pub importances: Vec<f64>,
    /// Labels were pure; importances are all zero.
    pub single_class: bool,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    y: &'a [bool],
    cfg: &'a ForestConfig,
    mtry: usize,
    total: f64,
    importance: Vec<f64>,
    rng: ChaCha8Rng,
    order: Vec<usize>,
}

impl Grower<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        if depth >= self.cfg.max_depth || n < self.cfg.min_samples_split.max(2) || pos == 0 || pos == n {
            return;
        }
        let nf = n as f64;
        let parent = gini(pos as f64, nf);
        let f = self.columns.len();
        let mut best: Option<(f64, usize, f64)> = None;
        for feat in sample(&mut self.rng, f, self.mtry.min(f)).into_iter() {
            let col = &self.columns[feat];
            self.order.clear();
            self.order.extend_from_slice(idx);
            self.order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut left_pos = 0usize;
            for k in 0..n - 1 {
                if self.y[self.order[k]] {
                    left_pos += 1;
                }
                let (v, next) = (col[self.order[k]], col[self.order[k + 1]]);
                if v == next {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = nf - nl;
                let child = (nl * gini(left_pos as f64, nl) + nr * gini((pos - left_pos) as f64, nr)) / nf;
                let gain = parent - child;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feat, 0.5 * (v + next)));
                }
            }
        }
        let Some((gain, feat, thr)) = best else {
            return;
        };
        if gain <= 0.0 {
            return;
        }
        self.importance[feat] += nf / self.total * gain;
        let col = &self.columns[feat];
        let mut split = 0;
        for k in 0..n {
            if col[idx[k]] <= thr {
                idx.swap(k, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        self.grow(l, depth + 1);
        self.grow(r, depth + 1);
    }
}

/// Mean decrease in impurity over `cfg.n_trees` bootstrap trees, `ceil(sqrt(F))`
/// candidate features per split. `columns[f][i]` is feature `f` of sample `i`.
pub fn forest_importance(columns: &[Vec<f64>], y: &[bool], cfg: &ForestConfig) -> ForestImportance {
    let f = columns.len();
    let n = y.len();
    let pos = y.iter().filter(|&&b| b).count();
    if f == 0 || pos == 0 || pos == n {
        return ForestImportance {
            importances: vec![0.0; f],
            single_class: pos == 0 || pos == n,
        };
    }
    let mtry = (f as f64).sqrt().ceil() as usize;
    let mut total = vec![0.0; f];
    for tree in 0..cfg.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add((tree as u64).wrapping_mul(0x9E37_79B9)));
        let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut g = Grower {
            columns,
            y,
            cfg,
            mtry,
            total: n as f64,
            importance: vec![0.0; f],
            rng,
            order: Vec::with_capacity(n),
        };
        g.grow(&mut idx, 0);
        for (t, v) in total.iter_mut().zip(&g.importance) {
            *t += v;
        }
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        total.iter_mut().for_each(|v| *v /= sum);
    }
    ForestImportance {
        importances: total,
        single_class: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let sep: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 } + rng.random_range(-0.4..0.4)).collect();
        let mut cols = vec![sep];
        for _ in 0..5 {
            cols.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        (cols, y)
    }

    #[test]
    fn separating_feature_dominates() {
        let (cols, y) = data(60);
        let imp = forest_importance(&cols, &y, &ForestConfig { n_trees: 50, ..Default::default() });
        let argmax = imp
            .importances
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, 0);
        assert!((imp.importances.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(imp.importances.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn pure_labels_give_zero() {
        let (cols, _) = data(20);
        let imp = forest_importance(&cols, &[true; 20], &ForestConfig::default());
        assert!(imp.single_class);
        assert!(imp.importances.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (cols, y) = data(40);
        let cfg = ForestConfig { n_trees: 20, seed: 9, ..Default::default() };
        assert_eq!(forest_importance(&cols, &y, &cfg), forest_importance(&cols, &y, &cfg));
    }
}
