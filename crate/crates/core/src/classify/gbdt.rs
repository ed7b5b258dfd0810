//! Histogram gradient-boosted trees under weighted logistic loss.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const MAX_BINS: usize = 64;
pub const MODEL_FORMAT: &str = "dbinds-gbdt";
pub const MODEL_VERSION: u32 = 1;
const MIN_HESSIAN: f64 = 1e-12;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub learning_rate: f64,
    pub num_trees: usize,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    pub feature_fraction: f64,
    pub bagging_fraction: f64,
    pub l2_reg: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            num_trees: 100,
            max_leaves: 15,
            min_samples_leaf: 5,
            feature_fraction: 1.0,
            bagging_fraction: 1.0,
            l2_reg: 1.0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.learning_rate) || !unit(self.feature_fraction) || !unit(self.bagging_fraction) {
            return Err(Error::InvalidArgument(
                "learning_rate, feature_fraction and bagging_fraction must lie in (0, 1]".into(),
            ));
        }
        if self.max_leaves < 2 || self.min_samples_leaf < 1 || !(self.l2_reg >= 0.0) {
            return Err(Error::InvalidArgument(
                "max_leaves >= 2, min_samples_leaf >= 1 and l2_reg >= 0 required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf { value: f64 },
}

impl TreeNode {
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub format: String,
    pub version: u32,
    pub n_features: usize,
    pub base_margin: f64,
    pub params: GbdtParams,
    /// Leaf values already include the learning rate.
    pub trees: Vec<TreeNode>,
}

impl GbdtModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_margin + self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features,
                row.len()
            )));
        }
        Ok(sigmoid(self.margin(row)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: GbdtModel = serde_json::from_str(s)?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model document {} v{}",
                m.format, m.version
            )));
        }
        Ok(m)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn predict_proba(model: &GbdtModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.cols() != model.n_features {
        return Err(Error::Shape(format!(
            "model expects {} features, got {}",
            model.n_features,
            x.cols()
        )));
    }
    Ok((0..x.rows()).map(|r| sigmoid(model.margin(x.row(r)))).collect())
}

/// Cut points over a column's distinct values; at most `MAX_BINS - 1` cuts.
pub fn cut_points(col: &[f64]) -> Vec<f64> {
    let mut v = col.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() <= 1 {
        return Vec::new();
    }
    let mids: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if mids.len() < MAX_BINS {
        return mids;
    }
    let k = MAX_BINS - 1;
    let mut cuts: Vec<f64> = (1..=k).map(|i| mids[(i * mids.len()) / (k + 1)]).collect();
    cuts.dedup();
    cuts
}

fn bin_of(cuts: &[f64], v: f64) -> u8 {
    cuts.partition_point(|&c| c < v) as u8
}

#[derive(Clone, Copy, Default)]
struct Bin {
    g: f64,
    h: f64,
    n: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    bin: usize,
}

struct Leaf {
    node: usize,
    idx: Vec<usize>,
    best: Option<Candidate>,
}

enum Arena {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

struct Trainer<'a> {
    bins: &'a [Vec<u8>],
    cuts: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbdtParams,
    features: Vec<usize>,
}

impl Trainer<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let (g, h) = idx.iter().fold((0.0, 0.0), |(g, h), &i| (g + self.grad[i], h + self.hess[i]));
        -g / (h + self.params.l2_reg).max(MIN_HESSIAN)
    }

    fn best_split(&self, idx: &[usize]) -> Option<Candidate> {
        let lambda = self.params.l2_reg;
        let min_leaf = self.params.min_samples_leaf;
        if idx.len() < 2 * min_leaf {
            return None;
        }
        let (gt, ht) = idx.iter().fold((0.0, 0.0), |(g, h), &i| (g + self.grad[i], h + self.hess[i]));
        let parent = gt * gt / (ht + lambda).max(MIN_HESSIAN);
        let mut best: Option<Candidate> = None;
        let mut hist = [Bin::default(); MAX_BINS];
        for &f in &self.features {
            let ncuts = self.cuts[f].len();
            if ncuts == 0 {
                continue;
            }
            hist[..=ncuts].fill(Bin::default());
            let col = &self.bins[f];
            for &i in idx {
                let b = &mut hist[col[i] as usize];
                b.g += self.grad[i];
                b.h += self.hess[i];
                b.n += 1;
            }
            let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
            for (b, bin) in hist[..ncuts].iter().enumerate() {
                gl += bin.g;
                hl += bin.h;
                nl += bin.n;
                let nr = idx.len() - nl;
                if nl < min_leaf {
                    continue;
                }
                if nr < min_leaf {
                    break;
                }
                let (gr, hr) = (gt - gl, ht - hl);
                if hl < MIN_HESSIAN || hr < MIN_HESSIAN {
                    continue;
                }
                let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                if gain > MIN_GAIN && best.is_none_or(|c| gain > c.gain) {
                    best = Some(Candidate { gain, feature: f, bin: b });
                }
            }
        }
        best
    }

    fn grow(&self, idx: Vec<usize>) -> TreeNode {
        let mut arena = vec![Arena::Leaf(0.0)];
        let best = self.best_split(&idx);
        let mut leaves = vec![Leaf { node: 0, idx, best }];
        while leaves.len() < self.params.max_leaves {
            let pick = leaves
                .iter()
                .enumerate()
                .filter_map(|(k, l)| l.best.map(|c| (k, c.gain)))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((k, _)) = pick else { break };
            let leaf = leaves.swap_remove(k);
            let c = leaf.best.expect("picked leaf has a split");
            let col = &self.bins[c.feature];
            let (l, r): (Vec<usize>, Vec<usize>) = leaf.idx.iter().partition(|&&i| (col[i] as usize) <= c.bin);
            let (ln, rn) = (arena.len(), arena.len() + 1);
            arena.push(Arena::Leaf(0.0));
            arena.push(Arena::Leaf(0.0));
            arena[leaf.node] = Arena::Split {
                feature: c.feature,
                threshold: self.cuts[c.feature][c.bin],
                left: ln,
                right: rn,
            };
            let lb = self.best_split(&l);
            let rb = self.best_split(&r);
            leaves.push(Leaf { node: ln, idx: l, best: lb });
            leaves.push(Leaf { node: rn, idx: r, best: rb });
        }
        for leaf in &leaves {
            arena[leaf.node] = Arena::Leaf(self.params.learning_rate * self.leaf_value(&leaf.idx));
        }
        nest(&arena, 0)
    }
}

fn nest(arena: &[Arena], k: usize) -> TreeNode {
    match arena[k] {
        Arena::Leaf(value) => TreeNode::Leaf { value },
        Arena::Split {
            feature,
            threshold,
            left,
            right,
        } => TreeNode::Split {
            feature,
            threshold,
            left: Box::new(nest(arena, left)),
            right: Box::new(nest(arena, right)),
        },
    }
}

/// Fit a boosted ensemble. Weights are rescaled to mean 1.
pub fn train_gbdt(x: &FeatureMatrix, y: &[bool], weights: &[f64], params: &GbdtParams, seed: u64) -> Result<GbdtModel> {
    params.validate()?;
    let (n, f) = (x.rows(), x.cols());
    if f == 0 {
        return Err(Error::EmptyFeatureSet);
    }
    if y.len() != n || weights.len() != n || n == 0 {
        return Err(Error::Shape(format!(
            "{n} rows, {} labels, {} weights",
            y.len(),
            weights.len()
        )));
    }
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("feature matrix contains non-finite values".into()));
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("sample weights must be positive and finite".into()));
    }
    let wmean = weights.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = weights.iter().map(|v| v / wmean).collect();
    let pos: f64 = w.iter().zip(y).filter(|p| *p.1).map(|p| p.0).sum();
    let prior = (pos / n as f64).clamp(1e-12, 1.0 - 1e-12);
    let base_margin = (prior / (1.0 - prior)).ln();

    let columns = x.columns();
    let cuts: Vec<Vec<f64>> = columns.iter().map(|c| cut_points(c)).collect();
    let bins: Vec<Vec<u8>> = columns
        .iter()
        .zip(&cuts)
        .map(|(c, k)| c.iter().map(|&v| bin_of(k, v)).collect())
        .collect();

    let mut margin = vec![base_margin; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.num_trees);
    let n_feat = ((f as f64 * params.feature_fraction).round() as usize).clamp(1, f);
    let n_bag = ((n as f64 * params.bagging_fraction).round() as usize).clamp(1, n);
    for round in 0..params.num_trees {
        for i in 0..n {
            let p = sigmoid(margin[i]);
            let t = if y[i] { 1.0 } else { 0.0 };
            grad[i] = w[i] * (p - t);
            hess[i] = w[i] * (p * (1.0 - p)).max(MIN_HESSIAN);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (round as u64).wrapping_mul(0xD134_2543_DE82_EF95));
        let mut features: Vec<usize> = if n_feat == f {
            (0..f).collect()
        } else {
            sample(&mut rng, f, n_feat).into_vec()
        };
        features.sort_unstable();
        let mut idx: Vec<usize> = if n_bag == n {
            (0..n).collect()
        } else {
            sample(&mut rng, n, n_bag).into_vec()
        };
        idx.sort_unstable();
        let trainer = Trainer {
            bins: &bins,
            cuts: &cuts,
            grad: &grad,
            hess: &hess,
            params,
            features,
        };
        let tree = trainer.grow(idx);
        for (r, m) in margin.iter_mut().enumerate() {
            *m += tree.eval(x.row(r));
        }
        trees.push(tree);
    }
    Ok(GbdtModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        n_features: f,
        base_margin,
        params: *params,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (FeatureMatrix, Vec<bool>) {
        let mut data = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let cls = i % 2 == 0;
            let a = if cls { 1.0 } else { -1.0 } + (i as f64 * 0.37).sin() * 0.4;
            data.extend([a, (i as f64 * 1.3).cos()]);
            y.push(cls);
        }
        (FeatureMatrix::new(vec!["f.a".into(), "f.b".into()], 20, data).unwrap(), y)
    }

    #[test]
    fn separable_toy_is_fit() {
        let (x, y) = toy();
        let params = GbdtParams { num_trees: 50, min_samples_leaf: 1, ..Default::default() };
        let m = train_gbdt(&x, &y, &[1.0; 20], &params, 0).unwrap();
        let p = predict_proba(&m, &x).unwrap();
        let correct = p.iter().zip(&y).filter(|(p, &t)| (**p >= 0.5) == t).count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn zero_trees_predict_weighted_prior() {
        let (x, y) = toy();
        let w: Vec<f64> = y.iter().map(|&t| if t { 3.0 } else { 1.0 }).collect();
        let params = GbdtParams { num_trees: 0, ..Default::default() };
        let m = train_gbdt(&x, &y, &w, &params, 0).unwrap();
        for p in predict_proba(&m, &x).unwrap() {
            assert!((p - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_and_shape_check() {
        let (x, y) = toy();
        let m = train_gbdt(&x, &y, &[1.0; 20], &GbdtParams { num_trees: 5, ..Default::default() }, 1).unwrap();
        let back = GbdtModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(m.predict_row(&[1.0]).is_err());
    }

    #[test]
    fn cut_points_ignore_duplicates() {
        assert_eq!(cut_points(&[1.0, 1.0, 2.0, 3.0, 3.0]), vec![1.5, 2.5]);
        let many: Vec<f64> = (0..500).map(f64::from).collect();
        assert_eq!(cut_points(&many).len(), MAX_BINS - 1);
    }
}
