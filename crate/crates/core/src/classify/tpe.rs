//! Tree-structured Parzen estimator over independent bounded dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "lowercase")]
pub enum Dimension {
    Uniform { name: String, lo: f64, hi: f64 },
    Log { name: String, lo: f64, hi: f64 },
    Int { name: String, lo: i64, hi: i64 },
}

impl Dimension {
    pub fn name(&self) -> &str {
        match self {
            Dimension::Uniform { name, .. } | Dimension::Log { name, .. } | Dimension::Int { name, .. } => name,
        }
    }

    /// Bounds in the internal (search) coordinate.
    fn internal_bounds(&self) -> (f64, f64) {
        match *self {
            Dimension::Uniform { lo, hi, .. } => (lo, hi),
            Dimension::Log { lo, hi, .. } => (lo.ln(), hi.ln()),
            Dimension::Int { lo, hi, .. } => (lo as f64 - 0.5, hi as f64 + 0.5),
        }
    }

    fn to_internal(&self, v: f64) -> f64 {
        match self {
            Dimension::Log { .. } => v.ln(),
            _ => v,
        }
    }

    fn from_internal(&self, u: f64) -> f64 {
        match *self {
            Dimension::Uniform { lo, hi, .. } => u.clamp(lo, hi),
            Dimension::Log { lo, hi, .. } => u.exp().clamp(lo, hi),
            Dimension::Int { lo, hi, .. } => u.round().clamp(lo as f64, hi as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dimension::Uniform { lo, hi, .. } => lo < hi,
            Dimension::Log { lo, hi, .. } => lo > 0.0 && lo < hi,
            Dimension::Int { lo, hi, .. } => lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad bounds for dimension {}", self.name())))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<Dimension>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TpeConfig {
    pub gamma: f64,
    pub n_candidates: usize,
    pub n_startup: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            n_candidates: 24,
            n_startup: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub point: Vec<f64>,
    pub value: f64,
    pub error: Option<String>,
}

/// Index of the first maximal observation.
pub fn best_index(history: &[Observation]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, o) in history.iter().enumerate() {
        if best.is_none_or(|b| o.value > history[b].value) {
            best = Some(i);
        }
    }
    best
}

/// One-dimensional Parzen mixture with a uniform prior component.
struct Parzen {
    mus: Vec<f64>,
    sigma: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Parzen {
    fn fit(points: &[f64], lo: f64, hi: f64) -> Self {
        let range = hi - lo;
        let n = points.len() as f64;
        let m = points.iter().sum::<f64>() / n.max(1.0);
        let sd = (points.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / n.max(1.0)).sqrt();
        // Scott's rule, floored at range / min(100, n + 1) so small good sets still explore.
        let floor = range / (n + 1.0).min(100.0);
        let bw = (1.06 * sd * n.powf(-0.2)).clamp(floor, range);
        Self {
            mus: points.to_vec(),
            sigma: vec![bw; points.len()],
            lo,
            hi,
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let k = (self.mus.len() + 1) as f64;
        let prior = 1.0 / (self.hi - self.lo);
        let mut acc = prior;
        for (mu, s) in self.mus.iter().zip(&self.sigma) {
            let z = (x - mu) / s;
            acc += (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        }
        acc / k
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let k = rng.random_range(0..=self.mus.len());
        if k == self.mus.len() {
            return rng.random_range(self.lo..self.hi);
        }
        let normal = Normal::new(self.mus[k], self.sigma[k]).expect("positive bandwidth");
        for _ in 0..32 {
            let v = normal.sample(rng);
            if v >= self.lo && v <= self.hi {
                return v;
            }
        }
        self.mus[k].clamp(self.lo, self.hi)
    }
}

fn random_point(space: &SearchSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    space
        .dims
        .iter()
        .map(|d| {
            let (lo, hi) = d.internal_bounds();
            d.from_internal(rng.random_range(lo..hi))
        })
        .collect()
}

fn propose(space: &SearchSpace, history: &[Observation], cfg: &TpeConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut order: Vec<usize> = (0..history.len()).collect();
    order.sort_by(|&a, &b| history[b].value.total_cmp(&history[a].value).then(a.cmp(&b)));
    let n_good = ((cfg.gamma * history.len() as f64).ceil() as usize).clamp(1, history.len() - 1);
    let (good, bad) = order.split_at(n_good);
    let models: Vec<(Parzen, Parzen)> = space
        .dims
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let (lo, hi) = d.internal_bounds();
            let pts = |set: &[usize]| -> Vec<f64> { set.iter().map(|&i| d.to_internal(history[i].point[j])).collect() };
            (Parzen::fit(&pts(good), lo, hi), Parzen::fit(&pts(bad), lo, hi))
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..cfg.n_candidates.max(1) {
        let mut score = 0.0;
        let mut point = Vec::with_capacity(space.dims.len());
        for (d, (l, g)) in space.dims.iter().zip(&models) {
            let u = l.sample(rng);
            score += l.pdf(u).ln() - g.pdf(u).ln();
            point.push(d.from_internal(u));
        }
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, point));
        }
    }
    best.expect("at least one candidate").1
}

fn run<F>(space: &SearchSpace, trials: usize, seed: u64, mut next: impl FnMut(&[Observation], &mut ChaCha8Rng) -> Vec<f64>, mut eval: F) -> Result<Vec<Observation>>
where
    F: FnMut(usize, &[f64]) -> std::result::Result<f64, String>,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if space.dims.is_empty() {
        return Err(Error::InvalidArgument("empty search space".into()));
    }
    for d in &space.dims {
        d.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history: Vec<Observation> = Vec::with_capacity(trials);
    for t in 0..trials {
        let point = next(&history, &mut rng);
        let obs = match eval(t, &point) {
            Ok(value) if value.is_finite() => Observation { point, value, error: None },
            Ok(value) => Observation {
                point,
                value: 0.0,
                error: Some(format!("non-finite objective {value}")),
            },
            Err(e) => Observation {
                point,
                value: 0.0,
                error: Some(e),
            },
        };
        history.push(obs);
    }
    Ok(history)
}

/// Maximize `eval` for `trials` evaluations. Failed evaluations score 0.
pub fn tpe_optimize<F>(space: &SearchSpace, trials: usize, cfg: &TpeConfig, seed: u64, eval: F) -> Result<Vec<Observation>>
where
    F: FnMut(usize, &[f64]) -> std::result::Result<f64, String>,
{
    let startup = cfg.n_startup.max(2);
    run(
        space,
        trials,
        seed,
        |h, rng| {
            if h.len() < startup {
                random_point(space, rng)
            } else {
                propose(space, h, cfg, rng)
            }
        },
        eval,
    )
}

/// Uniform random search with the same budget and bookkeeping.
pub fn random_search<F>(space: &SearchSpace, trials: usize, seed: u64, eval: F) -> Result<Vec<Observation>>
where
    F: FnMut(usize, &[f64]) -> std::result::Result<f64, String>,
{
    run(space, trials, seed, |_, rng| random_point(space, rng), eval)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> SearchSpace {
        SearchSpace {
            dims: vec![Dimension::Uniform { name: "x".into(), lo: 0.0, hi: 1.0 }],
        }
    }

    #[test]
    fn finds_quadratic_optimum() {
        let h = tpe_optimize(&quad(), 60, &TpeConfig::default(), 4, |_, x| Ok(1.0 - (x[0] - 0.3).powi(2))).unwrap();
        let b = best_index(&h).unwrap();
        assert!((h[b].point[0] - 0.3).abs() < 0.05);
        assert_eq!(h.len(), 60);
    }

    #[test]
    fn single_trial_and_failures() {
        let h = tpe_optimize(&quad(), 1, &TpeConfig::default(), 0, |_, _| Ok(0.5)).unwrap();
        assert_eq!(h.len(), 1);
        let h = tpe_optimize(&quad(), 3, &TpeConfig::default(), 0, |_, _| Err("boom".into())).unwrap();
        assert!(h.iter().all(|o| o.value == 0.0 && o.error.as_deref() == Some("boom")));
    }

    #[test]
    fn dimensions_respect_bounds() {
        let space = SearchSpace {
            dims: vec![
                Dimension::Log { name: "lr".into(), lo: 0.01, hi: 0.3 },
                Dimension::Int { name: "n".into(), lo: 5, hi: 9 },
            ],
        };
        let h = tpe_optimize(&space, 40, &TpeConfig::default(), 1, |_, p| Ok(-p[0] - p[1])).unwrap();
        for o in &h {
            assert!((0.01..=0.3).contains(&o.point[0]));
            assert!((5.0..=9.0).contains(&o.point[1]) && o.point[1].fract() == 0.0);
        }
    }
}
