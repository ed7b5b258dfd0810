//! Noise schedules: `(alpha, sigma, h)` per discretization state, data side first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub index: usize,
    /// Mean-scaling coefficient.
    pub alpha: f64,
    /// Noise scale.
    pub sigma: f64,
    /// Step size into this state from the previous one; zero at index 0.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    LinearBeta,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBetaParams {
    pub beta_start: f64,
    pub beta_end: f64,
    /// Length of the virtual training discretization.
    pub train_steps: usize,
}

impl Default for LinearBetaParams {
    fn default() -> Self {
        Self {
            beta_start: 1e-4,
            beta_end: 0.02,
            train_steps: 1000,
        }
    }
}

/// Noise-to-signal increment between consecutive states.
pub fn step_size(prev_alpha: f64, prev_sigma: f64, alpha: f64, sigma: f64) -> f64 {
    sigma / alpha - prev_sigma / prev_alpha
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    steps: Vec<ScheduleStep>,
    kind: ScheduleKind,
}

impl NoiseSchedule {
    /// Build from `(alpha, sigma)` pairs ordered data side to noise side.
    pub fn from_pairs(pairs: &[(f64, f64)], kind: ScheduleKind) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Schedule("a schedule needs at least 2 states".into()));
        }
        let mut steps = Vec::with_capacity(pairs.len());
        for (i, &(alpha, sigma)) in pairs.iter().enumerate() {
            if !(alpha > 0.0 && alpha <= 1.0) || !(sigma >= 0.0) {
                return Err(Error::Schedule(format!(
                    "state {i}: alpha {alpha} must lie in (0, 1] and sigma {sigma} must be >= 0"
                )));
            }
            let h = if i == 0 {
                0.0
            } else {
                let (pa, ps) = pairs[i - 1];
                if !(alpha < pa && sigma > ps) {
                    return Err(Error::Schedule(format!(
                        "state {i}: alpha must decrease and sigma increase"
                    )));
                }
                step_size(pa, ps, alpha, sigma)
            };
            if i > 0 && !(h > 0.0 && h.is_finite()) {
                return Err(Error::Schedule(format!("state {i}: step size {h} is not positive")));
            }
            steps.push(ScheduleStep {
                index: i,
                alpha,
                sigma,
                h,
            });
        }
        Ok(Self { steps, kind })
    }

    /// Custom schedule from mean-scaling coefficients, with `sigma = sqrt(1 - alpha^2)`.
    pub fn from_alphas(alphas: &[f64]) -> Result<Self> {
        let pairs: Vec<_> = alphas
            .iter()
            .map(|&a| (a, (1.0 - a * a).max(0.0).sqrt()))
            .collect();
        Self::from_pairs(&pairs, ScheduleKind::Custom)
    }

    pub fn steps(&self) -> &[ScheduleStep] {
        &self.steps
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Number of transitions `N`; there are `N + 1` states.
    pub fn num_steps(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.steps[i].alpha
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.steps[i].sigma
    }

    pub fn h(&self, i: usize) -> f64 {
        self.steps[i].h
    }
}

/// Linear-beta schedule subsampled to `num_steps` transitions.
pub fn make_schedule(num_steps: usize, params: LinearBetaParams) -> Result<NoiseSchedule> {
    if num_steps == 0 {
        return Err(Error::Schedule("num_steps must be >= 1".into()));
    }
    let t = params.train_steps;
    if t < 2 || num_steps > t - 1 {
        return Err(Error::Schedule(format!(
            "{num_steps} steps cannot be drawn from {t} virtual steps"
        )));
    }
    let mut cumprod = Vec::with_capacity(t);
    let mut acc = 1.0;
    for k in 0..t {
        let beta = params.beta_start
            + (params.beta_end - params.beta_start) * k as f64 / (t - 1) as f64;
        acc *= 1.0 - beta;
        cumprod.push(acc);
    }
    let pairs: Vec<_> = (0..=num_steps)
        .map(|i| {
            let k = ((i * (t - 1)) as f64 / num_steps as f64).round() as usize;
            let a2 = cumprod[k];
            (a2.sqrt(), (1.0 - a2).sqrt())
        })
        .collect();
    NoiseSchedule::from_pairs(&pairs, ScheduleKind::LinearBeta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_step_schedule_has_eleven_states() {
        let s = make_schedule(10, LinearBetaParams::default()).unwrap();
        assert_eq!(s.steps().len(), 11);
        assert_eq!(s.num_steps(), 10);
        assert!(s.steps().windows(2).all(|w| w[1].alpha < w[0].alpha));
    }

    #[test]
    fn minimal_schedule() {
        let s = make_schedule(1, LinearBetaParams::default()).unwrap();
        assert_eq!(s.steps().len(), 2);
        assert!(s.h(1) > 0.0);
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(make_schedule(0, LinearBetaParams::default()).is_err());
    }

    #[test]
    fn monotone_for_all_step_counts() {
        for n in 1..=100 {
            let s = make_schedule(n, LinearBetaParams::default()).unwrap();
            for w in s.steps().windows(2) {
                assert!(w[1].alpha < w[0].alpha && w[1].sigma > w[0].sigma, "n = {n}");
                assert!(w[1].h > 0.0);
                let h = step_size(w[0].alpha, w[0].sigma, w[1].alpha, w[1].sigma);
                assert_eq!(h, w[1].h);
            }
        }
    }

    #[test]
    fn non_monotone_custom_rejected() {
        assert!(NoiseSchedule::from_alphas(&[0.9, 0.95]).is_err());
        assert!(NoiseSchedule::from_alphas(&[0.99, 0.5, 0.1]).is_ok());
    }
}
