//! Bidirectional explicit linear multistep sampling and inversion.
//!
//! Three consecutive states `x_{i-1}, x_i, x_{i+1}` (index grows toward noise)
//! are tied by one linear relation
//!
//! ```text
//! x_{i-1} = A x_{i+1} + B x_i - C eps(x_i, i)
//! A = (h_i^2 / h_{i+1}^2) (alpha_{i-1} / alpha_{i+1})
//! B = ((h_{i+1}^2 - h_i^2) / h_{i+1}^2) (alpha_{i-1} / alpha_i)
//! C = (h_i (h_i + h_{i+1}) / h_{i+1}) alpha_{i-1}
//! ```
//!
//! Sampling solves it for `x_{i-1}`, inversion for `x_{i+1}`. Both use the
//! predictor only at the shared anchor `x_i`, so the two directions are exact
//! algebraic inverses. The first inversion move has no history and uses a
//! single-step update instead.

use crate::error::{Error, Result};
use crate::predictor::NoisePredictor;
use crate::schedule::NoiseSchedule;
use crate::tensor::{relative_l2, LatentTensor, NoiseSequence};

/// Coefficients of the three-state relation at one anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BelmCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BelmCoefficients {
    /// `alphas = (alpha_{i-1}, alpha_i, alpha_{i+1})`, `h = h_i`, `h_next = h_{i+1}`.
    pub fn new(alphas: (f64, f64, f64), h: f64, h_next: f64) -> Result<Self> {
        let (a_prev, a_mid, a_next) = alphas;
        if h_next == 0.0 || !h_next.is_finite() {
            return Err(Error::Schedule("h_{i+1} is zero".into()));
        }
        if h == 0.0 || !h.is_finite() {
            return Err(Error::Schedule("h_i is zero".into()));
        }
        let r = (h * h) / (h_next * h_next);
        Ok(Self {
            a: r * a_prev / a_next,
            b: (1.0 - r) * a_prev / a_mid,
            c: h * (h + h_next) / h_next * a_prev,
        })
    }

    pub fn at(sched: &NoiseSchedule, i: usize) -> Result<Self> {
        let n = sched.num_steps();
        if i == 0 || i + 1 > n {
            return Err(Error::InvalidArgument(format!(
                "anchor index {i} outside 1..={} for a {n}-step schedule",
                n.saturating_sub(1)
            )));
        }
        Self::new(
            (sched.alpha(i - 1), sched.alpha(i), sched.alpha(i + 1)),
            sched.h(i),
            sched.h(i + 1),
        )
    }

    /// `x_{i-1}` from `x_{i+1}`, `x_i` and `eps(x_i, i)`.
    pub fn sample(&self, x_hi: &[f64], x_mid: &[f64], eps: &[f64]) -> Vec<f64> {
        x_hi.iter()
            .zip(x_mid)
            .zip(eps)
            .map(|((&hi, &mid), &e)| self.a * hi + self.b * mid - self.c * e)
            .collect()
    }

    /// `x_{i+1}` from `x_{i-1}`, `x_i` and `eps(x_i, i)`.
    pub fn invert(&self, x_lo: &[f64], x_mid: &[f64], eps: &[f64]) -> Vec<f64> {
        let inv_a = 1.0 / self.a;
        x_lo.iter()
            .zip(x_mid)
            .zip(eps)
            .map(|((&lo, &mid), &e)| (lo - self.b * mid + self.c * e) * inv_a)
            .collect()
    }
}

fn predict(pred: &dyn NoisePredictor, x: &LatentTensor, step: usize) -> Result<LatentTensor> {
    let eps = pred.predict(x, step).map_err(|e| match e {
        Error::Predictor { .. } => e,
        other => Error::Predictor {
            step,
            reason: other.to_string(),
        },
    })?;
    if eps.dims() != x.dims() {
        return Err(Error::Predictor {
            step,
            reason: format!("output dims {:?} differ from input {:?}", eps.dims(), x.dims()),
        });
    }
    Ok(eps)
}

/// One sampling move: returns `x_{i-1}`.
pub fn belm_sample_step(
    x_hi: &LatentTensor,
    x_mid: &LatentTensor,
    i: usize,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<LatentTensor> {
    x_hi.same_dims(x_mid)?;
    let k = BelmCoefficients::at(sched, i)?;
    let eps = predict(pred, x_mid, i)?;
    LatentTensor::new(x_mid.dims().to_vec(), k.sample(x_hi.data(), x_mid.data(), eps.data()))
}

/// One inversion move: returns `x_{i+1}`.
pub fn belm_invert_step(
    x_lo: &LatentTensor,
    x_mid: &LatentTensor,
    i: usize,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<LatentTensor> {
    x_lo.same_dims(x_mid)?;
    let k = BelmCoefficients::at(sched, i)?;
    let eps = predict(pred, x_mid, i)?;
    LatentTensor::new(x_mid.dims().to_vec(), k.invert(x_lo.data(), x_mid.data(), eps.data()))
}

/// `x_1 = (alpha_1 / alpha_0) x_0 + alpha_1 h_1 eps(x_0, 0)`.
pub fn bootstrap_step(
    x0: &LatentTensor,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<LatentTensor> {
    let (a0, a1, h1) = (sched.alpha(0), sched.alpha(1), sched.h(1));
    let eps = predict(pred, x0, 0)?;
    x0.combine(a1 / a0, &eps, a1 * h1)
}

/// Inverse of [`bootstrap_step`], given the data-side anchor the predictor was evaluated at.
pub fn bootstrap_inverse(
    x1: &LatentTensor,
    anchor: &LatentTensor,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<LatentTensor> {
    let (a0, a1, h1) = (sched.alpha(0), sched.alpha(1), sched.h(1));
    let eps = predict(pred, anchor, 0)?;
    x1.combine(a0 / a1, &eps, -a0 * h1)
}

/// Full inversion trajectory `x_0 ..= x_N`; the last state is the recovered initial noise.
pub fn invert_frame(
    latent: &LatentTensor,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<Vec<LatentTensor>> {
    let n = sched.num_steps();
    let mut traj = Vec::with_capacity(n + 1);
    traj.push(latent.clone());
    traj.push(bootstrap_step(latent, sched, pred)?);
    for i in 1..n {
        let next = belm_invert_step(&traj[i - 1], &traj[i], i, sched, pred)?;
        traj.push(next);
    }
    Ok(traj)
}

/// Recover `x_0` from the two noisiest states `(x_N, x_{N-1})`.
pub fn reconstruct(
    x_last: &LatentTensor,
    x_prev: &LatentTensor,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<LatentTensor> {
    let n = sched.num_steps();
    if n == 1 {
        return bootstrap_inverse(x_last, x_prev, sched, pred);
    }
    let mut hi = x_last.clone();
    let mut mid = x_prev.clone();
    for i in (1..n).rev() {
        let lo = belm_sample_step(&hi, &mid, i, sched, pred)?;
        hi = std::mem::replace(&mut mid, lo);
    }
    Ok(mid)
}

/// Invert each latent independently and keep the noise-side endpoint.
pub fn invert_video(
    latents: &[LatentTensor],
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<NoiseSequence> {
    let noises = latents
        .iter()
        .enumerate()
        .map(|(frame, x)| {
            invert_frame(x, sched, pred)
                .map(|mut traj| traj.pop().expect("trajectory has >= 2 states"))
                .map_err(|e| Error::Frame {
                    frame,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    NoiseSequence::new(noises)
}

/// `|reconstruct(invert(x)) - x| / |x|` (absolute norm for `x = 0`).
pub fn roundtrip_error(
    latent: &LatentTensor,
    sched: &NoiseSchedule,
    pred: &dyn NoisePredictor,
) -> Result<f64> {
    let traj = invert_frame(latent, sched, pred)?;
    let n = traj.len();
    let back = reconstruct(&traj[n - 1], &traj[n - 2], sched, pred)?;
    relative_l2(&back, latent)
}
