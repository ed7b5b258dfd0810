//! Noise predictors consumed by the inversion loop.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::LatentTensor;

/// `eps_theta(x, i)`: deterministic for fixed inputs, output shaped like `x`.
pub trait NoisePredictor: Send + Sync {
    fn predict(&self, x: &LatentTensor, step: usize) -> Result<LatentTensor>;

    fn describe(&self) -> String;
}

impl<P: NoisePredictor + ?Sized> NoisePredictor for Box<P> {
    fn predict(&self, x: &LatentTensor, step: usize) -> Result<LatentTensor> {
        (**self).predict(x, step)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPredictor;

impl NoisePredictor for ZeroPredictor {
    fn predict(&self, x: &LatentTensor, _step: usize) -> Result<LatentTensor> {
        Ok(LatentTensor::zeros(x.dims()))
    }

    fn describe(&self) -> String {
        "zero".into()
    }
}

/// `eps(x, i) = c_i * x`; steps past the end of `coeffs` reuse the last entry.
#[derive(Debug, Clone)]
pub struct LinearPredictor {
    coeffs: Vec<f64>,
}

impl LinearPredictor {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "linear predictor needs at least one finite coefficient".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn coeff(&self, step: usize) -> f64 {
        *self.coeffs.get(step).unwrap_or(self.coeffs.last().unwrap())
    }
}

impl NoisePredictor for LinearPredictor {
    fn predict(&self, x: &LatentTensor, step: usize) -> Result<LatentTensor> {
        Ok(x.scale(self.coeff(step)))
    }

    fn describe(&self) -> String {
        let c: Vec<_> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("linear:{}", c.join(","))
    }
}

/// Seeded random 3x3 channel-mixing convolution followed by `tanh`.
///
/// Weights depend only on `(seed, step, channels)`, so the predictor is a frozen
/// nonlinear function of its input. Tensors that are not `C x H x W` are treated
/// as a single-channel row.
#[derive(Debug, Clone, Copy)]
pub struct FrozenRandomPredictor {
    seed: u64,
}

impl FrozenRandomPredictor {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn weights(&self, step: usize, channels: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed ^ (step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let scale = 1.0 / (9.0 * channels as f64).sqrt();
        let kernel = (0..channels * channels * 9)
            .map(|_| rng.random_range(-1.0..1.0) * scale * 1.7)
            .collect();
        let bias = (0..channels).map(|_| rng.random_range(-0.1..0.1)).collect();
        (kernel, bias)
    }
}

impl NoisePredictor for FrozenRandomPredictor {
    fn predict(&self, x: &LatentTensor, step: usize) -> Result<LatentTensor> {
        let (c, h, w) = match *x.dims() {
            [c, h, w] => (c, h, w),
            _ => (1, 1, x.len()),
        };
        let (kernel, bias) = self.weights(step, c);
        let src = x.data();
        let mut out = vec![0.0; src.len()];
        for co in 0..c {
            for y in 0..h {
                for xx in 0..w {
                    let mut acc = bias[co];
                    for ci in 0..c {
                        let k = &kernel[(co * c + ci) * 9..(co * c + ci + 1) * 9];
                        let plane = &src[ci * h * w..(ci + 1) * h * w];
                        for dy in 0..3 {
                            let yy = (y + dy).wrapping_sub(1);
                            if yy >= h {
                                continue;
                            }
                            for dx in 0..3 {
                                let xs = (xx + dx).wrapping_sub(1);
                                if xs >= w {
                                    continue;
                                }
                                acc += k[dy * 3 + dx] * plane[yy * w + xs];
                            }
                        }
                    }
                    out[(co * h + y) * w + xx] = acc.tanh();
                }
            }
        }
        LatentTensor::new(x.dims().to_vec(), out)
    }

    fn describe(&self) -> String {
        format!("random:{}", self.seed)
    }
}

/// Parsed predictor endpoint.
///
/// Grammar: `zero` | `linear:<c>[,<c>...]` | `random:<seed>` | `tcp:<host>:<port>` |
/// `exec:<command line>`. A `builtin:` prefix on the first three is accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PredictorSpec {
    Zero,
    Linear(Vec<f64>),
    Random(u64),
    Tcp(String),
    Exec(String),
}

impl Default for PredictorSpec {
    fn default() -> Self {
        PredictorSpec::Zero
    }
}

impl FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        let bad = || Error::InvalidArgument(format!("unrecognized predictor endpoint {s:?}"));
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "zero" if rest.is_empty() => Ok(PredictorSpec::Zero),
            "linear" => {
                let coeffs = rest
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                LinearPredictor::new(coeffs.clone())?;
                Ok(PredictorSpec::Linear(coeffs))
            }
            "random" => rest.parse().map(PredictorSpec::Random).map_err(|_| bad()),
            "tcp" if !rest.is_empty() => Ok(PredictorSpec::Tcp(rest.to_string())),
            "exec" if !rest.trim().is_empty() => Ok(PredictorSpec::Exec(rest.trim().to_string())),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for PredictorSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PredictorSpec> for String {
    fn from(p: PredictorSpec) -> String {
        p.to_string()
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictorSpec::Zero => f.write_str("zero"),
            PredictorSpec::Linear(c) => {
                let c: Vec<_> = c.iter().map(|c| c.to_string()).collect();
                write!(f, "linear:{}", c.join(","))
            }
            PredictorSpec::Random(seed) => write!(f, "random:{seed}"),
            PredictorSpec::Tcp(addr) => write!(f, "tcp:{addr}"),
            PredictorSpec::Exec(cmd) => write!(f, "exec:{cmd}"),
        }
    }
}

impl PredictorSpec {
    pub fn is_builtin(&self) -> bool {
        matches!(
            self,
            PredictorSpec::Zero | PredictorSpec::Linear(_) | PredictorSpec::Random(_)
        )
    }

    /// Instantiate the predictor, connecting to remote endpoints.
    pub fn build(&self) -> Result<Box<dyn NoisePredictor>> {
        Ok(match self {
            PredictorSpec::Zero => Box::new(ZeroPredictor),
            PredictorSpec::Linear(c) => Box::new(LinearPredictor::new(c.clone())?),
            PredictorSpec::Random(seed) => Box::new(FrozenRandomPredictor::new(*seed)),
            PredictorSpec::Tcp(addr) => Box::new(crate::protocol::RemotePredictor::connect(addr)?),
            PredictorSpec::Exec(cmd) => Box::new(crate::protocol::RemotePredictor::spawn(cmd)?),
        })
    }
}
