//! Dense row-major tensors and the two sequence types built from them.

use crate::error::{Error, Result};

/// Number of frames sampled from each video.
pub const SEQUENCE_FRAMES: usize = 8;
/// Number of adjacent-frame differences in an INDS.
pub const INDS_LEN: usize = SEQUENCE_FRAMES - 1;

/// Dense rank-N real tensor stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl LatentTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "dims {:?} hold {} scalars but {} were supplied",
                dims,
                expected,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: &[usize], value: f64) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(usize) -> f64) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// Linear combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|x| a * x).collect(),
        }
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Sub-tensor at `index` along the leading axis.
    pub fn slice(&self, index: usize) -> Result<Self> {
        let (&lead, rest) = self
            .dims
            .split_first()
            .ok_or_else(|| Error::Shape("cannot slice a rank-0 tensor".into()))?;
        if index >= lead {
            return Err(Error::Shape(format!(
                "slice index {index} out of range for leading extent {lead}"
            )));
        }
        let stride: usize = rest.iter().product();
        Ok(Self {
            dims: rest.to_vec(),
            data: self.data[index * stride..(index + 1) * stride].to_vec(),
        })
    }

    /// Stack equally shaped tensors along a new leading axis.
    pub fn stack(parts: &[Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("cannot stack zero tensors".into()))?;
        let mut data = Vec::with_capacity(first.len() * parts.len());
        for p in parts {
            first.same_dims(p)?;
            data.extend_from_slice(&p.data);
        }
        let mut dims = vec![parts.len()];
        dims.extend_from_slice(&first.dims);
        Ok(Self { dims, data })
    }

    /// Split along the leading axis.
    pub fn unstack(&self) -> Result<Vec<Self>> {
        let lead = *self
            .dims
            .first()
            .ok_or_else(|| Error::Shape("cannot unstack a rank-0 tensor".into()))?;
        (0..lead).map(|i| self.slice(i)).collect()
    }
}

/// Relative L2 distance `|a - b| / |b|`; falls back to the absolute norm when `b` is zero.
pub fn relative_l2(a: &LatentTensor, b: &LatentTensor) -> Result<f64> {
    let diff = a.sub(b)?.norm_l2();
    let base = b.norm_l2();
    Ok(if base > 0.0 { diff / base } else { diff })
}

/// Eight per-frame initial-noise tensors in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSequence {
    frames: Vec<LatentTensor>,
}

impl NoiseSequence {
    pub fn new(frames: Vec<LatentTensor>) -> Result<Self> {
        if frames.len() != SEQUENCE_FRAMES {
            return Err(Error::Shape(format!(
                "noise sequence needs {SEQUENCE_FRAMES} frames, got {}",
                frames.len()
            )));
        }
        for f in &frames[1..] {
            frames[0].same_dims(f)?;
        }
        Ok(Self { frames })
    }

    /// Interpret a `[8, ...]` tensor as a sequence.
    pub fn from_stacked(t: &LatentTensor) -> Result<Self> {
        Self::new(t.unstack()?)
    }

    pub fn frames(&self) -> &[LatentTensor] {
        &self.frames
    }

    pub fn to_stacked(&self) -> LatentTensor {
        LatentTensor::stack(&self.frames).expect("validated on construction")
    }
}

/// Initial Noise Difference Sequence: seven adjacent-frame differences, each `C x H x W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inds {
    diffs: Vec<LatentTensor>,
    channels: usize,
    height: usize,
    width: usize,
}

impl Inds {
    pub fn new(diffs: Vec<LatentTensor>) -> Result<Self> {
        if diffs.len() != INDS_LEN {
            return Err(Error::Shape(format!(
                "INDS needs {INDS_LEN} differences, got {}",
                diffs.len()
            )));
        }
        for d in &diffs[1..] {
            diffs[0].same_dims(d)?;
        }
        let (channels, height, width) = match *diffs[0].dims() {
            [c, h, w] => (c, h, w),
            [h, w] => (1, h, w),
            ref other => {
                return Err(Error::Shape(format!(
                    "INDS frames must be C x H x W, got {other:?}"
                )))
            }
        };
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::Shape("INDS frames must be non-empty".into()));
        }
        Ok(Self {
            diffs,
            channels,
            height,
            width,
        })
    }

    pub fn from_stacked(t: &LatentTensor) -> Result<Self> {
        Self::new(t.unstack()?)
    }

    pub fn to_stacked(&self) -> LatentTensor {
        LatentTensor::stack(&self.diffs).expect("validated on construction")
    }

    pub fn diffs(&self) -> &[LatentTensor] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    /// Channel `c` of difference `t` as a row-major `H x W` slice.
    pub fn plane(&self, t: usize, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.diffs[t].data()[c * n..(c + 1) * n]
    }

    /// Value `d_t(c, h, w)`.
    pub fn at(&self, t: usize, c: usize, h: usize, w: usize) -> f64 {
        self.diffs[t].data()[(c * self.height + h) * self.width + w]
    }

    /// Channel-averaged `H x W` map of difference `t`.
    pub fn channel_mean(&self, t: usize) -> Vec<f64> {
        let n = self.plane_len();
        let mut out = vec![0.0; n];
        for c in 0..self.channels {
            for (o, v) in out.iter_mut().zip(self.plane(t, c)) {
                *o += v;
            }
        }
        let inv = 1.0 / self.channels as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }

    /// Every scalar of the sequence, `t`-major.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.diffs.iter().flat_map(|d| d.data().iter().copied())
    }
}

/// `d_t = eps_{t+1} - eps_t` for the seven consecutive pairs.
pub fn build_inds(seq: &NoiseSequence) -> Result<Inds> {
    let diffs = seq
        .frames
        .windows(2)
        .map(|w| w[1].sub(&w[0]))
        .collect::<Result<Vec<_>>>()?;
    Inds::new(diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_sequence(dims: &[usize]) -> NoiseSequence {
        let frames = (0..SEQUENCE_FRAMES)
            .map(|t| LatentTensor::filled(dims, t as f64))
            .collect();
        NoiseSequence::new(frames).unwrap()
    }

    #[test]
    fn identical_frames_give_zero_diffs() {
        let f = LatentTensor::from_fn(&[4, 8, 8], |i| (i as f64).sin());
        let seq = NoiseSequence::new(vec![f; 8]).unwrap();
        let inds = build_inds(&seq).unwrap();
        assert_eq!(inds.len(), 7);
        assert!(inds.values().all(|v| v == 0.0));
    }

    #[test]
    fn linear_ramp_gives_unit_diffs() {
        let inds = build_inds(&ramp_sequence(&[4, 8, 8])).unwrap();
        assert_eq!(inds.diffs().len(), 7);
        assert!(inds.values().all(|v| v == 1.0));
    }

    #[test]
    fn mismatched_frames_rejected() {
        let mut frames = vec![LatentTensor::zeros(&[4, 8, 8]); 7];
        frames.push(LatentTensor::zeros(&[4, 8, 9]));
        assert!(matches!(NoiseSequence::new(frames), Err(Error::Shape(_))));
        assert!(NoiseSequence::new(vec![LatentTensor::zeros(&[1]); 7]).is_err());
    }

    #[test]
    fn tensor_length_contract() {
        assert!(LatentTensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(LatentTensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn build_inds_is_linear() {
        let mk = |seed: f64| {
            let frames = (0..8)
                .map(|t| {
                    LatentTensor::from_fn(&[2, 3, 3], |i| ((i + 7 * t) as f64 * seed).cos())
                })
                .collect();
            NoiseSequence::new(frames).unwrap()
        };
        let (s1, s2) = (mk(0.37), mk(1.91));
        let (a, b) = (2.5, -0.75);
        let mixed = NoiseSequence::new(
            s1.frames()
                .iter()
                .zip(s2.frames())
                .map(|(x, y)| x.combine(a, y, b).unwrap())
                .collect(),
        )
        .unwrap();
        let lhs = build_inds(&mixed).unwrap();
        let (d1, d2) = (build_inds(&s1).unwrap(), build_inds(&s2).unwrap());
        for t in 0..7 {
            let rhs = d1.diffs()[t].combine(a, &d2.diffs()[t], b).unwrap();
            for (x, y) in lhs.diffs()[t].data().iter().zip(rhs.data()) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn channel_mean_averages_planes() {
        let d = LatentTensor::from_fn(&[2, 2, 2], |i| if i < 4 { 1.0 } else { 3.0 });
        let inds = Inds::new(vec![d; 7]).unwrap();
        assert_eq!(inds.channel_mean(0), vec![2.0; 4]);
        assert_eq!(inds.at(0, 1, 1, 1), 3.0);
    }
}
