//! Built-in pixel-to-latent encoder: block means followed by a fixed channel mix.
//!
//! A deterministic stand-in for a learned autoencoder so pixel inputs can run
//! through the pipeline without an external service.

use crate::error::{Error, Result};
use crate::tensor::LatentTensor;

pub const LATENT_CHANNELS: usize = 4;
pub const DEFAULT_BLOCK: usize = 8;

/// Rows map centered RGB to latent channels.
const MIX: [[f64; 3]; LATENT_CHANNELS] = [
    [0.299, 0.587, 0.114],
    [0.5, -0.5, 0.0],
    [0.25, 0.25, -0.5],
    [0.5, 0.0, -0.5],
];

/// Encode an `H x W x C` frame (C = 1 or 3, values in `[0, 1]`) into
/// `4 x H/block x W/block`.
pub fn encode_frame(frame: &LatentTensor, block: usize) -> Result<LatentTensor> {
    let [h, w, c] = *frame.dims() else {
        return Err(Error::Shape(format!("frame must be H x W x C, got {:?}", frame.dims())));
    };
    if block == 0 || h % block != 0 || w % block != 0 || h == 0 || w == 0 {
        return Err(Error::Shape(format!("{h}x{w} frame is not divisible into {block}-pixel blocks")));
    }
    if c != 1 && c != 3 {
        return Err(Error::Shape(format!("expected 1 or 3 color channels, got {c}")));
    }
    let (lh, lw) = (h / block, w / block);
    let src = frame.data();
    let area = (block * block) as f64;
    let mut out = LatentTensor::zeros(&[LATENT_CHANNELS, lh, lw]);
    let dst = out.data_mut();
    for by in 0..lh {
        for bx in 0..lw {
            let mut rgb = [0.0; 3];
            for y in by * block..(by + 1) * block {
                for x in bx * block..(bx + 1) * block {
                    let p = (y * w + x) * c;
                    for (k, v) in rgb.iter_mut().enumerate() {
                        *v += src[p + if c == 1 { 0 } else { k }];
                    }
                }
            }
            let centered = rgb.map(|v| v / area - 0.5);
            for (ch, row) in MIX.iter().enumerate() {
                dst[(ch * lh + by) * lw + bx] = row.iter().zip(&centered).map(|(m, v)| m * v).sum();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_frame_maps_to_luma_only() {
        let f = LatentTensor::filled(&[16, 16, 3], 0.75);
        let z = encode_frame(&f, 8).unwrap();
        assert_eq!(z.dims(), &[4, 2, 2]);
        for (i, &v) in z.data().iter().enumerate() {
            let want = if i < 4 { 0.25 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "{i}: {v}");
        }
    }

    #[test]
    fn block_mean_is_local() {
        let mut f = LatentTensor::filled(&[16, 16, 1], 0.5);
        f.data_mut()[0] = 1.0;
        let z = encode_frame(&f, 8).unwrap();
        assert!((z.data()[0] - 0.5 / 64.0).abs() < 1e-12);
        assert_eq!(z.data()[1], 0.0);
        assert!(encode_frame(&f, 5).is_err());
    }
}
