//! Frame sampling and spatial standardization.

use crate::error::{Error, Result};
use crate::tensor::LatentTensor;

pub const DEFAULT_STRIDE: usize = 2;
pub const DEFAULT_TARGET: usize = 512;

/// Pick `count` frame indices from a clip of `total_frames`.
///
/// Uses `stride` when the span fits, otherwise stride 1, and finally repeats the
/// last valid index when the clip is shorter than `count`.
pub fn sample_frame_indices(total_frames: usize, count: usize, stride: usize) -> Result<Vec<usize>> {
    if total_frames == 0 {
        return Err(Error::EmptyVideo);
    }
    if count == 0 || stride == 0 {
        return Err(Error::InvalidArgument(
            "frame count and stride must be at least 1".into(),
        ));
    }
    let step = if (count - 1) * stride < total_frames {
        stride
    } else {
        1
    };
    Ok((0..count)
        .map(|i| (i * step).min(total_frames - 1))
        .collect())
}

/// Placement of a source axis inside the target axis.
#[derive(Debug, Clone, Copy)]
struct Fit {
    src_start: usize,
    dst_start: usize,
    len: usize,
}

fn fit_axis(n: usize, target: usize) -> Fit {
    if n >= target {
        Fit {
            src_start: (n - target) / 2,
            dst_start: 0,
            len: target,
        }
    } else {
        Fit {
            src_start: 0,
            dst_start: (target - n) / 2,
            len: n,
        }
    }
}

/// Center-crop or zero-pad an `H x W x C` frame to `target x target x C`.
///
/// Odd margins put the smaller half on the top/left side.
pub fn standardize_frame(frame: &LatentTensor, target: usize) -> Result<LatentTensor> {
    let [h, w, c] = *frame.dims() else {
        return Err(Error::Shape(format!(
            "frame must be H x W x C, got {:?}",
            frame.dims()
        )));
    };
    if h == 0 || w == 0 || target == 0 {
        return Err(Error::Shape("frame and target extents must be >= 1".into()));
    }
    let (fy, fx) = (fit_axis(h, target), fit_axis(w, target));
    let mut out = LatentTensor::zeros(&[target, target, c]);
    let src = frame.data();
    let dst = out.data_mut();
    for y in 0..fy.len {
        let s = ((fy.src_start + y) * w + fx.src_start) * c;
        let d = ((fy.dst_start + y) * target + fx.dst_start) * c;
        dst[d..d + fx.len * c].copy_from_slice(&src[s..s + fx.len * c]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_stride_on_long_clip() {
        assert_eq!(
            sample_frame_indices(30, 8, 2).unwrap(),
            vec![0, 2, 4, 6, 8, 10, 12, 14]
        );
    }

    #[test]
    fn stride_one_fallback_fills_exactly() {
        assert_eq!(sample_frame_indices(8, 8, 2).unwrap(), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn short_clip_repeats_last() {
        assert_eq!(
            sample_frame_indices(6, 8, 2).unwrap(),
            vec![0, 1, 2, 3, 4, 5, 5, 5]
        );
    }

    #[test]
    fn empty_video_is_an_error() {
        assert!(matches!(sample_frame_indices(0, 8, 2), Err(Error::EmptyVideo)));
    }

    #[test]
    fn identity_at_target() {
        let f = LatentTensor::from_fn(&[16, 16, 3], |i| i as f64);
        assert_eq!(standardize_frame(&f, 16).unwrap(), f);
    }

    #[test]
    fn crop_of_constant_field() {
        let f = LatentTensor::filled(&[514, 514, 1], 7.0);
        let out = standardize_frame(&f, 512).unwrap();
        assert_eq!(out.dims(), &[512, 512, 1]);
        assert!(out.data().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn crop_keeps_center() {
        // 5 columns cropped to 2: margin 3 splits 1 left / 2 right.
        let f = LatentTensor::from_fn(&[2, 5, 1], |i| (i % 5) as f64);
        let out = standardize_frame(&f, 2).unwrap();
        assert_eq!(out.data(), &[1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn symmetric_zero_pad() {
        let f = LatentTensor::filled(&[510, 512, 1], 1.0);
        let out = standardize_frame(&f, 512).unwrap();
        let row = |y: usize| &out.data()[y * 512..(y + 1) * 512];
        assert!(row(0).iter().all(|&v| v == 0.0));
        assert!(row(511).iter().all(|&v| v == 0.0));
        assert!((1..511).all(|y| row(y).iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn rejects_non_frame_tensor() {
        assert!(standardize_frame(&LatentTensor::zeros(&[4, 4]), 4).is_err());
    }

    proptest! {
        #[test]
        fn indices_always_in_range(total in 1usize..200, count in 1usize..20, stride in 1usize..6) {
            let idx = sample_frame_indices(total, count, stride).unwrap();
            prop_assert_eq!(idx.len(), count);
            prop_assert!(idx.iter().all(|&i| i < total));
            prop_assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn padding_preserves_content(h in 1usize..12, w in 1usize..12, c in 1usize..4) {
            let f = LatentTensor::from_fn(&[h, w, c], |i| (i as f64 * 0.7).sin());
            let out = standardize_frame(&f, 12).unwrap();
            let (a, b): (f64, f64) = (f.data().iter().sum(), out.data().iter().sum());
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
