mod common;

use common::tensor;
use dbinds_core::frames::{sample_frame_indices, standardize_frame};
use dbinds_core::ltns::{decode, encode};
use dbinds_core::{build_inds, LatentTensor, NoiseSequence};
use proptest::prelude::*;

fn sequence() -> impl Strategy<Value = NoiseSequence> {
    prop::collection::vec(tensor(vec![2, 3, 3]), 8).prop_map(|f| NoiseSequence::new(f).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inds_is_linear(s1 in sequence(), s2 in sequence(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mixed: Vec<LatentTensor> = s1.frames().iter().zip(s2.frames()).map(|(x, y)| x.combine(a, y, b).unwrap()).collect();
        let lhs = build_inds(&NoiseSequence::new(mixed).unwrap()).unwrap();
        let (d1, d2) = (build_inds(&s1).unwrap(), build_inds(&s2).unwrap());
        for ((l, x), y) in lhs.diffs().iter().zip(d1.diffs()).zip(d2.diffs()) {
            for ((&l, &x), &y) in l.data().iter().zip(x.data()).zip(y.data()) {
                prop_assert!((l - (a * x + b * y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn padding_preserves_content(h in 1usize..12, w in 1usize..12, c in 1usize..4, target in 12usize..16, seed in any::<u64>()) {
        let f = LatentTensor::from_fn(&[h, w, c], |i| ((i as u64).wrapping_mul(seed | 1) % 97) as f64 / 7.0);
        let out = standardize_frame(&f, target).unwrap();
        prop_assert_eq!(out.dims(), &[target, target, c]);
        let (a, b): (f64, f64) = (f.data().iter().sum(), out.data().iter().sum());
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ltns_round_trip_is_bit_exact(dims in prop::collection::vec(1usize..5, 1..5), seed in any::<u32>()) {
        // Stored scalars are float32, so draw values that float32 represents exactly.
        let t = LatentTensor::from_fn(&dims, |i| f32::from_bits((seed ^ (i as u32).wrapping_mul(2654435761)) & 0x7f7f_ffff | 0x3000_0000) as f64);
        let back = decode(&encode(&t)).unwrap();
        prop_assert_eq!(back.dims(), t.dims());
        for (a, b) in back.data().iter().zip(t.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn frame_indices_in_range(total in 1usize..200, count in 1usize..20, stride in 1usize..5) {
        let idx = sample_frame_indices(total, count, stride).unwrap();
        prop_assert_eq!(idx.len(), count);
        prop_assert!(idx.iter().all(|&i| i < total));
    }
}
