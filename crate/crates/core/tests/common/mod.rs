#![allow(dead_code)]

use dbinds_core::{Inds, LatentTensor};
use proptest::prelude::*;

/// Random tensor of the given dims with values in `[-3, 3]`.
pub fn tensor(dims: Vec<usize>) -> impl Strategy<Value = LatentTensor> {
    let n: usize = dims.iter().product();
    prop::collection::vec(-3.0f64..3.0, n).prop_map(move |d| LatentTensor::new(dims.clone(), d).unwrap())
}

/// Random `len x c x h x w` INDS.
pub fn inds(len: usize, c: usize, h: usize, w: usize) -> impl Strategy<Value = Inds> {
    prop::collection::vec(tensor(vec![c, h, w]), len).prop_map(|d| Inds::new(d).unwrap())
}

pub fn mini_inds() -> impl Strategy<Value = Inds> {
    inds(7, 4, 8, 8)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
