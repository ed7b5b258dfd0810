//! LTNS tensor container.
//!
//! Layout, all little-endian:
//!
//! | offset | size      | field                       |
//! |--------|-----------|-----------------------------|
//! | 0      | 4         | magic `LTNS`                |
//! | 4      | 4 (u32)   | version, must be 1          |
//! | 8      | 4 (u32)   | dtype code, 1 = float32     |
//! | 12     | 4 (u32)   | ndim                        |
//! | 16     | 8 * ndim  | extents (u64)               |
//! | ...    | 4 * prod  | payload, float32, row-major |
//!
//! Tensors are held as `f64` in memory; writing rounds each scalar to `f32`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::LatentTensor;

pub const MAGIC: &[u8; 4] = b"LTNS";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u32 = 1;

const HEADER_FIXED: usize = 16;
const MAX_NDIM: u32 = 16;

pub fn encode(t: &LatentTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_FIXED + 8 * t.rank() + 4 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&DTYPE_F32.to_le_bytes());
    out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::format(offset as u64, "truncated header"))
}

pub fn decode(bytes: &[u8]) -> Result<LatentTensor> {
    match bytes.get(0..4) {
        Some(m) if m == MAGIC => {}
        Some(_) => return Err(Error::format(0, "bad magic")),
        None => return Err(Error::format(0, "truncated header")),
    }
    let version = read_u32(bytes, 4)?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let dtype = read_u32(bytes, 8)?;
    if dtype != DTYPE_F32 {
        return Err(Error::format(8, format!("unsupported dtype code {dtype}")));
    }
    let ndim = read_u32(bytes, 12)?;
    if ndim > MAX_NDIM {
        return Err(Error::format(12, format!("ndim {ndim} exceeds {MAX_NDIM}")));
    }
    let mut dims = Vec::with_capacity(ndim as usize);
    let mut offset = HEADER_FIXED;
    for _ in 0..ndim {
        let b = bytes
            .get(offset..offset + 8)
            .ok_or_else(|| Error::format(offset as u64, "truncated extents"))?;
        let d = u64::from_le_bytes(b.try_into().unwrap());
        dims.push(
            usize::try_from(d).map_err(|_| Error::format(offset as u64, "extent overflow"))?,
        );
        offset += 8;
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::format(16, "element count overflow"))?;
    let payload = &bytes[offset..];
    let need = count
        .checked_mul(4)
        .ok_or_else(|| Error::format(16, "payload size overflow"))?;
    if payload.len() < need {
        return Err(Error::format(
            (offset + payload.len()) as u64,
            format!(
                "truncated payload: {} scalars declared, {} present",
                count,
                payload.len() / 4
            ),
        ));
    }
    if payload.len() > need {
        return Err(Error::format(
            (offset + need) as u64,
            format!("{} trailing bytes after payload", payload.len() - need),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    LatentTensor::new(dims, data)
}

pub fn write_tensor(t: &LatentTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "refusing to write non-finite tensor to {}",
            path.display()
        )));
    }
    std::fs::write(path, encode(t)).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<LatentTensor> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
