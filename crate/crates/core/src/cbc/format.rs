//! `.cbcm` model files, little-endian:
//!
//! ```text
//! "CBCM1"  u32 d′  u32 B  u32 candidates
//! (f64 lo, f64 hi) × d′   f64 smoothing   [u8; 32] projection SHA-256
//! per candidate: u32 name length, UTF-8 name,
//!                u64 occupied cells, (u64 index, f64 probability) × cells
//! ```
//!
//! Only occupied cells are written; empty cells take the background
//! probability implied by the smoothing and `B^{d′}`.

use std::fs;
use std::path::Path;

use super::grid::{GridSpec, HistogramGrid};
use super::model::CorrelationModel;
use crate::error::{Error, Result};
use crate::spectral::io::Reader;

pub const CBCM_MAGIC: &[u8; 5] = b"CBCM1";

pub fn encode_model(model: &CorrelationModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CBCM_MAGIC);
    out.extend_from_slice(&(model.spec.dims() as u32).to_le_bytes());
    out.extend_from_slice(&(model.spec.bins as u32).to_le_bytes());
    out.extend_from_slice(&(model.names.len() as u32).to_le_bytes());
    for &(lo, hi) in &model.spec.bounds {
        out.extend_from_slice(&lo.to_le_bytes());
        out.extend_from_slice(&hi.to_le_bytes());
    }
    out.extend_from_slice(&model.smoothing.to_le_bytes());
    out.extend_from_slice(&model.projection_hash);
    for (name, grid) in model.names.iter().zip(&model.grids) {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        let cells = grid.occupied();
        out.extend_from_slice(&(cells.len() as u64).to_le_bytes());
        for (k, p) in cells {
            out.extend_from_slice(&k.to_le_bytes());
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<CorrelationModel> {
    let mut r = Reader::new(bytes);
    r.magic(CBCM_MAGIC)?;
    let dims = r.u32()? as usize;
    let bins = r.u32()? as usize;
    let count = r.u32()? as usize;
    if dims.saturating_mul(16) > bytes.len() || count.saturating_mul(12) > bytes.len() {
        return Err(Error::Format("model header exceeds file size".into()));
    }
    let bounds = (0..dims).map(|_| Ok((r.f64()?, r.f64()?))).collect::<Result<Vec<_>>>()?;
    let spec = GridSpec::new(bins, bounds)?;
    let smoothing = r.f64()?;
    if !(smoothing > 0.0) {
        return Err(Error::Format(format!("bad smoothing {smoothing}")));
    }
    let projection_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
    let mut names = Vec::with_capacity(count);
    let mut grids = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|e| Error::Format(format!("candidate name: {e}")))?
            .to_string();
        let n = r.u64()?;
        if n.saturating_mul(16) > bytes.len() as u64 {
            return Err(Error::Format("cell list exceeds file size".into()));
        }
        let cells = (0..n).map(|_| Ok((r.u64()?, r.f64()?))).collect::<Result<Vec<_>>>()?;
        names.push(name);
        grids.push(HistogramGrid::from_occupied(cells, spec.cells(), smoothing)?);
    }
    r.finish()?;
    Ok(CorrelationModel { spec, smoothing, projection_hash, names, grids })
}

pub fn write_model(path: impl AsRef<Path>, model: &CorrelationModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<CorrelationModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
