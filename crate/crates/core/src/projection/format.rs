//! `.proj` model files, little-endian:
//!
//! ```text
//! "PROJ1"  u8 kind  u32 d  u32 d′
//! u8 has_mean  [f64 × d if has_mean]
//! f64 basis, row-major in the kind's stored orientation
//! u32 metadata length  UTF-8 JSON metadata
//! ```

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::{Projection, ProjectionKind, ProjectionMetadata};
use crate::error::{Error, Result};
use crate::spectral::io::Reader;

pub const PROJ_MAGIC: &[u8; 5] = b"PROJ1";

pub fn encode_projection(p: &Projection) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(PROJ_MAGIC);
    out.push(p.kind.code());
    out.extend_from_slice(&(p.input_dim as u32).to_le_bytes());
    out.extend_from_slice(&(p.output_dim as u32).to_le_bytes());
    match &p.mean {
        Some(m) => {
            out.push(1);
            m.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        }
        None => out.push(0),
    }
    for r in 0..p.basis.nrows() {
        for c in 0..p.basis.ncols() {
            out.extend_from_slice(&p.basis[(r, c)].to_le_bytes());
        }
    }
    let meta = serde_json::to_vec(&p.metadata).expect("metadata serializes");
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    out
}

pub fn decode_projection(bytes: &[u8]) -> Result<Projection> {
    let mut r = Reader::new(bytes);
    r.magic(PROJ_MAGIC)?;
    let code = r.u8()?;
    let kind = ProjectionKind::from_code(code).ok_or_else(|| Error::Format(format!("unknown kind byte {code}")))?;
    let d = r.u32()? as usize;
    let dp = r.u32()? as usize;
    if d.checked_mul(dp).and_then(|n| n.checked_mul(8)).is_none_or(|n| n > bytes.len()) {
        return Err(Error::Format("projection dimensions exceed file size".into()));
    }
    let mean = match r.u8()? {
        0 => None,
        1 => Some((0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?),
        other => return Err(Error::Format(format!("bad mean flag {other}"))),
    };
    let (rows, cols) = if kind.column_basis() { (d, dp) } else { (dp, d) };
    let values = (0..rows * cols).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let basis = DMatrix::from_row_slice(rows, cols, &values);
    let len = r.u32()? as usize;
    let metadata: ProjectionMetadata = serde_json::from_slice(r.take(len)?)
        .map_err(|e| Error::Format(format!("projection metadata: {e}")))?;
    r.finish()?;
    Projection::new(kind, mean, basis, metadata)
}

/// SHA-256 of the encoded projection.
pub fn content_hash(p: &Projection) -> [u8; 32] {
    Sha256::digest(encode_projection(p)).into()
}

pub fn write_projection(path: impl AsRef<Path>, p: &Projection) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_projection(p)).map_err(|e| Error::io(path, e))
}

pub fn read_projection(path: impl AsRef<Path>) -> Result<Projection> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_projection(&bytes)
}
