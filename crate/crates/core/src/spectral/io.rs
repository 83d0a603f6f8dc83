//! Spectral cube (`.scube`) and spectral CSV readers/writers.
//!
//! `.scube` layout, little-endian:
//!
//! ```text
//! "SCUB1"  u32 width  u32 height  u32 bands  f64 start_nm  f64 step_nm
//! f32 samples, plane-sequential (band, row, column)
//! u8 mask per pixel, row-major (0 = masked, 1 = valid)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::{SensitivityFunctions, SpectralAxis, SpectralImage, Spectrum};

pub const SCUBE_MAGIC: &[u8; 5] = b"SCUB1";

pub fn encode_scube(image: &SpectralImage) -> Vec<u8> {
    let (w, h, d) = (image.width(), image.height(), image.bands());
    let mut out = Vec::with_capacity(5 + 12 + 16 + w * h * d * 4 + w * h);
    out.extend_from_slice(SCUBE_MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&image.axis().start_nm.to_le_bytes());
    out.extend_from_slice(&image.axis().step_nm.to_le_bytes());
    for band in 0..d {
        for px in 0..w * h {
            out.extend_from_slice(&(image.data()[px * d + band] as f32).to_le_bytes());
        }
    }
    out.extend(image.mask().iter().map(|&m| m as u8));
    out
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Format(format!("truncated input at byte {} (need {n} more)", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn magic(&mut self, magic: &[u8]) -> Result<()> {
        if self.take(magic.len())? != magic {
            return Err(Error::Format(format!("missing magic {:?}", String::from_utf8_lossy(magic))));
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn decode_scube(bytes: &[u8]) -> Result<SpectralImage> {
    let mut r = Reader::new(bytes);
    r.magic(SCUBE_MAGIC)?;
    let w = r.u32()? as usize;
    let h = r.u32()? as usize;
    let d = r.u32()? as usize;
    let axis = SpectralAxis::new(r.f64()?, r.f64()?, d)?;
    let pixels = w
        .checked_mul(h)
        .filter(|p| p.checked_mul(d).and_then(|n| n.checked_mul(4)).is_some())
        .ok_or_else(|| Error::Format("cube dimensions overflow".into()))?;
    if bytes.len() < 33 + pixels * d * 4 + pixels {
        return Err(Error::Format("truncated cube".into()));
    }
    let mut data = vec![0.0; pixels * d];
    for band in 0..d {
        for px in 0..pixels {
            data[px * d + band] = r.f32()? as f64;
        }
    }
    let mask = r
        .take(pixels)?
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Format(format!("mask byte {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    SpectralImage::new(w, h, axis, data, mask)
}

pub fn write_scube(path: impl AsRef<Path>, image: &SpectralImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_scube(image)).map_err(|e| Error::io(path, e))
}

pub fn read_scube(path: impl AsRef<Path>) -> Result<SpectralImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_scube(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Reads a `wavelength_nm,value[,value2,value3]` CSV into an axis and one
/// column vector per value column.
pub fn read_spectral_csv(path: impl AsRef<Path>) -> Result<(SpectralAxis, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectral_csv(&text, path)
}

pub(crate) fn parse_spectral_csv(text: &str, path: &Path) -> Result<(SpectralAxis, Vec<Vec<f64>>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    if header.first() != Some(&"wavelength_nm") || header.len() < 2 {
        return Err(Error::parse(path, 1, "header must start with wavelength_nm and name at least one value column"));
    }
    let columns = header.len() - 1;
    let mut wavelengths = Vec::new();
    let mut values = vec![Vec::new(); columns];
    for (i, line) in lines {
        let row = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(Error::parse(path, row, format!("expected {} fields, found {}", header.len(), fields.len())));
        }
        let nums = fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::parse(path, row, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, row, "non-finite value"));
        }
        if nums[1..].iter().any(|&v| v < 0.0) {
            return Err(Error::parse(path, row, "negative value"));
        }
        if let Some(&prev) = wavelengths.last() {
            if nums[0] <= prev {
                return Err(Error::parse(path, row, "wavelengths must be strictly increasing"));
            }
        }
        wavelengths.push(nums[0]);
        for (col, v) in values.iter_mut().zip(&nums[1..]) {
            col.push(*v);
        }
    }
    let axis = SpectralAxis::from_wavelengths(&wavelengths).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    Ok((axis, values))
}

pub fn read_spectrum_csv(path: impl AsRef<Path>) -> Result<Spectrum> {
    let path = path.as_ref();
    let (axis, mut cols) = read_spectral_csv(path)?;
    if cols.len() != 1 {
        return Err(Error::parse(path, 1, format!("expected 1 value column, found {}", cols.len())));
    }
    Spectrum::new(axis, cols.remove(0))
}

pub fn read_sensitivities_csv(path: impl AsRef<Path>) -> Result<SensitivityFunctions> {
    let path = path.as_ref();
    let (axis, cols) = read_spectral_csv(path)?;
    let [r, g, b]: [Vec<f64>; 3] = cols
        .try_into()
        .map_err(|c: Vec<_>| Error::parse(path, 1, format!("expected 3 value columns, found {}", c.len())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    SensitivityFunctions::new(axis, [r, g, b], name)
}

pub fn write_spectral_csv(path: impl AsRef<Path>, axis: &SpectralAxis, columns: &[&[f64]]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("wavelength_nm,value");
    for k in 2..=columns.len() {
        out.push_str(&format!(",value{k}"));
    }
    out.push('\n');
    for (i, wl) in axis.wavelengths().enumerate() {
        out.push_str(&wl.to_string());
        for col in columns {
            out.push(',');
            out.push_str(&col[i].to_string());
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
