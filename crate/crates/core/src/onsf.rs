//! ONSF binary field serialization.
//!
//! Little-endian layout: bytes 0-3 ASCII "ONSF"; u32 version = 1; u32 d;
//! u32 m; d x u32 axis sizes; d x f64 axis lengths; then prod(n) * m f64
//! samples, nodes row-major with axis 0 slowest and components
//! fastest-varying. Write-then-read reproduces the payload bit-exactly.

use crate::error::{Error, Result};
use crate::grid::GridField;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"ONSF";
const VERSION: u32 = 1;

pub fn write_field(path: impl AsRef<Path>, u: &GridField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(u.dim() as u32).to_le_bytes())?;
    w.write_all(&(u.components() as u32).to_le_bytes())?;
    for &ni in u.shape() {
        w.write_all(&(ni as u32).to_le_bytes())?;
    }
    for &li in u.lengths() {
        w.write_all(&li.to_le_bytes())?;
    }
    for &v in u.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<GridField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, len: usize) -> Result<&'a [u8]> {
    if bytes.len() < *pos + len {
        return Err(Error::Truncated {
            expected: *pos + len,
            found: bytes.len(),
        });
    }
    let out = &bytes[*pos..*pos + len];
    *pos += len;
    Ok(out)
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().unwrap()))
}

fn read_f64(bytes: &[u8], pos: &mut usize) -> Result<f64> {
    Ok(f64::from_le_bytes(take(bytes, pos, 8)?.try_into().unwrap()))
}

pub fn decode(bytes: &[u8]) -> Result<GridField> {
    let mut pos = 0usize;
    let magic = take(bytes, &mut pos, 4)?;
    if magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = read_u32(bytes, &mut pos)?;
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let d = read_u32(bytes, &mut pos)? as usize;
    let m = read_u32(bytes, &mut pos)? as usize;
    if !(d == 2 || d == 3) {
        return Err(Error::InvalidParameter(format!(
            "field dimension {d} out of range"
        )));
    }
    let mut n = Vec::with_capacity(d);
    for _ in 0..d {
        n.push(read_u32(bytes, &mut pos)? as usize);
    }
    let mut l = Vec::with_capacity(d);
    for _ in 0..d {
        l.push(read_f64(bytes, &mut pos)?);
    }
    let count = n.iter().product::<usize>().checked_mul(m).ok_or_else(|| {
        Error::InvalidParameter("sample count overflows".into())
    })?;
    let expected = pos + count * 8;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(read_f64(bytes, &mut pos)?);
    }
    GridField::new(m, &n, &l, data)
}
