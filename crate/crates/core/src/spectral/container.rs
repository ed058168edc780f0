//! Binary snapshot container.
//!
//! Layout (little endian): 12-byte magic, u32 version, u64 point count,
//! f64 box length (or `r_max`), u8 representation flag, then interleaved
//! `(re, im)` f64 pairs, x fastest.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::{Field, Representation};
use super::grid::Grid3;
use super::radial::{RadialGrid, RadialProfile};
use crate::error::{LabError, Result};

pub const FIELD_MAGIC: &[u8; 12] = b"BSLAB-FIELD\0";
pub const RADIAL_MAGIC: &[u8; 12] = b"BSLAB-RADIAL";
pub const VERSION: u32 = 1;

fn repr_flag(r: Representation) -> u8 {
    match r {
        Representation::Physical => 0,
        Representation::Spectral => 1,
    }
}

fn parse_repr(b: u8) -> Result<Representation> {
    match b {
        0 => Ok(Representation::Physical),
        1 => Ok(Representation::Spectral),
        other => Err(LabError::Format(format!("unknown representation flag {other}"))),
    }
}

fn write_body<W: Write>(
    w: &mut W,
    magic: &[u8; 12],
    n: u64,
    length: f64,
    repr: Representation,
    values: &[Complex64],
) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&length.to_le_bytes())?;
    w.write_all(&[repr_flag(repr)])?;
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Header {
    n: u64,
    length: f64,
    repr: Representation,
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 12]) -> Result<Header> {
    let mut m = [0u8; 12];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(LabError::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(LabError::Format(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let length = f64::from_le_bytes(b8);
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    Ok(Header {
        n,
        length,
        repr: parse_repr(b1[0])?,
    })
}

fn read_values<R: Read>(r: &mut R, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)
        .map_err(|e| LabError::Format(format!("truncated payload: {e}")))?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

pub fn write_field<W: Write>(w: &mut W, f: &Field) -> Result<()> {
    write_body(
        w,
        FIELD_MAGIC,
        f.grid().n() as u64,
        f.grid().box_length(),
        f.representation(),
        f.values(),
    )
}

pub fn read_field<R: Read>(r: &mut R) -> Result<Field> {
    let h = read_header(r, FIELD_MAGIC)?;
    let grid = Grid3::new(h.n as usize, h.length).map_err(|e| LabError::Format(e.to_string()))?;
    let values = read_values(r, grid.len())?;
    Field::from_values(grid, values, h.repr)
}

pub fn write_radial<W: Write>(w: &mut W, f: &RadialProfile) -> Result<()> {
    write_body(
        w,
        RADIAL_MAGIC,
        f.grid().n_r() as u64,
        f.grid().r_max(),
        f.representation(),
        f.values(),
    )
}

pub fn read_radial<R: Read>(r: &mut R) -> Result<RadialProfile> {
    let h = read_header(r, RADIAL_MAGIC)?;
    let grid = RadialGrid::new(h.length, h.n as usize).map_err(|e| LabError::Format(e.to_string()))?;
    let values = read_values(r, grid.n_r())?;
    RadialProfile::from_values(grid, values, h.repr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_sixteen_bytes() {
        let g = Grid3::new(2, 1.0).unwrap();
        let f = Field::zeros(g, Representation::Spectral);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[..12], FIELD_MAGIC);
        assert_eq!(buf.len(), 16 + 8 + 8 + 1 + 8 * 16);
        assert_eq!(buf[32], 1);
    }

    #[test]
    fn rejects_wrong_magic() {
        let g = RadialGrid::new(1.0, 4).unwrap();
        let f = RadialProfile::zeros(g, Representation::Physical);
        let mut buf = Vec::new();
        write_radial(&mut buf, &f).unwrap();
        assert!(matches!(read_field(&mut buf.as_slice()), Err(LabError::Format(_))));
        let back = read_radial(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}
