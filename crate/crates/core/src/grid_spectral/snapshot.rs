//! Binary field snapshots.
//!
//! Layout, all little-endian: magic `VNSF`, format version `u32`, then
//! `dim`, `n`, `components` as `u32`, then `components * n^dim` `f64`
//! samples. Component is the slowest index; within a component samples are
//! row-major with the last axis fastest.

use std::io::{Read, Write};

use super::field::TorusField;
use super::grid::TorusGrid;
use crate::error::{Result, VnsError};

pub const FIELD_MAGIC: &[u8; 4] = b"VNSF";
pub const FIELD_VERSION: u32 = 1;

pub(crate) fn write_u32(w: &mut impl Write, x: u32) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn write_f64s(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(xs.len() * 8);
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_field(w: &mut impl Write, field: &TorusField) -> Result<()> {
    let g = field.grid();
    w.write_all(FIELD_MAGIC)?;
    write_u32(w, FIELD_VERSION)?;
    write_u32(w, g.dim() as u32)?;
    write_u32(w, g.n() as u32)?;
    write_u32(w, field.components() as u32)?;
    for c in 0..field.components() {
        write_f64s(w, field.values(c))?;
    }
    Ok(())
}

pub fn read_field(r: &mut impl Read) -> Result<TorusField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(VnsError::Format("bad field magic".into()));
    }
    let version = read_u32(r)?;
    if version != FIELD_VERSION {
        return Err(VnsError::Format(format!("unsupported field version {version}")));
    }
    let dim = read_u32(r)? as usize;
    let n = read_u32(r)? as usize;
    let comps = read_u32(r)? as usize;
    let grid = TorusGrid::new(dim, n).map_err(|e| VnsError::Format(e.to_string()))?;
    if comps != 1 && comps != dim {
        return Err(VnsError::Format(format!("invalid component count {comps}")));
    }
    let data = (0..comps)
        .map(|_| read_f64s(r, grid.len()))
        .collect::<Result<Vec<_>>>()?;
    TorusField::from_components(&grid, data)
}

pub fn save_field(path: &std::path::Path, field: &TorusField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &std::path::Path) -> Result<TorusField> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_field(&mut r)
}
