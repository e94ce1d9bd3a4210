//! Binary snapshots of spectral fields.
//!
//! Layout (little-endian): magic `BSQFIELD`, `u32` version, `u32` dimension,
//! three `u32` point counts, `f64` scale, `f64` dealias fraction, `u32` label
//! length and UTF-8 label, `u32` component count, then for every component
//! the `(re, im)` pairs of each coefficient in lattice order.

use std::io::{Read, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{Grid, GridSpec};

const MAGIC: &[u8; 8] = b"BSQFIELD";
const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut out: W, label: &str, field: &SpectralField) -> Result<()> {
    let spec = field.grid().spec();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(spec.dim as u32).to_le_bytes())?;
    for p in spec.points {
        out.write_all(&(p as u32).to_le_bytes())?;
    }
    out.write_all(&spec.scale.to_le_bytes())?;
    out.write_all(&spec.dealias_fraction.to_le_bytes())?;
    out.write_all(&(label.len() as u32).to_le_bytes())?;
    out.write_all(label.as_bytes())?;
    out.write_all(&(field.components() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * field.grid().len());
    for c in 0..field.components() {
        buf.clear();
        for z in field.component(c) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Read a snapshot. A grid is reused when `grid` matches the stored layout.
pub fn read_snapshot<R: Read>(mut input: R, grid: Option<&Arc<Grid>>) -> Result<(String, SpectralField)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut input)? as usize;
    let mut points = [0usize; 3];
    for p in &mut points {
        *p = read_u32(&mut input)? as usize;
    }
    let scale = read_f64(&mut input)?;
    let dealias = read_f64(&mut input)?;
    if !(2..=3).contains(&dim) {
        return Err(Error::Snapshot(format!("dimension {dim}")));
    }
    let spec = GridSpec::with_points(dim, scale, &points[..dim])?.with_dealias(dealias)?;
    let label_len = read_u32(&mut input)? as usize;
    if label_len > 1 << 20 {
        return Err(Error::Snapshot("label too long".into()));
    }
    let mut label = vec![0u8; label_len];
    input.read_exact(&mut label)?;
    let label = String::from_utf8(label).map_err(|e| Error::Snapshot(e.to_string()))?;
    let ncomp = read_u32(&mut input)? as usize;
    if ncomp == 0 || ncomp > 16 {
        return Err(Error::Snapshot(format!("{ncomp} components")));
    }
    let grid = match grid {
        Some(g) if *g.spec() == spec => g.clone(),
        Some(_) => return Err(Error::GridMismatch),
        None => Grid::new(spec)?,
    };
    let n = grid.len();
    let mut buf = vec![0u8; 16 * n];
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        input.read_exact(&mut buf)?;
        let comp: Vec<Complex64> = buf
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..].try_into().unwrap()),
                )
            })
            .collect();
        comps.push(comp);
    }
    Ok((label, SpectralField::from_components(&grid, comps)?))
}
