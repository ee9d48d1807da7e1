//! Field dumps and CSV export.
//!
//! Binary dump layout (all little-endian):
//!
//! ```text
//! magic      4 bytes  "HDW1"
//! n          u32      space dimension
//! N          u32      points per axis
//! L          f64      box length
//! components u32
//! samples    Nⁿ × components × (f64 re, f64 im)
//! ```
//!
//! Samples are row-major over the array shape `[N; n] × [components]`, i.e.
//! grid point slowest (axis 0 first) and component fastest.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, ScalarField, SpinorField};

pub const MAGIC: &[u8; 4] = b"HDW1";

pub fn write_dump<F: Field + ?Sized, W: Write>(field: &F, mut out: W) -> Result<()> {
    let grid = field.grid();
    let comps = field.component_slices();
    out.write_all(MAGIC)?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&(grid.points() as u32).to_le_bytes())?;
    out.write_all(&grid.length().to_le_bytes())?;
    out.write_all(&(comps.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * comps.len() * 1024);
    for i in 0..grid.len() {
        for c in &comps {
            buf.extend_from_slice(&c[i].re.to_le_bytes());
            buf.extend_from_slice(&c[i].im.to_le_bytes());
        }
        if buf.len() >= 16 * 1024 * comps.len() {
            out.write_all(&buf)?;
            buf.clear();
        }
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Decoded dump: the grid plus component-major samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub grid: Grid,
    pub components: Vec<Vec<Complex64>>,
}

impl Dump {
    pub fn into_spinor(self) -> Result<SpinorField> {
        SpinorField::new(self.grid, self.components)
    }

    pub fn into_scalar(mut self) -> Result<ScalarField> {
        if self.components.len() != 1 {
            return Err(Error::Format(format!("expected 1 component, found {}", self.components.len())));
        }
        ScalarField::new(self.grid, self.components.pop().unwrap())
    }
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

pub fn read_dump<R: Read>(mut input: R) -> Result<Dump> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let n = read_u32(&mut input)? as usize;
    let points = read_u32(&mut input)? as usize;
    let length = read_f64(&mut input)?;
    let ncomp = read_u32(&mut input)? as usize;
    let grid = Grid::new(n, length, points)?;
    if ncomp == 0 || ncomp > 4 {
        return Err(Error::Format(format!("unsupported component count {ncomp}")));
    }
    let mut components = vec![Vec::with_capacity(grid.len()); ncomp];
    let mut rec = vec![0u8; 16 * ncomp];
    for _ in 0..grid.len() {
        input.read_exact(&mut rec)?;
        for (c, comp) in components.iter_mut().enumerate() {
            let re = f64::from_le_bytes(rec[16 * c..16 * c + 8].try_into().unwrap());
            let im = f64::from_le_bytes(rec[16 * c + 8..16 * c + 16].try_into().unwrap());
            comp.push(Complex64::new(re, im));
        }
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    Ok(Dump { grid, components })
}

/// CSV of a 1D field: `x,re0,im0,re1,im1,…`.
pub fn write_field_csv_1d<F: Field + ?Sized, W: Write>(field: &F, mut out: W) -> Result<()> {
    let grid = field.grid();
    if grid.n() != 1 {
        return Err(Error::UnsupportedDimension(grid.n(), "1 for CSV field export"));
    }
    let comps = field.component_slices();
    let mut header = String::from("x");
    for c in 0..comps.len() {
        header.push_str(&format!(",re{c},im{c}"));
    }
    writeln!(out, "{header}")?;
    for i in 0..grid.len() {
        write!(out, "{:.17e}", grid.coordinate(i))?;
        for c in &comps {
            write!(out, ",{:.17e},{:.17e}", c[i].re, c[i].im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads back the `x` column and components written by [`write_field_csv_1d`].
pub fn read_field_csv_1d<R: BufRead>(input: R) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
    let ncomp = (header.split(',').count() - 1) / 2;
    let mut xs = Vec::new();
    let mut comps = vec![Vec::new(); ncomp];
    for line in lines {
        let line = line?;
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{e}: {s}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 1 + 2 * ncomp {
            return Err(Error::Format(format!("row has {} columns", vals.len())));
        }
        xs.push(vals[0]);
        for (c, comp) in comps.iter_mut().enumerate() {
            comp.push(Complex64::new(vals[1 + 2 * c], vals[2 + 2 * c]));
        }
    }
    Ok((xs, comps))
}
