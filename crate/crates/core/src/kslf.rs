//! KSLF binary field files.
//!
//! Layout (little-endian): magic `KSLF`, version `u32`, `n: u32`, `N: u32`,
//! `L: f64`. Version 2 adds `S: u32` followed by `S` times as `f64`.
//! Samples follow as interleaved `(re, im)` `f64` pairs in row-major order,
//! slice by slice for version 2.

use std::fs;
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, SpacetimeField, C};
use crate::grid::Grid;
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"KSLF";
pub const VERSION_FIELD: u32 = 1;
pub const VERSION_SPACETIME: u32 = 2;

/// Contents of a KSLF file.
#[derive(Debug, Clone, PartialEq)]
pub enum Kslf<T> {
    Field(Field<T>),
    Spacetime(SpacetimeField<T>),
}

fn put_header<T: Real>(out: &mut Vec<u8>, version: u32, grid: &Grid<T>) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&grid.period().as_f64().to_le_bytes());
}

fn put_samples<T: Real>(out: &mut Vec<u8>, samples: &[C<T>]) {
    for z in samples {
        out.extend_from_slice(&z.re.as_f64().to_le_bytes());
        out.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
}

pub fn encode_field<T: Real>(f: &Field<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * f.samples().len());
    put_header(&mut out, VERSION_FIELD, f.grid());
    put_samples(&mut out, f.samples());
    out
}

pub fn encode_spacetime<T: Real>(u: &SpacetimeField<T>) -> Vec<u8> {
    let mut out = Vec::new();
    put_header(&mut out, VERSION_SPACETIME, u.grid());
    out.extend_from_slice(&(u.times().len() as u32).to_le_bytes());
    for t in u.times() {
        out.extend_from_slice(&t.as_f64().to_le_bytes());
    }
    for s in u.slices() {
        put_samples(&mut out, s);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + k > self.bytes.len() {
            return Err(Error::Format {
                offset: self.pos,
                message: format!("truncated while reading {what}"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn samples<T: Real>(&mut self, count: usize) -> Result<Vec<C<T>>> {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            let at = self.pos;
            let re = self.f64("sample")?;
            let im = self.f64("sample")?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Format { offset: at, message: "non-finite sample".into() });
            }
            v.push(Complex::new(T::lit(re), T::lit(im)));
        }
        Ok(v)
    }
}

pub fn decode<T: Real>(bytes: &[u8]) -> Result<Kslf<T>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format { offset: 0, message: "bad magic, expected KSLF".into() });
    }
    let version = r.u32("version")?;
    if version != VERSION_FIELD && version != VERSION_SPACETIME {
        return Err(Error::Format { offset: 4, message: format!("unsupported version {version}") });
    }
    let n = r.u32("dimension")? as usize;
    let points = r.u32("points per axis")? as usize;
    let period = r.f64("period")?;
    let grid = Grid::new(n, points, T::lit(period))
        .map_err(|e| Error::Format { offset: 8, message: format!("invalid grid header: {e}") })?;
    let kslf = if version == VERSION_FIELD {
        let s = r.samples(grid.len())?;
        Kslf::Field(Field::new(grid, s)?)
    } else {
        let count_at = r.pos;
        let count = r.u32("time count")? as usize;
        if count == 0 {
            return Err(Error::Format { offset: count_at, message: "zero time slices".into() });
        }
        let times_at = r.pos;
        let mut times = Vec::with_capacity(count);
        for _ in 0..count {
            times.push(T::lit(r.f64("time")?));
        }
        let mut slices = Vec::with_capacity(count);
        for _ in 0..count {
            slices.push(r.samples(grid.len())?);
        }
        Kslf::Spacetime(
            SpacetimeField::new(grid, times, slices)
                .map_err(|e| Error::Format { offset: times_at, message: e.to_string() })?,
        )
    };
    if r.pos != bytes.len() {
        return Err(Error::Format { offset: r.pos, message: "trailing bytes".into() });
    }
    Ok(kslf)
}

pub fn write_field<T: Real>(path: &Path, f: &Field<T>) -> Result<()> {
    fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn write_spacetime<T: Real>(path: &Path, u: &SpacetimeField<T>) -> Result<()> {
    fs::write(path, encode_spacetime(u))?;
    Ok(())
}

pub fn read<T: Real>(path: &Path) -> Result<Kslf<T>> {
    decode(&fs::read(path)?)
}

pub fn read_field<T: Real>(path: &Path) -> Result<Field<T>> {
    match read(path)? {
        Kslf::Field(f) => Ok(f),
        Kslf::Spacetime(_) => Err(Error::Format { offset: 4, message: "expected a field, found spacetime data".into() }),
    }
}

/// Reads spacetime data; a plain field is promoted to a single slice at `t = 0`.
pub fn read_spacetime<T: Real>(path: &Path) -> Result<SpacetimeField<T>> {
    match read(path)? {
        Kslf::Spacetime(u) => Ok(u),
        Kslf::Field(f) => SpacetimeField::new(*f.grid(), vec![T::zero()], vec![f.into_samples()]),
    }
}
