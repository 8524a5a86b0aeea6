//! Binary spectrum container.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 8    | magic `ROTNSSPC`                         |
//! | 8      | 4    | format version, `u32` = 1                |
//! | 12     | 4    | grid size `n`, `u32`                     |
//! | 16     | 8    | grid scale `L`, `f64`                    |
//! | 24     | 4    | component count, `u32` (1 or 3)          |
//! | 28     | 36   | reserved, zero                           |
//! | 64     | ...  | body                                     |
//!
//! The body stores components one after another; each component is `n^3`
//! complex values in lattice order (flat index `(i0 n + i1) n + i2`), every
//! value written as `re` then `im`, both `f64`. Total size is
//! `64 + 16 * components * n^3` bytes.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rotns_core::{FrequencyGrid, SpectralScalarField, SpectralVectorField};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"ROTNSSPC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported component count {0}")]
    BadComponents(u32),
    #[error("body length {found} does not match header (expected {expected})")]
    Truncated { expected: usize, found: usize },
    #[error("invalid grid in header: {0}")]
    Grid(#[from] rotns_core::Error),
    #[error("non-finite value in body")]
    NonFinite,
}

/// Decoded container contents.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Scalar(SpectralScalarField),
    Vector(SpectralVectorField),
}

fn header(grid: &FrequencyGrid, components: u32) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0..8].copy_from_slice(MAGIC);
    h[8..12].copy_from_slice(&VERSION.to_le_bytes());
    h[12..16].copy_from_slice(&(grid.n() as u32).to_le_bytes());
    h[16..24].copy_from_slice(&grid.scale().to_le_bytes());
    h[24..28].copy_from_slice(&components.to_le_bytes());
    h
}

fn encode(grid: &FrequencyGrid, comps: &[&[Complex64]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * comps.len() * grid.len());
    out.extend_from_slice(&header(grid, comps.len() as u32));
    for c in comps {
        for v in c.iter() {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

pub fn encode_vector(field: &SpectralVectorField) -> Vec<u8> {
    let [a, b, c] = field.components();
    encode(field.grid(), &[a, b, c])
}

pub fn encode_scalar(field: &SpectralScalarField) -> Vec<u8> {
    encode(field.grid(), &[field.data()])
}

pub fn decode(bytes: &[u8]) -> Result<Spectrum, ContainerError> {
    if bytes.len() < HEADER_LEN {
        return Err(ContainerError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[0..8] != MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let n = u32_at(12) as usize;
    let scale = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let components = u32_at(24);
    if components != 1 && components != 3 {
        return Err(ContainerError::BadComponents(components));
    }
    let grid = FrequencyGrid::new(n, scale)?;
    let expected = HEADER_LEN + 16 * components as usize * grid.len();
    if bytes.len() != expected {
        return Err(ContainerError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let body = &bytes[HEADER_LEN..];
    let mut values = body.chunks_exact(16).map(|c| {
        Complex64::new(
            f64::from_le_bytes(c[0..8].try_into().unwrap()),
            f64::from_le_bytes(c[8..16].try_into().unwrap()),
        )
    });
    let mut comps: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..components {
        let c: Vec<Complex64> = values.by_ref().take(grid.len()).collect();
        if c.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(ContainerError::NonFinite);
        }
        comps.push(c);
    }
    if components == 1 {
        let data = comps.pop().unwrap();
        Ok(Spectrum::Scalar(SpectralScalarField::from_vec(grid, data)?))
    } else {
        let c2 = comps.pop().unwrap();
        let c1 = comps.pop().unwrap();
        let c0 = comps.pop().unwrap();
        Ok(Spectrum::Vector(SpectralVectorField::from_components(grid, [c0, c1, c2])?))
    }
}

pub fn write_vector(path: &Path, field: &SpectralVectorField) -> Result<(), ContainerError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_vector(field))?;
    Ok(())
}

pub fn write_scalar(path: &Path, field: &SpectralScalarField) -> Result<(), ContainerError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_scalar(field))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Spectrum, ContainerError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn read_vector(path: &Path) -> Result<SpectralVectorField, ContainerError> {
    match read(path)? {
        Spectrum::Vector(v) => Ok(v),
        Spectrum::Scalar(_) => Err(ContainerError::BadComponents(1)),
    }
}
