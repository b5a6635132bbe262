//! Binary field snapshot format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   4 bytes  "EWSP"
//! version u32      1
//! n       u32      points per axis
//! L       f64      box length
//! repr    u8       0 = physical, 1 = spectral
//! lambda  f64      material triple
//! mu      f64
//! nu      f64
//! time    f64
//! payload 3 components × n³ complex values as (re, im) f64 pairs,
//!         x-fastest ordering
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyLattice, Representation, VectorField};
use crate::symbols::MaterialParams;

pub const MAGIC: &[u8; 4] = b"EWSP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub n: u32,
    pub box_length: f64,
    pub representation: Representation,
    pub material: (f64, f64, f64),
    pub time: f64,
}

pub fn write_field(
    path: impl AsRef<Path>,
    field: &VectorField,
    material: &MaterialParams,
    time: f64,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(field.lattice().points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&field.lattice().box_length().to_le_bytes())?;
    let repr: u8 = match field.representation() {
        Representation::Physical => 0,
        Representation::Spectral => 1,
    };
    w.write_all(&[repr])?;
    for v in [material.lambda, material.mu, material.nu, time] {
        w.write_all(&v.to_le_bytes())?;
    }
    for k in 0..3 {
        for v in field.component(k) {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<(VectorField, SnapshotHeader)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotFormat(format!(
            "unsupported format version {version}"
        )));
    }
    let n = read_u32(&mut r)?;
    let box_length = read_f64(&mut r)?;
    let mut repr_byte = [0u8; 1];
    r.read_exact(&mut repr_byte)?;
    let representation = match repr_byte[0] {
        0 => Representation::Physical,
        1 => Representation::Spectral,
        other => {
            return Err(Error::SnapshotFormat(format!(
                "bad representation byte {other}"
            )))
        }
    };
    let lambda = read_f64(&mut r)?;
    let mu = read_f64(&mut r)?;
    let nu = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;

    let lattice = FrequencyLattice::new(n as usize, box_length)?;
    let len = lattice.len();
    let mut components: [Vec<Complex64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut buf = vec![0u8; len * 16];
    for comp in &mut components {
        r.read_exact(&mut buf)?;
        comp.reserve_exact(len);
        for chunk in buf.chunks_exact(16) {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
            comp.push(Complex64::new(re, im));
        }
    }
    let field = VectorField::from_components(&lattice, representation, components)?;
    let header = SnapshotHeader {
        version,
        n,
        box_length,
        representation,
        material: (lambda, mu, nu),
        time,
    };
    Ok((field, header))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
