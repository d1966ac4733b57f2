//! `TORF` binary field snapshots.
//!
//! Layout (all little-endian): magic `TORF`, `u32` version (1), `u32 n1`,
//! `u32 n2`, four `f64` basis components `xi1 xi2 eta1 eta2`, then `n1 * n2`
//! `f64` samples in row-major `(j1, j2)` order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBasis, Vec2};
use crate::spectral::{Grid, RealField};

pub const MAGIC: &[u8; 4] = b"TORF";
pub const VERSION: u32 = 1;

pub fn write_torf<W: Write>(mut w: W, field: &RealField) -> Result<()> {
    let grid = field.grid();
    let b = grid.basis();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in [grid.n1(), grid.n2()] {
        let n = u32::try_from(n).map_err(|_| Error::InvalidGrid(format!("{n} exceeds u32")))?;
        w.write_all(&n.to_le_bytes())?;
    }
    for v in [b.xi().x, b.xi().y, b.eta().x, b.eta().y] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in field.samples() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_torf<R: Read>(mut r: R) -> Result<RealField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse(format!("bad snapshot magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Parse(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let n1 = read_u32(&mut r)? as usize;
    let n2 = read_u32(&mut r)? as usize;
    let mut b = [0.0; 4];
    for v in b.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let basis = LatticeBasis::new(Vec2::new(b[0], b[1]), Vec2::new(b[2], b[3]))?;
    let grid = Grid::new(basis, n1, n2)?;
    let mut samples = Vec::with_capacity(n1 * n2);
    for _ in 0..n1 * n2 {
        samples.push(read_f64(&mut r)?);
    }
    RealField::new(grid, samples)
}

pub fn save(path: impl AsRef<Path>, field: &RealField) -> Result<()> {
    write_torf(BufWriter::new(File::create(path)?), field)
}

pub fn load(path: impl AsRef<Path>) -> Result<RealField> {
    read_torf(BufReader::new(File::open(path)?))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
