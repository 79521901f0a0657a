//! Binary field container.
//!
//! Layout: magic `RLABFLD1`, endianness tag `0x01020304` (u32), `dim` (u32), `points` (u32),
//! `box_length` (f64), `time_samples` (u32, 0 for a spatial field), `t0` (f64), `time_step`
//! (f64), then the samples as little-endian complex64 (`f32` real, `f32` imaginary).

use super::field::{GridField, SpaceTimeField};
use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use std::io::Read;
use std::path::Path;

const MAGIC: &[u8; 8] = b"RLABFLD1";
const ENDIAN: u32 = 0x0102_0304;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldFile {
    Grid(GridField),
    SpaceTime(SpaceTimeField),
}

pub fn write_field(path: &Path, field: &FieldFile) -> Result<()> {
    let (dim, points, l, nt, t0, dt, samples) = match field {
        FieldFile::Grid(g) => (g.dim, g.points, g.box_length, 0, 0.0, 0.0, &g.samples),
        FieldFile::SpaceTime(u) => (u.dim, u.points, u.box_length, u.time_samples, u.t0, u.time_step, &u.samples),
    };
    let mut buf = Vec::with_capacity(48 + 8 * samples.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&ENDIAN.to_le_bytes());
    buf.extend_from_slice(&(dim as u32).to_le_bytes());
    buf.extend_from_slice(&(points as u32).to_le_bytes());
    buf.extend_from_slice(&l.to_le_bytes());
    buf.extend_from_slice(&(nt as u32).to_le_bytes());
    buf.extend_from_slice(&t0.to_le_bytes());
    buf.extend_from_slice(&dt.to_le_bytes());
    for v in samples {
        buf.extend_from_slice(&(v.re as f32).to_le_bytes());
        buf.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    crate::util::write_atomic(path, &buf)
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let bad = |s: &str| Error::Io(format!("{}: {s}", path.display()));
    if buf.len() < 48 || &buf[..8] != MAGIC {
        return Err(bad("not a field container"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    if u32_at(8) != ENDIAN {
        return Err(bad("endianness tag mismatch"));
    }
    let (dim, points, l) = (u32_at(12) as usize, u32_at(16) as usize, f64_at(20));
    let (nt, t0, dt) = (u32_at(28) as usize, f64_at(32), f64_at(40));
    if !(1..=3).contains(&dim) || !points.is_power_of_two() {
        return Err(bad("invalid header"));
    }
    let count = points.pow(dim as u32) * nt.max(1);
    if buf.len() != 48 + 8 * count {
        return Err(bad("payload length does not match header"));
    }
    let samples: Vec<C> = buf[48..]
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..].try_into().unwrap());
            C::new(re as f64, im as f64)
        })
        .collect();
    if nt == 0 {
        Ok(FieldFile::Grid(GridField::new(dim, l, points, samples)?))
    } else {
        Ok(FieldFile::SpaceTime(SpaceTimeField {
            dim,
            box_length: l,
            points,
            t0,
            time_step: dt,
            time_samples: nt,
            samples,
        }))
    }
}
