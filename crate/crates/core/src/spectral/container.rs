//! Flat binary container for grid data.
//!
//! Layout: the five magic bytes `IVLB1`, the grid size `n` as a little-endian
//! `u32`, one payload-kind byte, then `n * n` little-endian `f64` values in
//! row-major order. Several containers may be concatenated in one stream.

use crate::error::{Error, Result};
use std::io::{ErrorKind, Read, Write};

pub const MAGIC: &[u8; 5] = b"IVLB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    Vorticity = 0,
    StreamFunction = 1,
    Scalar = 2,
    VelocityX1 = 3,
    VelocityX2 = 4,
    PositionX1 = 5,
    PositionX2 = 6,
    Kernel = 7,
}

impl PayloadKind {
    pub fn from_tag(tag: u8) -> Option<Self> {
        use PayloadKind::*;
        Some(match tag {
            0 => Vorticity,
            1 => StreamFunction,
            2 => Scalar,
            3 => VelocityX1,
            4 => VelocityX2,
            5 => PositionX1,
            6 => PositionX2,
            7 => Kernel,
            _ => return None,
        })
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::BadContainer(e.to_string())
}

pub fn write_container<W: Write>(
    w: &mut W,
    kind: PayloadKind,
    n: usize,
    values: &[f64],
) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "{} values for n = {n}",
            values.len()
        )));
    }
    let n32 = u32::try_from(n).map_err(|_| Error::BadContainer(format!("n = {n} too large")))?;
    let mut bytes = Vec::with_capacity(10 + 8 * values.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&n32.to_le_bytes());
    bytes.push(kind as u8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes).map_err(io_err)
}

/// Reads one container; `Ok(None)` at a clean end of stream.
fn read_one<R: Read>(r: &mut R) -> Result<Option<(PayloadKind, usize, Vec<f64>)>> {
    let mut header = [0u8; 10];
    match r.read_exact(&mut header[..1]) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(io_err(e)),
    }
    r.read_exact(&mut header[1..]).map_err(io_err)?;
    if &header[..5] != MAGIC {
        return Err(Error::BadContainer("bad magic".into()));
    }
    let n = u32::from_le_bytes(header[5..9].try_into().expect("4 bytes")) as usize;
    let kind = PayloadKind::from_tag(header[9])
        .ok_or_else(|| Error::BadContainer(format!("unknown payload tag {}", header[9])))?;
    let mut payload = vec![0u8; 8 * n * n];
    r.read_exact(&mut payload).map_err(io_err)?;
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Some((kind, n, values)))
}

pub fn read_container<R: Read>(r: &mut R) -> Result<(PayloadKind, usize, Vec<f64>)> {
    read_one(r)?.ok_or_else(|| Error::BadContainer("empty stream".into()))
}

/// Reads every concatenated container until end of stream.
pub fn read_containers<R: Read>(r: &mut R) -> Result<Vec<(PayloadKind, usize, Vec<f64>)>> {
    let mut out = Vec::new();
    while let Some(c) = read_one(r)? {
        out.push(c);
    }
    Ok(out)
}
