//! Surface emitters.
//!
//! CSV is long format with header `tau,eta,v,value`, one row per cell,
//! Doppler-major.
//!
//! The binary layout is little-endian throughout:
//!
//! | offset | type  | content                     |
//! |--------|-------|-----------------------------|
//! | 0      | [u8;4]| magic `SWAF`                |
//! | 4      | u32   | number of delays            |
//! | 8      | u32   | number of η values          |
//! | 12     | f32   | first delay, s              |
//! | 16     | f32   | last delay, s               |
//! | 20     | f32   | first η                     |
//! | 24     | f32   | last η                      |
//! | 28     | f32   | sound speed, m/s            |
//! | 32     | f32[] | `|χ|²`, one row per η       |
//!
//! Grids are reconstructed as evenly spaced between the stored bounds.

use std::io::{Read, Write};

use super::AmbiguitySurface;
use crate::error::{Error, Result};

pub const F32BIN_MAGIC: [u8; 4] = *b"SWAF";

fn io_err(e: std::io::Error) -> Error {
    Error::Io { path: "<surface>".into(), source: e }
}

pub fn write_csv<W: Write>(surface: &AmbiguitySurface, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::format("csv", e.to_string());
    w.write_record(["tau", "eta", "v", "value"]).map_err(csv_err)?;
    for (i, (&eta, &v)) in surface.etas.iter().zip(&surface.velocities).enumerate() {
        for (j, &tau) in surface.delays.iter().enumerate() {
            w.write_record(&[
                tau.to_string(),
                eta.to_string(),
                v.to_string(),
                surface.value(i, j).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn write_f32bin<W: Write>(surface: &AmbiguitySurface, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 4 * surface.values.len());
    buf.extend_from_slice(&F32BIN_MAGIC);
    buf.extend_from_slice(&(surface.delays.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(surface.etas.len() as u32).to_le_bytes());
    for v in [
        surface.delays[0],
        *surface.delays.last().unwrap(),
        surface.etas[0],
        *surface.etas.last().unwrap(),
        surface.c,
    ] {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    for v in &surface.values {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out.write_all(&buf).map_err(io_err)
}

#[derive(Clone, Debug, PartialEq)]
pub struct F32Surface {
    pub n_delays: usize,
    pub n_etas: usize,
    pub delay_bounds: (f32, f32),
    pub eta_bounds: (f32, f32),
    pub c: f32,
    pub values: Vec<f32>,
}

pub fn read_f32bin<R: Read>(mut input: R) -> Result<F32Surface> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() < 32 || bytes[..4] != F32BIN_MAGIC {
        return Err(Error::format("f32bin", "missing SWAF header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let (nd, ne) = (u32_at(4), u32_at(8));
    if bytes.len() != 32 + 4 * nd * ne {
        return Err(Error::format("f32bin", format!("expected {} values", nd * ne)));
    }
    let values = (0..nd * ne).map(|i| f32_at(32 + 4 * i)).collect();
    Ok(F32Surface {
        n_delays: nd,
        n_etas: ne,
        delay_bounds: (f32_at(12), f32_at(16)),
        eta_bounds: (f32_at(20), f32_at(24)),
        c: f32_at(28),
        values,
    })
}
