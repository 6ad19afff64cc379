//! Binary state snapshots.
//!
//! Layout, little-endian: magic `TFLD1` (5 bytes), version `u32`, `nx` `u32`,
//! `ny` `u32`, `lx` `f64`, `ly` `f64`, `t` `f64`, then `u_x, u_y, phi, psi_x,
//! psi_y, mu, pi`, each `nx * ny` `f64` in row-major order (`x` fastest).

use std::path::Path;

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::ops::{Grid2D, ScalarField, VectorField};

pub const MAGIC: &[u8; 5] = b"TFLD1";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 5 + 4 + 4 + 4 + 8 + 8 + 8;
const FIELDS: usize = 7;

pub fn snapshot_len(nx: usize, ny: usize) -> usize {
    HEADER_BYTES + FIELDS * 8 * nx * ny
}

pub fn encode_snapshot(state: &State) -> Vec<u8> {
    let g = state.grid();
    let mut b = Vec::with_capacity(snapshot_len(g.nx, g.ny));
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(g.nx as u32).to_le_bytes());
    b.extend_from_slice(&(g.ny as u32).to_le_bytes());
    for v in [g.lx, g.ly, state.t] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    for f in [
        &state.u.x,
        &state.u.y,
        &state.phi.data,
        &state.psi.x,
        &state.psi.y,
        &state.mu.data,
        &state.pi.data,
    ] {
        for v in f {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    b
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<State> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Truncated {
            expected: HEADER_BYTES,
            actual: bytes.len(),
        });
    }
    if &bytes[..5] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&bytes[..5]))));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(5);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version} (expected {VERSION})")));
    }
    let (nx, ny) = (u32_at(9) as usize, u32_at(13) as usize);
    let (lx, ly, t) = (f64_at(17), f64_at(25), f64_at(33));
    let expected = snapshot_len(nx, ny);
    if bytes.len() != expected {
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                actual: bytes.len(),
            });
        }
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - expected)));
    }
    let grid = Grid2D::new(nx, ny, lx, ly).map_err(|e| Error::Format(e.to_string()))?;
    let n = nx * ny;
    let field = |k: usize| -> Vec<f64> { (0..n).map(|i| f64_at(HEADER_BYTES + 8 * (k * n + i))).collect() };
    let vector = |a: usize, b: usize| VectorField {
        grid,
        x: field(a),
        y: field(b),
    };
    let scalar = |k: usize| ScalarField { grid, data: field(k) };
    Ok(State {
        t,
        u: vector(0, 1),
        phi: scalar(2),
        psi: vector(3, 4),
        mu: scalar(5),
        pi: scalar(6),
    })
}

pub fn write_snapshot(state: &State, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(state)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}
