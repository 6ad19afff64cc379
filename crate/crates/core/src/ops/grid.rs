use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centered rectangular mesh on `[0, lx] x [0, ly]`.
///
/// Scalars (`phi`, `mu`, `pi`) carry homogeneous Neumann conditions and the
/// velocity carries no-slip; both are imposed through one layer of ghost cells
/// (see [`Boundary`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

pub const MIN_CELLS: usize = 8;

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_CELLS} cells per direction, got {nx} x {ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidParameter(format!("domain extents must be positive, got {lx} x {ly}")));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Cell area, the midpoint-rule quadrature weight.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy()
    }

    pub fn min_spacing(&self) -> f64 {
        self.dx().min(self.dy())
    }

    pub fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} on {}x{} vs {}x{} on {}x{}",
                self.nx, self.ny, self.lx, self.ly, other.nx, other.ny, other.lx, other.ly
            )))
        }
    }
}

/// Ghost-cell rule for one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Ghost equals the adjacent interior value: zero normal derivative.
    Mirror,
    /// Ghost is the negated interior value: zero at the wall face.
    AntiMirror,
    /// Quadratic extrapolation from the three nearest interior cells; no
    /// condition is imposed (used for the transported potential and stresses).
    Extrapolate,
}

impl Boundary {
    /// Combined rule for a product of two fields with these rules.
    pub fn product(self, other: Boundary) -> Boundary {
        match (self, other) {
            (Boundary::Mirror, Boundary::Mirror) | (Boundary::AntiMirror, Boundary::AntiMirror) => Boundary::Mirror,
            (Boundary::Mirror, Boundary::AntiMirror) | (Boundary::AntiMirror, Boundary::Mirror) => {
                Boundary::AntiMirror
            }
            _ => Boundary::Extrapolate,
        }
    }
}
