use super::grid::{Boundary, Grid2D};
use crate::error::{Error, Result};

/// One value per cell, row-major (`data[j * nx + i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2D,
    pub data: Vec<f64>,
}

/// Two components per cell, each row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid2D,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nx = self.grid.nx;
        self.data[j * nx + i] = v;
    }

    /// Value at `(i, j)` where either index may point one cell outside the
    /// domain; the ghost value follows `bc`.
    #[inline]
    pub fn ghost(&self, i: isize, j: isize, bc: Boundary) -> f64 {
        ghost_value(&self.data, self.grid.nx, self.grid.ny, i, j, bc)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^2` norm with cell-area weights.
    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add_scaled(&mut self, scale: f64, other: &ScalarField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn ensure_grid(&self, grid: &Grid2D) -> Result<()> {
        self.grid.ensure_same(grid)
    }
}

impl VectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0, 0.0)
    }

    pub fn constant(grid: Grid2D, vx: f64, vy: f64) -> Self {
        Self {
            grid,
            x: vec![vx; grid.len()],
            y: vec![vy; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Self {
        let mut x = Vec::with_capacity(grid.len());
        let mut y = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (a, b) = f(grid.x(i), grid.y(j));
                x.push(a);
                y.push(b);
            }
        }
        Self { grid, x, y }
    }

    pub fn from_components(a: ScalarField, b: ScalarField) -> Result<Self> {
        a.grid.ensure_same(&b.grid)?;
        Ok(Self {
            grid: a.grid,
            x: a.data,
            y: b.data,
        })
    }

    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: if c == 0 { self.x.clone() } else { self.y.clone() },
        }
    }

    pub fn components(&self) -> [&[f64]; 2] {
        [&self.x, &self.y]
    }

    pub fn norm_l2(&self) -> f64 {
        (self.x.iter().chain(&self.y).map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.x.iter().chain(&self.y).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise speed `|v|`.
    pub fn max_speed(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .fold(0.0, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        let s: f64 = self
            .x
            .iter()
            .zip(&other.x)
            .chain(self.y.iter().zip(&other.y))
            .map(|(a, b)| a * b)
            .sum();
        s * self.grid.cell_area()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn add_scaled(&mut self, scale: f64, other: &VectorField) {
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a += scale * b;
        }
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, scale: f64) -> VectorField {
        VectorField {
            grid: self.grid,
            x: self.x.iter().map(|v| v * scale).collect(),
            y: self.y.iter().map(|v| v * scale).collect(),
        }
    }

    pub fn ensure_grid(&self, grid: &Grid2D) -> Result<()> {
        self.grid.ensure_same(grid)
    }
}

/// Ghost lookup on a raw row-major array; `i`, `j` may be `-1` or `n`.
#[inline]
pub(crate) fn ghost_value(data: &[f64], nx: usize, ny: usize, i: isize, j: isize, bc: Boundary) -> f64 {
    let (nxi, nyi) = (nx as isize, ny as isize);
    let inside_x = (0..nxi).contains(&i);
    let inside_y = (0..nyi).contains(&j);
    if inside_x && inside_y {
        return data[j as usize * nx + i as usize];
    }
    // Corner ghosts apply the rule in x then in y.
    if !inside_x {
        let (a, b, c) = if i < 0 { (0, 1, 2) } else { (nxi - 1, nxi - 2, nxi - 3) };
        let at = |ii: isize| ghost_value(data, nx, ny, ii, j, bc);
        return match bc {
            Boundary::Mirror => at(a),
            Boundary::AntiMirror => -at(a),
            Boundary::Extrapolate => 3.0 * at(a) - 3.0 * at(b) + at(c),
        };
    }
    let (a, b, c) = if j < 0 { (0, 1, 2) } else { (nyi - 1, nyi - 2, nyi - 3) };
    let at = |jj: isize| data[jj as usize * nx + i as usize];
    match bc {
        Boundary::Mirror => at(a),
        Boundary::AntiMirror => -at(a),
        Boundary::Extrapolate => 3.0 * at(a) - 3.0 * at(b) + at(c),
    }
}
