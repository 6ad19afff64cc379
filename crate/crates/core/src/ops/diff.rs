//! Second-order finite differences on the cell-centered grid.
//!
//! Central first derivatives use the wide stencil `(f[i+1] - f[i-1]) / 2h`.
//! With a mirror-ghost scalar and an anti-mirror-ghost vector the discrete
//! gradient and divergence are exact negative adjoints, so `div(grad)` is
//! symmetric and its null space is the constants only.

use super::field::{ghost_value, ScalarField, VectorField};
use super::grid::{Boundary, Grid2D};
use crate::error::Result;

/// Central x-derivative of a raw array.
pub(crate) fn ddx(data: &[f64], grid: &Grid2D, bc: Boundary) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let inv = 0.5 / grid.dx();
    let mut out = vec![0.0; grid.len()];
    for j in 0..ny {
        let row = j * nx;
        for i in 1..nx - 1 {
            out[row + i] = (data[row + i + 1] - data[row + i - 1]) * inv;
        }
        let jj = j as isize;
        let left = ghost_value(data, nx, ny, -1, jj, bc);
        let right = ghost_value(data, nx, ny, nx as isize, jj, bc);
        out[row] = (data[row + 1] - left) * inv;
        out[row + nx - 1] = (right - data[row + nx - 2]) * inv;
    }
    out
}

/// Central y-derivative of a raw array.
pub(crate) fn ddy(data: &[f64], grid: &Grid2D, bc: Boundary) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let inv = 0.5 / grid.dy();
    let mut out = vec![0.0; grid.len()];
    for j in 1..ny - 1 {
        for i in 0..nx {
            out[j * nx + i] = (data[(j + 1) * nx + i] - data[(j - 1) * nx + i]) * inv;
        }
    }
    for i in 0..nx {
        let ii = i as isize;
        let bottom = ghost_value(data, nx, ny, ii, -1, bc);
        let top = ghost_value(data, nx, ny, ii, ny as isize, bc);
        out[i] = (data[nx + i] - bottom) * inv;
        out[(ny - 1) * nx + i] = (top - data[(ny - 2) * nx + i]) * inv;
    }
    out
}

/// Compact `div(c grad f)` with face coefficients the arithmetic mean of the
/// adjacent cells (`c = None` means `c = 1`).
pub(crate) fn laplace_raw(data: &[f64], coef: Option<&[f64]>, grid: &Grid2D, bc: Boundary) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let (ix2, iy2) = (1.0 / (grid.dx() * grid.dx()), 1.0 / (grid.dy() * grid.dy()));
    let mut out = vec![0.0; grid.len()];
    let c = |k: usize| coef.map_or(1.0, |c| c[k]);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let f0 = data[k];
            let (ii, jj) = (i as isize, j as isize);
            let nb = |di: isize, dj: isize| -> (f64, f64) {
                let (a, b) = (ii + di, jj + dj);
                let inside = a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny;
                if inside {
                    let kk = b as usize * nx + a as usize;
                    (data[kk], 0.5 * (c(k) + c(kk)))
                } else {
                    (ghost_value(data, nx, ny, a, b, bc), c(k))
                }
            };
            let (fe, ce) = nb(1, 0);
            let (fw, cw) = nb(-1, 0);
            let (fn_, cn) = nb(0, 1);
            let (fs, cs) = nb(0, -1);
            out[k] = (ce * (fe - f0) - cw * (f0 - fw)) * ix2 + (cn * (fn_ - f0) - cs * (f0 - fs)) * iy2;
        }
    }
    out
}

/// Gradient of a Neumann scalar (mirror ghosts).
pub fn grad(f: &ScalarField) -> VectorField {
    grad_bc(f, Boundary::Mirror)
}

pub fn grad_bc(f: &ScalarField, bc: Boundary) -> VectorField {
    VectorField {
        grid: f.grid,
        x: ddx(&f.data, &f.grid, bc),
        y: ddy(&f.data, &f.grid, bc),
    }
}

/// Divergence of a no-slip vector field (anti-mirror ghosts).
pub fn div(v: &VectorField) -> ScalarField {
    div_bc(v, Boundary::AntiMirror)
}

pub fn div_bc(v: &VectorField, bc: Boundary) -> ScalarField {
    let ax = ddx(&v.x, &v.grid, bc);
    let ay = ddy(&v.y, &v.grid, bc);
    ScalarField {
        grid: v.grid,
        data: ax.iter().zip(&ay).map(|(a, b)| a + b).collect(),
    }
}

/// `div(v s)` where the ghosts of each factor follow its own rule.
pub fn div_product(v: &VectorField, vbc: Boundary, s: &ScalarField, sbc: Boundary) -> Result<ScalarField> {
    v.ensure_grid(&s.grid)?;
    let bc = vbc.product(sbc);
    let flux = if bc == Boundary::Extrapolate {
        // Products of extrapolated factors need their own ghosts; build them explicitly.
        return Ok(div_product_explicit(v, vbc, s, sbc));
    } else {
        VectorField {
            grid: v.grid,
            x: v.x.iter().zip(&s.data).map(|(a, b)| a * b).collect(),
            y: v.y.iter().zip(&s.data).map(|(a, b)| a * b).collect(),
        }
    };
    Ok(div_bc(&flux, bc))
}

fn div_product_explicit(v: &VectorField, vbc: Boundary, s: &ScalarField, sbc: Boundary) -> ScalarField {
    let g = v.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (hx, hy) = (0.5 / g.dx(), 0.5 / g.dy());
    let mut out = ScalarField::zeros(g);
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let px = |a: isize| ghost_value(&v.x, nx, ny, a, j, vbc) * ghost_value(&s.data, nx, ny, a, j, sbc);
            let py = |b: isize| ghost_value(&v.y, nx, ny, i, b, vbc) * ghost_value(&s.data, nx, ny, i, b, sbc);
            let val = (px(i + 1) - px(i - 1)) * hx + (py(j + 1) - py(j - 1)) * hy;
            out.set(i as usize, j as usize, val);
        }
    }
    out
}

/// Compact five-point Laplacian with homogeneous Neumann conditions.
pub fn laplace_neumann(f: &ScalarField) -> ScalarField {
    ScalarField {
        grid: f.grid,
        data: laplace_raw(&f.data, None, &f.grid, Boundary::Mirror),
    }
}

/// Componentwise compact Laplacian with no-slip ghosts.
pub fn laplace_noslip(v: &VectorField) -> VectorField {
    VectorField {
        grid: v.grid,
        x: laplace_raw(&v.x, None, &v.grid, Boundary::AntiMirror),
        y: laplace_raw(&v.y, None, &v.grid, Boundary::AntiMirror),
    }
}

/// Compact `div(c grad f)`.
pub fn div_coef_grad(f: &ScalarField, c: &ScalarField, bc: Boundary) -> Result<ScalarField> {
    f.ensure_grid(&c.grid)?;
    Ok(ScalarField {
        grid: f.grid,
        data: laplace_raw(&f.data, Some(&c.data), &f.grid, bc),
    })
}

/// Wide-stencil `div(grad p)` for a Neumann scalar; the pressure operator.
pub fn wide_laplace(p: &ScalarField) -> ScalarField {
    div(&grad(p))
}

/// `v . grad f` with central differences.
pub fn advective_derivative(v: &VectorField, f: &ScalarField, fbc: Boundary) -> Result<ScalarField> {
    v.ensure_grid(&f.grid)?;
    let g = grad_bc(f, fbc);
    Ok(ScalarField {
        grid: f.grid,
        data: (0..f.grid.len()).map(|k| v.x[k] * g.x[k] + v.y[k] * g.y[k]).collect(),
    })
}

/// Skew-symmetric transport `(v . grad f + div(v f)) / 2` for a no-slip `v`.
///
/// Satisfies `<skew(v, f), f> = 0` exactly whenever `fbc` is mirror or anti-mirror.
pub fn skew_advection(v: &VectorField, f: &ScalarField, fbc: Boundary) -> Result<ScalarField> {
    let a = advective_derivative(v, f, fbc)?;
    let b = div_product(v, Boundary::AntiMirror, f, fbc)?;
    Ok(a.zip_map(&b, |p, q| 0.5 * (p + q)))
}

/// Row-wise divergence of a cell-centered 2x2 tensor `[[xx, xy], [yx, yy]]`.
pub fn div_tensor(t: [&[f64]; 4], grid: &Grid2D, bc: Boundary) -> VectorField {
    let [xx, xy, yx, yy] = t;
    let a = ddx(xx, grid, bc);
    let b = ddy(xy, grid, bc);
    let c = ddx(yx, grid, bc);
    let d = ddy(yy, grid, bc);
    VectorField {
        grid: *grid,
        x: a.iter().zip(&b).map(|(p, q)| p + q).collect(),
        y: c.iter().zip(&d).map(|(p, q)| p + q).collect(),
    }
}

/// `sum over faces |grad f|^2 * cell area` for a Neumann scalar, equal to `-<lap f, f>`.
pub fn face_gradient_sq(f: &ScalarField) -> f64 {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (ix2, iy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let mut sx = 0.0;
    let mut sy = 0.0;
    for j in 0..ny {
        for i in 0..nx - 1 {
            let d = f.get(i + 1, j) - f.get(i, j);
            sx += d * d;
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            let d = f.get(i, j + 1) - f.get(i, j);
            sy += d * d;
        }
    }
    (sx * ix2 + sy * iy2) * g.cell_area()
}
