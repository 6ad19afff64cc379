//! Passive transport of the elastic vector potential.
//!
//! The default scheme follows characteristics backwards one step (RK2
//! midpoint) and interpolates bilinearly at the departure points. The
//! interpolation is a convex combination of grid values, so the max norm of
//! each component never grows.

use crate::error::{Error, Result};
use crate::ops::field::ghost_value;
use crate::ops::{Boundary, Grid2D, ScalarField, VectorField};

/// Departure points of the cell centers for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMapStep {
    pub grid: Grid2D,
    pub dt: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Bilinear interpolation of a velocity component with no-slip ghosts; the
/// point may lie anywhere in the closed domain.
fn interp_velocity(data: &[f64], g: &Grid2D, px: f64, py: f64) -> f64 {
    let a = (px / g.dx() - 0.5).clamp(-0.5, g.nx as f64 - 0.5);
    let b = (py / g.dy() - 0.5).clamp(-0.5, g.ny as f64 - 0.5);
    let (i0, j0) = (a.floor(), b.floor());
    let (fx, fy) = (a - i0, b - j0);
    let (i0, j0) = (i0 as isize, j0 as isize);
    let at = |i: isize, j: isize| ghost_value(data, g.nx, g.ny, i, j, Boundary::AntiMirror);
    (1.0 - fy) * ((1.0 - fx) * at(i0, j0) + fx * at(i0 + 1, j0)) + fy * ((1.0 - fx) * at(i0, j0 + 1) + fx * at(i0 + 1, j0 + 1))
}

fn clamp_point(g: &Grid2D, px: f64, py: f64) -> (f64, f64) {
    (px.clamp(0.0, g.lx), py.clamp(0.0, g.ly))
}

fn backtrack_point(u: &VectorField, dt: f64, px: f64, py: f64) -> (f64, f64) {
    let g = &u.grid;
    let (ux, uy) = (interp_velocity(&u.x, g, px, py), interp_velocity(&u.y, g, px, py));
    let (mx, my) = clamp_point(g, px - 0.5 * dt * ux, py - 0.5 * dt * uy);
    let (vx, vy) = (interp_velocity(&u.x, g, mx, my), interp_velocity(&u.y, g, mx, my));
    clamp_point(g, px - dt * vx, py - dt * vy)
}

/// RK2 backward integration of `dX/ds = u(X)` over one step from every cell center.
pub fn backtrack(u: &VectorField, dt: f64) -> Result<FlowMapStep> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("backtrack needs dt > 0, got {dt}")));
    }
    if !u.is_finite() {
        return Err(Error::InvalidParameter("velocity has non-finite values".into()));
    }
    let g = u.grid;
    let mut x = Vec::with_capacity(g.len());
    let mut y = Vec::with_capacity(g.len());
    for j in 0..g.ny {
        for i in 0..g.nx {
            let (px, py) = backtrack_point(u, dt, g.x(i), g.y(j));
            x.push(px);
            y.push(py);
        }
    }
    Ok(FlowMapStep { grid: g, dt, x, y })
}

/// Bilinear interpolation with the fractional index clamped to the interior
/// cell range, so only interior values enter with nonnegative weights.
pub fn interp_scalar(data: &[f64], g: &Grid2D, px: f64, py: f64) -> f64 {
    let a = (px / g.dx() - 0.5).clamp(0.0, (g.nx - 1) as f64);
    let b = (py / g.dy() - 0.5).clamp(0.0, (g.ny - 1) as f64);
    let i0 = (a.floor() as usize).min(g.nx - 2);
    let j0 = (b.floor() as usize).min(g.ny - 2);
    let (fx, fy) = (a - i0 as f64, b - j0 as f64);
    let v00 = data[j0 * g.nx + i0];
    let v10 = data[j0 * g.nx + i0 + 1];
    let v01 = data[(j0 + 1) * g.nx + i0];
    let v11 = data[(j0 + 1) * g.nx + i0 + 1];
    let v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
    // Rounding in the weights must not create new extrema.
    let lo = v00.min(v10).min(v01).min(v11);
    let hi = v00.max(v10).max(v01).max(v11);
    v.clamp(lo, hi)
}

/// `psi(x)` at the new time is `psi(X)` at the old time.
pub fn advect_psi(psi: &VectorField, map: &FlowMapStep) -> Result<VectorField> {
    psi.ensure_grid(&map.grid)?;
    let g = psi.grid;
    let mut out = VectorField::zeros(g);
    for k in 0..g.len() {
        let (px, py) = (map.x[k], map.y[k]);
        out.x[k] = interp_scalar(&psi.x, &g, px, py);
        out.y[k] = interp_scalar(&psi.y, &g, px, py);
    }
    Ok(out)
}

/// Largest `dt * |u_c| / h_c` over cells and directions.
pub fn courant_number(u: &VectorField, dt: f64) -> f64 {
    let g = u.grid;
    let cx = u.x.iter().fold(0.0f64, |m, v| m.max(v.abs())) / g.dx();
    let cy = u.y.iter().fold(0.0f64, |m, v| m.max(v.abs())) / g.dy();
    dt * cx.max(cy)
}

pub const EULERIAN_CFL_LIMIT: f64 = 0.5;

/// First-order upwind step of `psi_t + u . grad psi = 0`, written as a convex
/// combination of the cell and its upwind neighbours.
pub fn advect_psi_eulerian(psi: &VectorField, u: &VectorField, dt: f64) -> Result<VectorField> {
    psi.ensure_grid(&u.grid)?;
    let courant = courant_number(u, dt);
    if courant > EULERIAN_CFL_LIMIT {
        return Err(Error::Cfl {
            courant,
            limit: EULERIAN_CFL_LIMIT,
        });
    }
    let g = psi.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let (rx, ry) = (dt / g.dx(), dt / g.dy());
    let update = |f: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        for j in 0..ny {
            for i in 0..nx {
                let k = g.idx(i as usize, j as usize);
                let (ux, uy) = (u.x[k], u.y[k]);
                let cx = rx * ux.abs();
                let cy = ry * uy.abs();
                let up_x = ghost_value(f, g.nx, g.ny, if ux > 0.0 { i - 1 } else { i + 1 }, j, Boundary::Mirror);
                let up_y = ghost_value(f, g.nx, g.ny, i, if uy > 0.0 { j - 1 } else { j + 1 }, Boundary::Mirror);
                out[k] = f[k] + cx * (up_x - f[k]) + cy * (up_y - f[k]);
            }
        }
        out
    };
    Ok(VectorField {
        grid: g,
        x: update(&psi.x),
        y: update(&psi.y),
    })
}

/// Range of the discrete Jacobian determinant of the departure map over
/// interior cells (central differences of departure coordinates).
pub fn jacobian_range(map: &FlowMapStep) -> (f64, f64) {
    let g = map.grid;
    let (hx, hy) = (2.0 * g.dx(), 2.0 * g.dy());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let e = g.idx(i + 1, j);
            let w = g.idx(i - 1, j);
            let n = g.idx(i, j + 1);
            let s = g.idx(i, j - 1);
            let xx = (map.x[e] - map.x[w]) / hx;
            let xy = (map.x[n] - map.x[s]) / hy;
            let yx = (map.y[e] - map.y[w]) / hx;
            let yy = (map.y[n] - map.y[s]) / hy;
            let det = xx * yy - xy * yx;
            lo = lo.min(det);
            hi = hi.max(det);
        }
    }
    (lo, hi)
}

/// Largest entry of the central velocity gradient, a Lipschitz estimate.
pub fn velocity_lipschitz(u: &VectorField) -> f64 {
    let gx = crate::ops::diff::grad_bc(&u.component(0), Boundary::AntiMirror);
    let gy = crate::ops::diff::grad_bc(&u.component(1), Boundary::AntiMirror);
    gx.max_abs().max(gy.max_abs())
}

/// Departure-map monitoring: logs the Jacobian range against the bound
/// `exp(+-dt Lip(u))` and returns `(min det, max det, bound)`.
pub fn monitor_jacobian(u: &VectorField, map: &FlowMapStep) -> (f64, f64, f64) {
    let (lo, hi) = jacobian_range(map);
    let lip = velocity_lipschitz(u);
    let bound = (2.0 * map.dt * lip).exp();
    if lo < 1.0 / bound || hi > bound {
        log::debug!("departure Jacobian in [{lo:.6}, {hi:.6}] outside [{:.6}, {bound:.6}]", 1.0 / bound);
    }
    (lo, hi, bound)
}

/// Scalar counterpart of [`advect_psi`], used for diagnostics and tests.
pub fn advect_scalar(f: &ScalarField, map: &FlowMapStep) -> Result<ScalarField> {
    f.ensure_grid(&map.grid)?;
    let g = f.grid;
    Ok(ScalarField {
        grid: g,
        data: (0..g.len()).map(|k| interp_scalar(&f.data, &g, map.x[k], map.y[k])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::project;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid2D {
        Grid2D::new(32, 32, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_velocity_is_identity() {
        let g = grid();
        let u = VectorField::zeros(g);
        let map = backtrack(&u, 0.1).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                assert_eq!(map.x[g.idx(i, j)], g.x(i));
                assert_eq!(map.y[g.idx(i, j)], g.y(j));
            }
        }
        let psi = VectorField::from_fn(g, |x, y| (x.sin(), (3.0 * y).cos()));
        assert_eq!(advect_psi(&psi, &map).unwrap(), psi);
        assert_eq!(advect_psi_eulerian(&psi, &u, 0.1).unwrap(), psi);
    }

    #[test]
    fn uniform_velocity_shifts() {
        let g = grid();
        let u = VectorField::constant(g, 0.3, -0.2);
        let dt = 0.05;
        let map = backtrack(&u, dt).unwrap();
        // interior cells away from the anti-mirror ghost layer
        for j in 4..g.ny - 4 {
            for i in 4..g.nx - 4 {
                let k = g.idx(i, j);
                assert!((map.x[k] - (g.x(i) - dt * 0.3)).abs() < 1e-14);
                assert!((map.y[k] - (g.y(j) + dt * 0.2)).abs() < 1e-14);
            }
        }
        let psi = VectorField::from_fn(g, |x, y| ((2.0 * x).sin(), (x * y).cos()));
        let out = advect_psi(&psi, &map).unwrap();
        for j in 4..g.ny - 4 {
            for i in 4..g.nx - 4 {
                let k = g.idx(i, j);
                let (x, y) = (g.x(i) - dt * 0.3, g.y(j) + dt * 0.2);
                // bilinear error <= h^2/8 * |D^2 psi| with |D^2| <= 4
                let h2 = g.dx() * g.dx();
                assert!((out.x[k] - (2.0 * x).sin()).abs() <= 0.5 * h2 * 4.0);
                assert!((out.y[k] - (x * y).cos()).abs() <= 0.5 * h2 * 4.0);
            }
        }
    }

    #[test]
    fn rotation_preserves_radius() {
        let g = grid();
        let w = 1.0;
        let u = VectorField::from_fn(g, |x, y| (-w * (y - 0.5), w * (x - 0.5)));
        let dt = 0.01;
        let map = backtrack(&u, dt).unwrap();
        for j in 8..g.ny - 8 {
            for i in 8..g.nx - 8 {
                let k = g.idx(i, j);
                let (x, y) = (g.x(i) - 0.5, g.y(j) - 0.5);
                let (c, s) = ((w * dt).cos(), (w * dt).sin());
                let (ex, ey) = (c * x + s * y, -s * x + c * y);
                let err = ((map.x[k] - 0.5 - ex).powi(2) + (map.y[k] - 0.5 - ey).powi(2)).sqrt();
                assert!(err <= (w * dt).powi(3) * (x * x + y * y).sqrt(), "{err}");
            }
        }
    }

    #[test]
    fn backtrack_is_reversible_to_third_order() {
        let g = grid();
        let u = VectorField::from_fn(g, |x, y| {
            let p = std::f64::consts::PI;
            ((p * x).sin() * (2.0 * p * y).sin(), -(2.0 * p * x).sin() * (p * y).sin())
        });
        let neg = u.scaled(-1.0);
        let mut errs = Vec::new();
        for dt in [0.02, 0.01] {
            let map = backtrack(&u, dt).unwrap();
            let mut e: f64 = 0.0;
            for j in 6..g.ny - 6 {
                for i in 6..g.nx - 6 {
                    let k = g.idx(i, j);
                    let (bx, by) = backtrack_point(&neg, dt, map.x[k], map.y[k]);
                    e = e.max(((bx - g.x(i)).powi(2) + (by - g.y(j)).powi(2)).sqrt());
                }
            }
            errs.push(e);
        }
        assert!(errs[0] < 1e-3);
        assert!(errs[0] / errs[1] > 5.0, "{errs:?}");
    }

    #[test]
    fn max_principle_random() {
        let g = Grid2D::new(16, 12, 1.0, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let raw = VectorField::from_fn(g, |_, _| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)));
            let u = project(&raw, 1.0).unwrap().0;
            let psi = VectorField::from_fn(g, |_, _| (rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0)));
            let out = advect_psi(&psi, &backtrack(&u, 0.2).unwrap()).unwrap();
            for c in 0..2 {
                assert!(out.component(c).max_abs() <= psi.component(c).max_abs());
            }
            let dt = 0.4 / (courant_number(&u, 1.0) + 1e-12);
            let e = advect_psi_eulerian(&psi, &u, dt).unwrap();
            for c in 0..2 {
                assert!(e.component(c).max_abs() <= psi.component(c).max_abs() * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn eulerian_cfl_and_constants() {
        let g = grid();
        let u = VectorField::constant(g, 1.0, 0.5);
        let psi = VectorField::constant(g, 2.0, -1.0);
        let out = advect_psi_eulerian(&psi, &u, 0.01).unwrap();
        assert!(out.x.iter().all(|&v| v == 2.0));
        assert!(out.y.iter().all(|&v| v == -1.0));
        assert!(matches!(advect_psi_eulerian(&psi, &u, 0.1), Err(Error::Cfl { .. })));
    }

    #[test]
    fn schemes_agree_on_smooth_data() {
        let p = std::f64::consts::PI;
        let mut diffs = Vec::new();
        for n in [32, 64] {
            let g = Grid2D::new(n, n, 1.0, 1.0).unwrap();
            let u = VectorField::from_fn(g, |x, y| {
                ((p * x).sin().powi(2) * (2.0 * p * y).sin(), -(2.0 * p * x).sin() * (p * y).sin().powi(2))
            });
            let psi0 = VectorField::from_fn(g, |x, y| ((p * x).cos() * y, (p * y).sin() + x));
            let dt = 0.25 * g.dx();
            let map = backtrack(&u, dt).unwrap();
            let (mut a, mut b) = (psi0.clone(), psi0.clone());
            for _ in 0..10 {
                a = advect_psi(&a, &map).unwrap();
                b = advect_psi_eulerian(&b, &u, dt).unwrap();
            }
            let mut d = a.clone();
            d.add_scaled(-1.0, &b);
            diffs.push(d.norm_l2());
        }
        // O(dt + dx) with dt proportional to dx
        assert!(diffs[1] < diffs[0], "{diffs:?}");
        assert!(diffs[0] < 0.05, "{diffs:?}");
    }

    #[test]
    fn jacobian_near_one_for_divergence_free_flow() {
        let g = grid();
        let p = std::f64::consts::PI;
        let u = VectorField::from_fn(g, |x, y| {
            ((p * x).sin().powi(2) * (2.0 * p * y).sin(), -(2.0 * p * x).sin() * (p * y).sin().powi(2))
        });
        let map = backtrack(&u, 0.01).unwrap();
        let (lo, hi, bound) = monitor_jacobian(&u, &map);
        assert!(lo > 0.9 && hi < 1.1 && bound > 1.0);
    }
}
