//! Manufactured-solution refinement studies.
//!
//! Forcings were derived by hand from the exact solutions below:
//!
//! * heat: `phi = exp(-t) cos(w x)`, `w = pi / lx`, so
//!   `S = phi_t - phi_xx = (w^2 - 1) phi`.
//! * Cahn-Hilliard: `phi = 0.5 cos(w x) exp(-t)`, `mu = -sigma phi_xx + Psi'(phi)`,
//!   `mu_xx = -sigma w^4 phi + Psi'''(phi) phi_x^2 + Psi''(phi) phi_xx`, so
//!   `S = phi_t - mu_xx = -phi + sigma w^4 phi - Psi''' phi_x^2 + Psi'' w^2 phi`
//!   with `Psi'' = theta / (1 - s^2) - theta0` and `Psi''' = 2 theta s / (1 - s^2)^2`.
//! * Stokes: stream function `s = A(x) B(y) exp(-t)`, `A = sin^2(pi x)`,
//!   `B = sin^2(pi y)` on the unit square, `u = (A B', -A' B) exp(-t)`, zero
//!   pressure, frozen `phi = 0.5 cos(pi x) cos(pi y)`. For solenoidal `u`,
//!   `div(nu D u) = nu lap(u) / 2 + (grad nu . (grad u + grad u^T)) / 2`, so
//!   `f = u_t + g u - nu lap(u) / 2 - (grad u + grad u^T) grad nu / 2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ConvergenceTable;
use crate::dynamics::{solve_cahn_hilliard, solve_momentum, ChInputs, MomentumInputs};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ops::cg::CgSettings;
use crate::ops::elliptic::solve_helmholtz_neumann_with;
use crate::ops::{Grid2D, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subproblem {
    Heat,
    CahnHilliard,
    Stokes,
}

impl std::str::FromStr for Subproblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Subproblem::Heat),
            "cahn_hilliard" | "ch" => Ok(Subproblem::CahnHilliard),
            "stokes" => Ok(Subproblem::Stokes),
            _ => Err(Error::InvalidParameter(format!(
                "unknown subproblem {s:?} (expected heat, cahn_hilliard or stokes)"
            ))),
        }
    }
}

const SCALAR_LX: f64 = 2.0;
const SCALAR_LY: f64 = 0.5;
const SCALAR_NY: usize = 8;

fn scalar_grid(n: usize) -> Result<Grid2D> {
    Grid2D::new(n, SCALAR_NY, SCALAR_LX, SCALAR_LY)
}

fn heat_exact(t: f64, x: f64) -> f64 {
    (-t).exp() * (PI * x / SCALAR_LX).cos()
}

fn ch_exact(t: f64, x: f64) -> f64 {
    0.5 * (PI * x / SCALAR_LX).cos() * (-t).exp()
}

fn ch_source(t: f64, x: f64, params: &ModelParams) -> f64 {
    let w = PI / SCALAR_LX;
    let (th, th0, sigma) = (params.potential.theta, params.potential.theta0, params.coeffs.sigma);
    let s = ch_exact(t, x);
    let sx = -0.5 * w * (w * x).sin() * (-t).exp();
    let q = 1.0 - s * s;
    let psi2 = th / q - th0;
    let psi3 = 2.0 * th * s / (q * q);
    -s + sigma * w.powi(4) * s - psi3 * sx * sx + psi2 * w * w * s
}

fn errors(num: &[f64], exact: &[f64], area: f64) -> (f64, f64) {
    let l2 = (num.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * area).sqrt();
    let inf = num.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (l2, inf)
}

/// Integrates a scalar subproblem to `t_end` with `steps` steps; returns the error.
fn run_scalar(sub: Subproblem, n: usize, t_end: f64, steps: usize, params: &ModelParams) -> Result<(f64, f64)> {
    let g = scalar_grid(n)?;
    let dt = t_end / steps as f64;
    let cg = CgSettings::default();
    let exact = |t: f64| match sub {
        Subproblem::Heat => ScalarField::from_fn(g, |x, _| heat_exact(t, x)),
        _ => ScalarField::from_fn(g, |x, _| ch_exact(t, x)),
    };
    let mut phi = exact(0.0);
    for k in 1..=steps {
        let t = k as f64 * dt;
        phi = match sub {
            Subproblem::Heat => {
                let w2 = (PI / SCALAR_LX).powi(2);
                let mut rhs = exact(t).map(|v| (w2 - 1.0) * v);
                rhs.add_scaled(1.0 / dt, &phi);
                solve_helmholtz_neumann_with(&rhs, 1.0, 1.0 / dt, &cg)?.0
            }
            _ => {
                let src = ScalarField::from_fn(g, |x, _| ch_source(t, x, params));
                let inp = ChInputs {
                    phi_old: &phi,
                    advect: None,
                    elastic: None,
                    source: Some(&src),
                    dt,
                    sigma: params.coeffs.sigma,
                    potential: params.potential,
                };
                solve_cahn_hilliard(&inp, 1e-10, 50, &cg)?.0
            }
        };
    }
    Ok(errors(&phi.data, &exact(t_end).data, g.cell_area()))
}

struct StokesExact {
    t: f64,
}

impl StokesExact {
    fn ab(x: f64) -> [f64; 4] {
        // sin^2(pi x) and its first three derivatives
        [
            (PI * x).sin().powi(2),
            PI * (2.0 * PI * x).sin(),
            2.0 * PI * PI * (2.0 * PI * x).cos(),
            -4.0 * PI.powi(3) * (2.0 * PI * x).sin(),
        ]
    }

    fn phi(x: f64, y: f64) -> f64 {
        0.5 * (PI * x).cos() * (PI * y).cos()
    }

    fn velocity(&self, x: f64, y: f64) -> (f64, f64) {
        let (a, b) = (Self::ab(x), Self::ab(y));
        let e = (-self.t).exp();
        (a[0] * b[1] * e, -a[1] * b[0] * e)
    }

    fn forcing(&self, x: f64, y: f64, params: &ModelParams) -> (f64, f64) {
        let c = &params.coeffs;
        let (a, b) = (Self::ab(x), Self::ab(y));
        let e = (-self.t).exp();
        let ux = a[0] * b[1] * e;
        let uy = -a[1] * b[0] * e;
        let (ux_x, ux_y) = (a[1] * b[1] * e, a[0] * b[2] * e);
        let (uy_x, uy_y) = (-a[2] * b[0] * e, -a[1] * b[1] * e);
        let lap_ux = (a[2] * b[1] + a[0] * b[3]) * e;
        let lap_uy = -(a[3] * b[0] + a[1] * b[2]) * e;
        let s = Self::phi(x, y);
        let nu = c.nu_of(s);
        let dnu = 0.5 * (c.nu1 - c.nu2);
        let nu_x = dnu * (-0.5 * PI * (PI * x).sin() * (PI * y).cos());
        let nu_y = dnu * (-0.5 * PI * (PI * x).cos() * (PI * y).sin());
        let drag = c.darcy_clamped(s);
        let fx = -ux + drag * ux - 0.5 * nu * lap_ux - 0.5 * (nu_x * 2.0 * ux_x + nu_y * (ux_y + uy_x));
        let fy = -uy + drag * uy - 0.5 * nu * lap_uy - 0.5 * (nu_x * (uy_x + ux_y) + nu_y * 2.0 * uy_y);
        (fx, fy)
    }
}

fn run_stokes(n: usize, t_end: f64, steps: usize, params: &ModelParams) -> Result<(f64, f64)> {
    let g = Grid2D::new(n, n, 1.0, 1.0)?;
    let dt = t_end / steps as f64;
    let cg = CgSettings::default();
    let phi = ScalarField::from_fn(g, StokesExact::phi);
    let mut u = VectorField::from_fn(g, |x, y| StokesExact { t: 0.0 }.velocity(x, y));
    for k in 1..=steps {
        let ex = StokesExact { t: k as f64 * dt };
        let f = VectorField::from_fn(g, |x, y| ex.forcing(x, y, params));
        let inp = MomentumInputs {
            u_old: &u,
            advecting: None,
            nu_arg: &phi,
            darcy_arg: &phi,
            forcing: &f,
            dt,
        };
        u = solve_momentum(&inp, &params.coeffs, 5, 1e-12, &cg)?.0;
    }
    let ex = VectorField::from_fn(g, |x, y| StokesExact { t: t_end }.velocity(x, y));
    let num: Vec<f64> = u.x.iter().chain(&u.y).copied().collect();
    let exact: Vec<f64> = ex.x.iter().chain(&ex.y).copied().collect();
    Ok(errors(&num, &exact, g.cell_area()))
}

/// Spatial refinement with `dt` proportional to `h^2`, so the first-order
/// time error decays at the same rate as the second-order space error.
pub fn manufactured_solution_study(sub: Subproblem, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 levels, got {levels}")));
    }
    let params = ModelParams::default();
    let mut h = Vec::new();
    let mut e2 = Vec::new();
    let mut ei = Vec::new();
    for l in 0..levels {
        let n = 16usize << l;
        let (hh, err) = match sub {
            Subproblem::Stokes => {
                let hh = 1.0 / n as f64;
                let t_end = 0.02;
                let steps = (t_end / (0.25 * hh * hh)).ceil() as usize;
                (hh, run_stokes(n, t_end, steps, &params)?)
            }
            _ => {
                let hh = SCALAR_LX / n as f64;
                let t_end = 0.1;
                let steps = (t_end / (0.25 * hh * hh)).ceil() as usize;
                (hh, run_scalar(sub, n, t_end, steps, &params)?)
            }
        };
        h.push(hh);
        e2.push(err.0);
        ei.push(err.1);
    }
    ConvergenceTable::new(format!("{sub:?} spatial"), h, e2, ei)
}

/// Time-step refinement on a fixed fine grid.
pub fn manufactured_temporal_study(sub: Subproblem, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 levels, got {levels}")));
    }
    let params = ModelParams::default();
    let t_end = 0.5;
    let mut h = Vec::new();
    let mut e2 = Vec::new();
    let mut ei = Vec::new();
    for l in 0..levels {
        let steps = 10usize << l;
        let err = match sub {
            Subproblem::Stokes => run_stokes(32, t_end, steps, &params)?,
            _ => run_scalar(sub, 256, t_end, steps, &params)?,
        };
        h.push(t_end / steps as f64);
        e2.push(err.0);
        ei.push(err.1);
    }
    ConvergenceTable::new(format!("{sub:?} temporal"), h, e2, ei)
}
