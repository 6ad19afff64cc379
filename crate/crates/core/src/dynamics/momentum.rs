//! Momentum sub-step: implicit viscous and Darcy terms, explicit convection
//! and body force, then the pressure projection.
//!
//! `div(nu D u) = div(nu grad u) / 2 + div(nu grad u^T) / 2`; the first half
//! is implicit (componentwise, symmetric positive definite), the transposed
//! half is lagged and refreshed by Picard sweeps.

use super::forcing::skew_convection;
use crate::error::Result;
use crate::model::CoefficientParams;
use crate::ops::cg::CgSettings;
use crate::ops::diff::{div_tensor, grad_bc};
use crate::ops::elliptic::{project_with, solve_variable_noslip};
use crate::ops::{Boundary, ScalarField, VectorField};

pub struct MomentumInputs<'a> {
    pub u_old: &'a VectorField,
    /// Advecting velocity of the convection term; `None` drops convection.
    pub advecting: Option<&'a VectorField>,
    /// Phase argument of the viscosity.
    pub nu_arg: &'a ScalarField,
    /// Phase argument of the Darcy friction.
    pub darcy_arg: &'a ScalarField,
    pub forcing: &'a VectorField,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentumReport {
    pub picard_sweeps: usize,
    /// Relative change of the intermediate velocity in the last sweep.
    pub picard_change: f64,
    pub linear_iterations: usize,
}

/// `div(nu grad u^T) / 2`.
pub fn transposed_viscous(nu: &[f64], u: &VectorField) -> VectorField {
    let g = u.grid;
    let gx = grad_bc(&u.component(0), Boundary::AntiMirror);
    let gy = grad_bc(&u.component(1), Boundary::AntiMirror);
    let n = g.len();
    let txx: Vec<f64> = (0..n).map(|k| nu[k] * gx.x[k]).collect();
    let txy: Vec<f64> = (0..n).map(|k| nu[k] * gy.x[k]).collect();
    let tyx: Vec<f64> = (0..n).map(|k| nu[k] * gx.y[k]).collect();
    let tyy: Vec<f64> = (0..n).map(|k| nu[k] * gy.y[k]).collect();
    div_tensor([&txx, &txy, &tyx, &tyy], &g, Boundary::Extrapolate).scaled(0.5)
}

/// Returns the projected velocity and the pressure.
pub fn solve_momentum(
    inp: &MomentumInputs,
    coeffs: &CoefficientParams,
    picard_max: usize,
    picard_tol: f64,
    cg: &CgSettings,
) -> Result<(VectorField, ScalarField, MomentumReport)> {
    let g = inp.u_old.grid;
    inp.forcing.ensure_grid(&g)?;
    inp.nu_arg.ensure_grid(&g)?;
    inp.darcy_arg.ensure_grid(&g)?;
    let dt = inp.dt;
    let nu: Vec<f64> = inp.nu_arg.data.iter().map(|&s| coeffs.nu_of(s)).collect();
    let c0 = ScalarField {
        grid: g,
        data: inp.darcy_arg.data.iter().map(|&s| 1.0 / dt + coeffs.darcy_clamped(s)).collect(),
    };
    let kappa = ScalarField {
        grid: g,
        data: nu.iter().map(|v| 0.5 * v).collect(),
    };
    let mut explicit = inp.u_old.scaled(1.0 / dt);
    explicit.add_scaled(1.0, inp.forcing);
    if let Some(a) = inp.advecting {
        explicit.add_scaled(-1.0, &skew_convection(a, inp.u_old)?);
    }

    let mut report = MomentumReport::default();
    let mut lagged = inp.u_old.clone();
    let mut ustar = inp.u_old.clone();
    for sweep in 1..=picard_max.max(1) {
        let mut rhs = explicit.clone();
        rhs.add_scaled(1.0, &transposed_viscous(&nu, &lagged));
        let (a, sa) = solve_variable_noslip(&rhs.component(0), &c0, &kappa, Some(&ustar.component(0)), cg)?;
        let (b, sb) = solve_variable_noslip(&rhs.component(1), &c0, &kappa, Some(&ustar.component(1)), cg)?;
        report.linear_iterations += sa.iterations + sb.iterations;
        ustar = VectorField::from_components(a, b)?;
        let mut d = ustar.clone();
        d.add_scaled(-1.0, &lagged);
        let scale = ustar.norm_l2();
        report.picard_change = if scale > 0.0 { d.norm_l2() / scale } else { 0.0 };
        report.picard_sweeps = sweep;
        lagged = ustar.clone();
        if report.picard_change <= picard_tol {
            break;
        }
    }
    let (u, pi, st) = project_with(&ustar, dt, cg)?;
    report.linear_iterations += st.iterations;
    Ok((u, pi, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{div, Grid2D};

    #[test]
    fn rest_state_stays_at_rest() {
        let g = Grid2D::new(12, 12, 1.0, 1.0).unwrap();
        let u = VectorField::zeros(g);
        let phi = ScalarField::constant(g, 0.2);
        let f = VectorField::zeros(g);
        let inp = MomentumInputs {
            u_old: &u,
            advecting: Some(&u),
            nu_arg: &phi,
            darcy_arg: &phi,
            forcing: &f,
            dt: 0.01,
        };
        let (v, pi, _) = solve_momentum(&inp, &CoefficientParams::default(), 5, 1e-10, &CgSettings::default()).unwrap();
        assert_eq!(v.max_abs(), 0.0);
        assert_eq!(pi.max_abs(), 0.0);
    }

    #[test]
    fn gradient_forcing_is_absorbed_by_pressure() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let u = VectorField::zeros(g);
        let phi = ScalarField::constant(g, 1.0);
        let q = ScalarField::from_fn(g, |x, y| x * x * y);
        let f = crate::ops::grad(&q);
        let inp = MomentumInputs {
            u_old: &u,
            advecting: None,
            nu_arg: &phi,
            darcy_arg: &phi,
            forcing: &f,
            dt: 0.01,
        };
        let (v, _, _) = solve_momentum(&inp, &CoefficientParams::default(), 5, 1e-10, &CgSettings::default()).unwrap();
        // no-slip on the intermediate velocity leaves a wall layer of width
        // ~ sqrt(nu dt); the bulk of the gradient is removed
        assert!(v.norm_l2() < 0.25 * f.norm_l2() * 0.01);
        assert!(div(&v).norm_l2() < 1e-8 * f.norm_l2());
    }
}
