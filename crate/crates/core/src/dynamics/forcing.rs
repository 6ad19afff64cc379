//! Chemical potential and the interfacial/elastic body force.

use crate::error::Result;
use crate::model::{psi_xi, Coefficient, ModelParams, PotentialParams};
use crate::ops::diff::{ddx, ddy, div_bc, div_tensor, grad_bc, laplace_neumann};
use crate::ops::{Boundary, ScalarField, VectorField};

/// Ghost rule for the transported potential: it carries no boundary condition.
pub const PSI_BC: Boundary = Boundary::Extrapolate;

/// `|grad psi|^2 = |grad psi_x|^2 + |grad psi_y|^2`, central differences.
pub fn elastic_density(psi: &VectorField) -> ScalarField {
    let a = grad_bc(&psi.component(0), PSI_BC);
    let b = grad_bc(&psi.component(1), PSI_BC);
    ScalarField {
        grid: psi.grid,
        data: (0..psi.grid.len())
            .map(|k| a.x[k] * a.x[k] + a.y[k] * a.y[k] + b.x[k] * b.x[k] + b.y[k] * b.y[k])
            .collect(),
    }
}

/// `mu = -sigma lap(phi) + Psi_xi'(phi) + lambda'(phi) / 2 |grad psi|^2`.
pub fn chemical_potential(phi: &ScalarField, psi: &VectorField, params: &ModelParams) -> Result<ScalarField> {
    chemical_potential_with(phi, psi, params.coeffs.sigma, &params.potential, &params.coeffs.lambda)
}

pub fn chemical_potential_with(
    phi: &ScalarField,
    psi: &VectorField,
    sigma: f64,
    potential: &PotentialParams,
    lambda: &dyn Coefficient,
) -> Result<ScalarField> {
    psi.ensure_grid(&phi.grid)?;
    let lap = laplace_neumann(phi);
    let e = elastic_density(psi);
    Ok(ScalarField {
        grid: phi.grid,
        data: (0..phi.grid.len())
            .map(|k| {
                let s = phi.data[k];
                -sigma * lap.data[k] + psi_xi(s, potential, 1) + 0.5 * lambda.derivative(s) * e.data[k]
            })
            .collect(),
    })
}

/// Which expression of the capillary and elastic stresses drives the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingForm {
    /// `mu grad phi - grad psi^T div(lambda grad psi)`.
    Potential,
    /// `-div(lambda grad psi^T grad psi) - sigma div(grad phi (x) grad phi)`.
    Divergence,
}

pub fn momentum_forcing(
    phi: &ScalarField,
    mu: &ScalarField,
    psi: &VectorField,
    params: &ModelParams,
    form: ForcingForm,
) -> Result<VectorField> {
    momentum_forcing_with(phi, mu, psi, params.coeffs.sigma, &params.coeffs.lambda, form)
}

pub fn momentum_forcing_with(
    phi: &ScalarField,
    mu: &ScalarField,
    psi: &VectorField,
    sigma: f64,
    lambda: &dyn Coefficient,
    form: ForcingForm,
) -> Result<VectorField> {
    phi.ensure_grid(&mu.grid)?;
    psi.ensure_grid(&phi.grid)?;
    let g = phi.grid;
    let n = g.len();
    let lam: Vec<f64> = phi.data.iter().map(|&s| lambda.value(s)).collect();
    let gphi = grad_bc(phi, Boundary::Mirror);
    let gpsi = [grad_bc(&psi.component(0), PSI_BC), grad_bc(&psi.component(1), PSI_BC)];
    match form {
        ForcingForm::Potential => {
            let mut f = VectorField {
                grid: g,
                x: (0..n).map(|k| mu.data[k] * gphi.x[k]).collect(),
                y: (0..n).map(|k| mu.data[k] * gphi.y[k]).collect(),
            };
            for gp in &gpsi {
                let flux = VectorField {
                    grid: g,
                    x: (0..n).map(|k| lam[k] * gp.x[k]).collect(),
                    y: (0..n).map(|k| lam[k] * gp.y[k]).collect(),
                };
                let w = div_bc(&flux, PSI_BC);
                for k in 0..n {
                    f.x[k] -= w.data[k] * gp.x[k];
                    f.y[k] -= w.data[k] * gp.y[k];
                }
            }
            Ok(f)
        }
        ForcingForm::Divergence => {
            let mut t = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            for k in 0..n {
                let (px, py) = (gphi.x[k], gphi.y[k]);
                let mut txx = sigma * px * px;
                let mut txy = sigma * px * py;
                let mut tyy = sigma * py * py;
                for gp in &gpsi {
                    txx += lam[k] * gp.x[k] * gp.x[k];
                    txy += lam[k] * gp.x[k] * gp.y[k];
                    tyy += lam[k] * gp.y[k] * gp.y[k];
                }
                t[0][k] = txx;
                t[1][k] = txy;
                t[2][k] = txy;
                t[3][k] = tyy;
            }
            let d = div_tensor([&t[0], &t[1], &t[2], &t[3]], &g, PSI_BC);
            Ok(d.scaled(-1.0))
        }
    }
}

/// `sum_c (u . grad) u_c` split skew-symmetrically: `((a . grad) u + div(a (x) u)) / 2`.
pub fn skew_convection(a: &VectorField, u: &VectorField) -> Result<VectorField> {
    a.ensure_grid(&u.grid)?;
    let g = u.grid;
    let bc = Boundary::AntiMirror;
    let mut out = VectorField::zeros(g);
    for c in 0..2 {
        let uc = u.component(c);
        let adv = ddx(&uc.data, &g, bc);
        let adv_y = ddy(&uc.data, &g, bc);
        let flux = VectorField {
            grid: g,
            x: a.x.iter().zip(&uc.data).map(|(p, q)| p * q).collect(),
            y: a.y.iter().zip(&uc.data).map(|(p, q)| p * q).collect(),
        };
        let cons = div_bc(&flux, bc.product(bc));
        let dst = if c == 0 { &mut out.x } else { &mut out.y };
        for k in 0..g.len() {
            dst[k] = 0.5 * (a.x[k] * adv[k] + a.y[k] * adv_y[k] + cons.data[k]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::psi_prime;
    use crate::ops::{project, Grid2D};
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn constant_phase_gives_uniform_mu() {
        let g = Grid2D::new(12, 12, 1.0, 1.0).unwrap();
        let phi = ScalarField::constant(g, 0.3);
        let psi = VectorField::constant(g, 1.0, 2.0);
        let mu = chemical_potential(&phi, &psi, &params()).unwrap();
        let expect = psi_prime(0.3, &params().potential).unwrap();
        assert!(mu.data.iter().all(|v| (v - expect).abs() < 1e-14));
        for form in [ForcingForm::Potential, ForcingForm::Divergence] {
            let f = momentum_forcing(&phi, &mu, &psi, &params(), form).unwrap();
            assert!(f.max_abs() < 1e-13);
        }
    }

    #[test]
    fn elastic_part_of_mu() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let phi = ScalarField::zeros(g);
        let psi = VectorField::from_fn(g, |x, y| (x * x, x * y));
        let mu = chemical_potential(&phi, &psi, &params()).unwrap();
        let lp = params().coeffs.lambda_prime_of(0.0);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = (g.x(i), g.y(j));
                // quadratics are differentiated exactly, ghosts included
                let direct = 0.5 * lp * (4.0 * x * x + y * y + x * x);
                assert!((mu.get(i, j) - direct).abs() < 1e-10);
            }
        }
    }

    fn coh_ela_energy(phi: &ScalarField, psi: &VectorField, p: &ModelParams) -> f64 {
        let e = elastic_density(psi);
        let bulk: f64 = (0..phi.grid.len())
            .map(|k| psi_xi(phi.data[k], &p.potential, 0) + 0.5 * p.coeffs.lambda_of(phi.data[k]) * e.data[k])
            .sum::<f64>()
            * phi.grid.cell_area();
        bulk + 0.5 * p.coeffs.sigma * crate::ops::diff::face_gradient_sq(phi)
    }

    #[test]
    fn mu_is_variational_derivative() {
        let g = Grid2D::new(16, 12, 1.0, 0.8).unwrap();
        let p = params();
        let phi = ScalarField::from_fn(g, |x, y| 0.4 * (PI * x).cos() * (PI * y / 0.8).cos() + 0.1);
        let psi = VectorField::from_fn(g, |x, y| (y + 0.2 * (2.0 * x).sin(), -x + 0.1 * x * y));
        let mu = chemical_potential(&phi, &psi, &p).unwrap();
        let delta = ScalarField::from_fn(g, |x, y| (-((x - 0.4).powi(2) + (y - 0.5).powi(2)) / 0.02).exp());
        let h = 1e-5;
        let mut plus = phi.clone();
        plus.add_scaled(h, &delta);
        let mut minus = phi.clone();
        minus.add_scaled(-h, &delta);
        let fd = (coh_ela_energy(&plus, &psi, &p) - coh_ela_energy(&minus, &psi, &p)) / (2.0 * h);
        let an = mu.dot(&delta);
        assert!((fd - an).abs() <= 1e-4 * an.abs(), "{fd} vs {an}");
    }

    fn form_gap(n: usize) -> f64 {
        let g = Grid2D::new(n, n, 1.0, 1.0).unwrap();
        let p = params();
        let phi = ScalarField::from_fn(g, |x, y| 0.5 * (PI * x).cos() * (PI * y).cos());
        let psi = VectorField::from_fn(g, |x, y| (y + 0.1 * (PI * x).sin(), -x + 0.1 * (PI * y).cos()));
        let mu = chemical_potential(&phi, &psi, &p).unwrap();
        let a = momentum_forcing(&phi, &mu, &psi, &p, ForcingForm::Potential).unwrap();
        let b = momentum_forcing(&phi, &mu, &psi, &p, ForcingForm::Divergence).unwrap();
        let mut d = a.clone();
        d.add_scaled(-1.0, &b);
        project(&d, 1.0).unwrap().0.norm_l2() / a.norm_l2()
    }

    #[test]
    fn forcing_forms_differ_by_a_gradient() {
        let gaps: Vec<f64> = [16, 32, 64].iter().map(|&n| form_gap(n)).collect();
        assert!(gaps[2] < 0.02, "{gaps:?}");
        assert!(gaps[0] / gaps[1] > 3.0 && gaps[1] / gaps[2] > 3.0, "{gaps:?}");
    }

    #[test]
    fn one_dimensional_capillary_reduction() {
        // phi = phi(x), psi constant: mu phi_x = -sigma (phi_x^2)_x + (Psi(phi) + sigma phi_x^2 / 2)_x
        let mut errs = Vec::new();
        for n in [64, 128, 256] {
            let g = Grid2D::new(n, 8, 2.0, 0.5).unwrap();
            let p = params();
            let w = 0.2;
            let prof = |x: f64| 0.8 * ((x - 1.0) / w).tanh();
            let phi = ScalarField::from_fn(g, |x, _| prof(x));
            let psi = VectorField::constant(g, 0.0, 0.0);
            let mu = chemical_potential(&phi, &psi, &p).unwrap();
            let f = momentum_forcing(&phi, &mu, &psi, &p, ForcingForm::Potential).unwrap();
            // analytic: phi' = 0.8 sech^2 / w, phi'' = -2 tanh phi' / w
            let mut e: f64 = 0.0;
            for i in 4..n - 4 {
                let x = g.x(i);
                let t = ((x - 1.0) / w).tanh();
                let d1 = 0.8 * (1.0 - t * t) / w;
                let d2 = -2.0 * t * d1 / w;
                let s = prof(x);
                let exact = (-p.coeffs.sigma * d2 + psi_prime(s, &p.potential).unwrap()) * d1;
                e = e.max((f.x[g.idx(i, 3)] - exact).abs());
                assert!(f.y[g.idx(i, 3)].abs() < 1e-12);
            }
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }
}
