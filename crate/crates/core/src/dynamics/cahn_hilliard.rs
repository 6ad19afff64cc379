//! Implicit Cahn-Hilliard sub-step with convex splitting.
//!
//! Unknown `phi`; `mu` is eliminated as
//! `mu(phi) = -sigma lap(phi) + F_xi'(phi) - theta0 phi_old + E`
//! and Newton is applied to
//! `R(phi) = phi - phi_old + dt B - dt lap(mu(phi)) - dt S`.
//! The Jacobian `I + dt A M` (`A = -lap`, `M = diag(F_xi'') + sigma A`) is
//! turned into the mean-free SPD system `A^+ + dt M` and solved by CG with a
//! cosine-transform preconditioner.

use crate::error::{Error, Result};
use crate::model::{f_xi, PotentialParams};
use crate::ops::cg::{pcg, CgSettings};
use crate::ops::diff::{advective_derivative, div, div_product, laplace_raw};
use crate::ops::spectral::{Basis, Transform2D};
use crate::ops::{Boundary, ScalarField, VectorField};

/// Largest admissible `|phi|` after a Newton update.
pub const PHASE_LIMIT: f64 = 1.0 - 1e-12;

/// Loosest relative tolerance of the linear solve inside a Newton step. The
/// outer residual test decides convergence, so the correction may be inexact.
pub const NEWTON_LINEAR_TOL: f64 = 1e-8;

pub struct ChInputs<'a> {
    pub phi_old: &'a ScalarField,
    /// Advecting velocity; `None` for pure Cahn-Hilliard.
    pub advect: Option<&'a VectorField>,
    /// Elastic contribution `E` to the chemical potential.
    pub elastic: Option<&'a ScalarField>,
    /// Mass source added to the phase equation (manufactured solutions).
    pub source: Option<&'a ScalarField>,
    pub dt: f64,
    pub sigma: f64,
    pub potential: PotentialParams,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub halvings: usize,
    pub linear_iterations: usize,
}

/// `(u . grad phi + div(u phi) + phi div u) / 2`.
///
/// The last term vanishes for discretely solenoidal `u`; keeping it makes
/// the cell sum zero by summation by parts alone, so mass is conserved to
/// rounding whatever the projection residual.
pub fn advection_term(u: &VectorField, phi: &ScalarField) -> Result<ScalarField> {
    let a = advective_derivative(u, phi, Boundary::Mirror)?;
    let b = div_product(u, Boundary::AntiMirror, phi, Boundary::Mirror)?;
    let d = div(u);
    Ok(ScalarField {
        grid: phi.grid,
        data: (0..phi.grid.len())
            .map(|k| 0.5 * (a.data[k] + b.data[k] + phi.data[k] * d.data[k]))
            .collect(),
    })
}

struct Frozen {
    /// `phi_old - dt B + dt S`: everything in `R` that does not depend on the iterate.
    base: Vec<f64>,
    /// `-theta0 phi_old + E`.
    mu_shift: Vec<f64>,
}

fn mu_of(phi: &[f64], inp: &ChInputs, fr: &Frozen) -> Vec<f64> {
    let g = inp.phi_old.grid;
    let lap = laplace_raw(phi, None, &g, Boundary::Mirror);
    (0..phi.len())
        .map(|k| -inp.sigma * lap[k] + f_xi(phi[k], &inp.potential, 1) + fr.mu_shift[k])
        .collect()
}

fn residual(phi: &[f64], mu: &[f64], inp: &ChInputs, fr: &Frozen) -> Vec<f64> {
    let g = inp.phi_old.grid;
    let lap = laplace_raw(mu, None, &g, Boundary::Mirror);
    (0..phi.len()).map(|k| phi[k] - fr.base[k] - inp.dt * lap[k]).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Returns `(phi, mu)` at the new time level.
pub fn solve_cahn_hilliard(
    inp: &ChInputs,
    newton_tol: f64,
    newton_max: usize,
    cg: &CgSettings,
) -> Result<(ScalarField, ScalarField, NewtonReport)> {
    let g = inp.phi_old.grid;
    let n = g.len();
    let dt = inp.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mut base = inp.phi_old.data.clone();
    if let Some(u) = inp.advect {
        let b = advection_term(u, inp.phi_old)?;
        base.iter_mut().zip(&b.data).for_each(|(x, bv)| *x -= dt * bv);
    }
    if let Some(s) = inp.source {
        s.ensure_grid(&g)?;
        base.iter_mut().zip(&s.data).for_each(|(x, sv)| *x += dt * sv);
    }
    let mut mu_shift: Vec<f64> = inp.phi_old.data.iter().map(|p| -inp.potential.theta0 * p).collect();
    if let Some(e) = inp.elastic {
        e.ensure_grid(&g)?;
        mu_shift.iter_mut().zip(&e.data).for_each(|(m, ev)| *m += ev);
    }
    let fr = Frozen { base, mu_shift };

    // Start from the old phase shifted to the exact new mean (a no-op unless a
    // source or the advection rounding changes it), so every Newton correction
    // is mean-free and damping never disturbs the mass.
    let shift = mean(&fr.base) - mean(&inp.phi_old.data);
    let mut phi: Vec<f64> = inp.phi_old.data.iter().map(|p| p + shift).collect();
    if max_abs(&phi) > PHASE_LIMIT {
        return Err(Error::Newton {
            reason: "initial iterate outside (-1, 1)",
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let mut mu = mu_of(&phi, inp, &fr);
    let mut r = residual(&phi, &mu, inp, &fr);
    let mut rnorm = max_abs(&r);
    // Rounding floor of R: lap amplifies the rounding of mu, which itself
    // carries the rounding of sigma lap(phi).
    let lnorm = 4.0 / (g.dx() * g.dx()) + 4.0 / (g.dy() * g.dy());
    let scale = 1.0 + max_abs(&phi) + dt * lnorm * (max_abs(&mu) + inp.sigma * lnorm * max_abs(&phi));
    let tol = newton_tol.max(4.0 * f64::EPSILON * scale);

    let t = Transform2D::new(g, Basis::Cosine);
    let a_eig: Vec<f64> = t.compact_eigenvalues().iter().map(|e| -e).collect();
    let mut report = NewtonReport::default();
    let sigma = inp.sigma;

    let inner = CgSettings {
        tol: cg.tol.max(NEWTON_LINEAR_TOL),
        ..*cg
    };
    while rnorm > tol {
        if report.iterations >= newton_max {
            return Err(Error::Newton {
                reason: "iteration limit reached",
                iterations: report.iterations,
                residual: rnorm,
            });
        }
        report.iterations += 1;
        let fpp: Vec<f64> = phi.iter().map(|&s| f_xi(s, &inp.potential, 2)).collect();
        let apply_m = |x: &[f64]| -> Vec<f64> {
            let l = laplace_raw(x, None, &g, Boundary::Mirror);
            (0..n).map(|k| fpp[k] * x[k] - sigma * l[k]).collect()
        };
        // J dx = -R with J = I + dt A M, A = -L. Applying the pseudo-inverse of A
        // gives the mean-free SPD system (A^+ + dt M) dx = -A^+ R, whose
        // condition number grows like 1/h^2 instead of 1/h^6.
        let apply_k = |x: &[f64]| -> Vec<f64> {
            let ainv = t.solve_diagonal(&a_eig, x);
            let mx = apply_m(x);
            let mut out: Vec<f64> = (0..n).map(|k| ainv[k] + dt * mx[k]).collect();
            let m = mean(&out);
            out.iter_mut().for_each(|v| *v -= m);
            out
        };
        let dbar = mean(&fpp);
        let symbol: Vec<f64> = a_eig
            .iter()
            .map(|&a| if a == 0.0 { 0.0 } else { 1.0 / a + dt * (dbar + sigma * a) })
            .collect();
        let pre = |v: &[f64]| t.solve_diagonal(&symbol, v);
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let rhs = t.solve_diagonal(&a_eig, &neg_r);
        let (mut dx, st) = pcg("newton", &apply_k, Some(&pre), &rhs, None, &inner, true)?;
        report.linear_iterations += st.iterations;
        let fix = mean(&neg_r) - mean(&dx);
        dx.iter_mut().for_each(|v| *v += fix);

        let mut tau = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = phi.iter().zip(&dx).map(|(p, d)| p + tau * d).collect();
            if max_abs(&trial) <= PHASE_LIMIT {
                let mu_t = mu_of(&trial, inp, &fr);
                let r_t = residual(&trial, &mu_t, inp, &fr);
                let n_t = max_abs(&r_t);
                if n_t < rnorm || n_t <= tol {
                    phi = trial;
                    mu = mu_t;
                    r = r_t;
                    rnorm = n_t;
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
            report.halvings += 1;
        }
        if !accepted {
            return Err(Error::Newton {
                reason: "line search exhausted",
                iterations: report.iterations,
                residual: rnorm,
            });
        }
    }
    report.residual = rnorm;
    Ok((ScalarField { grid: g, data: phi }, ScalarField { grid: g, data: mu }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::psi_prime;
    use crate::ops::diff::face_gradient_sq;
    use crate::ops::Grid2D;
    use crate::model::psi_xi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inputs<'a>(phi: &'a ScalarField, dt: f64) -> ChInputs<'a> {
        ChInputs {
            phi_old: phi,
            advect: None,
            elastic: None,
            source: None,
            dt,
            sigma: 1.0,
            potential: PotentialParams::default(),
        }
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = Grid2D::new(10, 10, 1.0, 1.0).unwrap();
        let phi = ScalarField::constant(g, -0.4);
        let (p, mu, rep) = solve_cahn_hilliard(&inputs(&phi, 0.1), 1e-10, 50, &CgSettings::default()).unwrap();
        assert_eq!(p, phi);
        let expect = psi_prime(-0.4, &PotentialParams::default()).unwrap();
        assert!(mu.data.iter().all(|v| (v - expect).abs() < 1e-14));
        assert_eq!(rep.iterations, 0);
    }

    fn energy(phi: &ScalarField) -> f64 {
        let p = PotentialParams::default();
        phi.data.iter().map(|&s| psi_xi(s, &p, 0)).sum::<f64>() * phi.grid.cell_area()
            + 0.5 * face_gradient_sq(phi)
    }

    #[test]
    fn energy_law_and_mass_for_large_steps() {
        let g = Grid2D::new(24, 24, 6.0, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut phi = ScalarField::from_fn(g, |_, _| 0.1 + rng.gen_range(-0.3..0.3));
        let m0 = phi.mean();
        let dt = 0.5;
        for _ in 0..10 {
            let (p, mu, _) = solve_cahn_hilliard(&inputs(&phi, dt), 1e-10, 50, &CgSettings::default()).unwrap();
            let lhs = (energy(&p) - energy(&phi)) / dt + face_gradient_sq(&mu);
            assert!(lhs <= 1e-8, "{lhs}");
            assert!((p.mean() - m0).abs() <= 1e-12);
            assert!(p.max_abs() < 1.0);
            phi = p;
        }
    }

    #[test]
    fn advection_term_sums_to_zero() {
        let g = Grid2D::new(12, 9, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = VectorField::from_fn(g, |_, _| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let phi = ScalarField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0));
        let b = advection_term(&u, &phi).unwrap();
        assert!(b.data.iter().sum::<f64>().abs() < 1e-12);
    }
}
