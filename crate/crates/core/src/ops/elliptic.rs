//! Helmholtz and Poisson solves, the pressure projection and the smoothing filters.

use super::cg::{pcg, CgSettings, CgStats};
use super::diff::{div, grad, laplace_raw, wide_laplace};
use super::field::{ScalarField, VectorField};
use super::grid::Boundary;
use super::spectral::{Basis, Transform2D};
use crate::error::{Error, Result};

/// Solves `-a lap(phi) + b phi = rhs` with homogeneous Neumann conditions.
pub fn solve_helmholtz_neumann(rhs: &ScalarField, a: f64, b: f64) -> Result<ScalarField> {
    solve_helmholtz_neumann_with(rhs, a, b, &CgSettings::default()).map(|r| r.0)
}

pub fn solve_helmholtz_neumann_with(
    rhs: &ScalarField,
    a: f64,
    b: f64,
    settings: &CgSettings,
) -> Result<(ScalarField, CgStats)> {
    solve_helmholtz(rhs, a, b, Boundary::Mirror, settings)
}

/// Same operator with no-slip (anti-mirror) ghosts; used per velocity component.
pub fn solve_helmholtz_noslip(rhs: &ScalarField, a: f64, b: f64, settings: &CgSettings) -> Result<(ScalarField, CgStats)> {
    solve_helmholtz(rhs, a, b, Boundary::AntiMirror, settings)
}

fn solve_helmholtz(
    rhs: &ScalarField,
    a: f64,
    b: f64,
    bc: Boundary,
    settings: &CgSettings,
) -> Result<(ScalarField, CgStats)> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Helmholtz coefficients need a >= 0, b >= 0, not both zero (a = {a}, b = {b})"
        )));
    }
    let grid = rhs.grid;
    if a == 0.0 {
        return Ok((rhs.map(|v| v / b), CgStats::default()));
    }
    let singular = b == 0.0 && bc == Boundary::Mirror;
    let mut rhs_data = rhs.data.clone();
    if singular {
        let mean = rhs.mean();
        if mean.abs() > 1e-12 * rhs.max_abs().max(1.0) {
            return Err(Error::IncompatibleRhs { mean });
        }
        rhs_data.iter_mut().for_each(|v| *v -= mean);
    }
    let apply = |x: &[f64]| -> Vec<f64> {
        let l = laplace_raw(x, None, &grid, bc);
        x.iter().zip(&l).map(|(v, lv)| b * v - a * lv).collect()
    };
    let basis = if bc == Boundary::Mirror { Basis::Cosine } else { Basis::Sine };
    let t = Transform2D::new(grid, basis);
    let symbol: Vec<f64> = t.compact_eigenvalues().iter().map(|e| b - a * e).collect();
    let pre = |r: &[f64]| t.solve_diagonal(&symbol, r);
    let (x, st) = pcg("helmholtz", &apply, Some(&pre), &rhs_data, None, settings, singular)?;
    Ok((ScalarField { grid, data: x }, st))
}

/// Solves `c0 u - div(kappa grad u) = rhs` with no-slip ghosts and cellwise
/// positive `c0`, `kappa` (face values are arithmetic means).
pub fn solve_variable_noslip(
    rhs: &ScalarField,
    c0: &ScalarField,
    kappa: &ScalarField,
    x0: Option<&ScalarField>,
    settings: &CgSettings,
) -> Result<(ScalarField, CgStats)> {
    rhs.ensure_grid(&c0.grid)?;
    rhs.ensure_grid(&kappa.grid)?;
    let grid = rhs.grid;
    let apply = |x: &[f64]| -> Vec<f64> {
        let l = laplace_raw(x, Some(&kappa.data), &grid, Boundary::AntiMirror);
        x.iter().zip(&l).zip(&c0.data).map(|((v, lv), c)| c * v - lv).collect()
    };
    let t = Transform2D::new(grid, Basis::Sine);
    let (cm, km) = (c0.mean(), kappa.mean());
    let symbol: Vec<f64> = t.compact_eigenvalues().iter().map(|e| cm - km * e).collect();
    let pre = |r: &[f64]| t.solve_diagonal(&symbol, r);
    let (x, st) = pcg(
        "momentum",
        &apply,
        Some(&pre),
        &rhs.data,
        x0.map(|f| f.data.as_slice()),
        settings,
        false,
    )?;
    Ok((ScalarField { grid, data: x }, st))
}

/// Pressure projection: solves `div grad pi = div(v) / dt` (Neumann, zero
/// mean) and returns `v - dt grad pi` together with `pi`.
///
/// The pressure operator is the composition of the discrete divergence and
/// gradient, so the returned velocity is discretely divergence-free up to
/// the solver tolerance.
pub fn project(v: &VectorField, dt: f64) -> Result<(VectorField, ScalarField)> {
    project_with(v, dt, &CgSettings::default()).map(|(u, p, _)| (u, p))
}

pub fn project_with(v: &VectorField, dt: f64, settings: &CgSettings) -> Result<(VectorField, ScalarField, CgStats)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("projection needs dt > 0, got {dt}")));
    }
    let grid = v.grid;
    let mut rhs = div(v);
    let mean = rhs.mean();
    rhs.data.iter_mut().for_each(|x| *x = -(*x - mean) / dt);
    let apply = |x: &[f64]| -> Vec<f64> {
        let p = ScalarField {
            grid,
            data: x.to_vec(),
        };
        wide_laplace(&p).data.iter().map(|v| -v).collect()
    };
    let t = Transform2D::new(grid, Basis::Cosine);
    let symbol: Vec<f64> = t.wide_eigenvalues().iter().map(|e| -e).collect();
    let pre = |r: &[f64]| t.solve_diagonal(&symbol, r);
    let (x, st) = pcg("pressure", &apply, Some(&pre), &rhs.data, None, settings, true)?;
    let pi = ScalarField { grid, data: x };
    let mut u = v.clone();
    u.add_scaled(-dt, &grad(&pi));
    Ok((u, pi, st))
}

/// Helmholtz smoothing `-alpha lap(f_a) + (1 + alpha) f_a = f` (Neumann).
pub fn filter_scalar(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    filter_scalar_with(f, alpha, &CgSettings::default())
}

pub fn filter_scalar_with(f: &ScalarField, alpha: f64, settings: &CgSettings) -> Result<ScalarField> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    solve_helmholtz_neumann_with(f, alpha, 1.0 + alpha, settings).map(|r| r.0)
}

/// `(I - alpha lap)^-1` per component with no-slip ghosts, followed by a
/// projection, repeated `passes` times.
pub fn filter_velocity(v: &VectorField, alpha: f64, passes: u8) -> Result<VectorField> {
    filter_velocity_with(v, alpha, passes, &CgSettings::default())
}

pub fn filter_velocity_with(v: &VectorField, alpha: f64, passes: u8, settings: &CgSettings) -> Result<VectorField> {
    check_alpha(alpha)?;
    if !(1..=2).contains(&passes) {
        return Err(Error::InvalidParameter(format!("filter passes must be 1 or 2, got {passes}")));
    }
    if alpha == 0.0 {
        return Ok(v.clone());
    }
    let mut out = v.clone();
    for _ in 0..passes {
        let (a, _) = solve_helmholtz_noslip(&out.component(0), alpha, 1.0, settings)?;
        let (b, _) = solve_helmholtz_noslip(&out.component(1), alpha, 1.0, settings)?;
        let w = VectorField::from_components(a, b)?;
        out = project_with(&w, 1.0, settings)?.0;
    }
    Ok(out)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("filter width alpha must be >= 0, got {alpha}")))
    }
}

/// `|div v|_2` scaled by `min(dx, dy) / |v|_2`; zero for `v = 0`.
pub fn relative_divergence(v: &VectorField) -> f64 {
    let n = v.norm_l2();
    if n == 0.0 {
        0.0
    } else {
        div(v).norm_l2() * v.grid.min_spacing() / n
    }
}

#[cfg(test)]
mod tests {
    use crate::ops::Grid2D;
    use super::*;
    use crate::ops::diff::laplace_neumann;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_vec(g: Grid2D, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        VectorField::from_fn(g, |_, _| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn rand_scalar(g: Grid2D, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn helmholtz_constant_and_identity() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let c = ScalarField::constant(g, 2.0);
        let s = solve_helmholtz_neumann(&c, 0.3, 1.3).unwrap();
        assert!(s.data.iter().all(|v| (v - 2.0 / 1.3).abs() < 1e-12));
        let f = rand_scalar(g, 1);
        assert_eq!(solve_helmholtz_neumann(&f, 0.0, 1.0).unwrap(), f);
    }

    #[test]
    fn helmholtz_cosine_mode() {
        // discrete eigenvalue oracle: exact up to the CG tolerance
        let g = Grid2D::new(16, 16, 2.0, 1.0).unwrap();
        let (a, b) = (0.7, 1.2);
        for k in 1..4 {
            let f = ScalarField::from_fn(g, |x, _| (k as f64 * PI * x / g.lx).cos());
            let s = solve_helmholtz_neumann(&f, a, b).unwrap();
            let lam = (2.0 / g.dx() * (k as f64 * PI / (2.0 * g.nx as f64)).sin()).powi(2);
            let cont = (k as f64 * PI / g.lx).powi(2);
            for (sv, fv) in s.data.iter().zip(&f.data) {
                assert!((sv - fv / (b + a * lam)).abs() < 1e-9);
                assert!((sv - fv / (b + a * cont)).abs() < 0.02);
            }
        }
    }

    #[test]
    fn helmholtz_residual_independent_check() {
        let g = Grid2D::new(20, 12, 1.0, 0.6).unwrap();
        let f = rand_scalar(g, 2);
        let (a, b) = (0.05, 1.0);
        let s = solve_helmholtz_neumann(&f, a, b).unwrap();
        let l = laplace_neumann(&s);
        let r: f64 = s
            .data
            .iter()
            .zip(&l.data)
            .zip(&f.data)
            .map(|((x, lx), fx)| (b * x - a * lx - fx).powi(2))
            .sum::<f64>()
            .sqrt();
        let fnorm: f64 = f.data.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r <= 1e-10 * fnorm);
    }

    #[test]
    fn poisson_requires_compatible_rhs() {
        let g = Grid2D::new(8, 8, 1.0, 1.0).unwrap();
        let c = ScalarField::constant(g, 1.0);
        assert!(matches!(
            solve_helmholtz_neumann(&c, 1.0, 0.0),
            Err(Error::IncompatibleRhs { .. })
        ));
        let f = ScalarField::from_fn(g, |x, _| (PI * x).cos());
        let s = solve_helmholtz_neumann(&f, 1.0, 0.0).unwrap();
        assert!(s.mean().abs() < 1e-12);
    }

    #[test]
    fn unpreconditioned_matches() {
        let g = Grid2D::new(12, 10, 1.0, 1.0).unwrap();
        let f = rand_scalar(g, 4);
        let plain = CgSettings {
            precondition: false,
            ..CgSettings::default()
        };
        let (a, sa) = solve_helmholtz_neumann_with(&f, 0.1, 1.0, &plain).unwrap();
        let (b, sb) = solve_helmholtz_neumann_with(&f, 0.1, 1.0, &CgSettings::default()).unwrap();
        assert!(sb.iterations < sa.iterations);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_is_divergence_free_and_idempotent() {
        let g = Grid2D::new(32, 32, 1.0, 1.0).unwrap();
        let v = rand_vec(g, 11);
        let (u, pi) = project(&v, 0.1).unwrap();
        assert!(div(&u).norm_l2() <= 1e-8 * v.norm_l2() / g.min_spacing());
        assert!(pi.mean().abs() < 1e-12);
        let (w, pi2) = project(&u, 0.1).unwrap();
        let mut d = w.clone();
        d.add_scaled(-1.0, &u);
        assert!(d.norm_l2() <= 1e-8 * u.norm_l2());
        assert!(pi2.max_abs() < 1e-6);
    }

    #[test]
    fn projection_annihilates_gradients() {
        let g = Grid2D::new(24, 24, 1.0, 1.0).unwrap();
        let q = ScalarField::from_fn(g, |x, y| (PI * x).cos() * (2.0 * PI * y).cos() + x * x);
        let v = grad(&q);
        let (u, _) = project(&v, 1.0).unwrap();
        assert!(u.norm_l2() <= 1e-8 * v.norm_l2());
    }

    #[test]
    fn filters() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let f = rand_scalar(g, 5);
        assert_eq!(filter_scalar(&f, 0.0).unwrap(), f);
        for alpha in [0.01, 0.1, 1.0] {
            let s = filter_scalar(&f, alpha).unwrap();
            assert!(s.norm_l2() <= f.norm_l2());
            assert!(s.max_abs() <= f.max_abs() + 1e-12);
            let shifted = filter_scalar(&f.map(|v| v + 0.7), alpha).unwrap();
            for (a, b) in shifted.data.iter().zip(&s.data) {
                assert!((a - b - 0.7 / (1.0 + alpha)).abs() < 1e-9);
            }
        }
        let c = filter_scalar(&ScalarField::constant(g, 3.0), 0.5).unwrap();
        assert!(c.data.iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!(filter_scalar(&f, -0.1).is_err());

        let v = project(&rand_vec(g, 6), 1.0).unwrap().0;
        assert_eq!(filter_velocity(&v, 0.0, 2).unwrap(), v);
        let w = filter_velocity(&v, 0.05, 2).unwrap();
        assert!(w.norm_l2() <= v.norm_l2());
        assert!(relative_divergence(&w) < 1e-8);
        assert!(filter_velocity(&v, 0.05, 3).is_err());
    }
}
