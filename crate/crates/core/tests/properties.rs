use proptest::prelude::*;

use thrombus::diagnostics::energy;
use thrombus::dynamics::{step, SolverConfig, State};
use thrombus::io::{decode_snapshot, encode_snapshot};
use thrombus::model::{convex_value, f_xi, ModelParams, PotentialParams};
use thrombus::ops::elliptic::{filter_scalar, filter_velocity, project, relative_divergence};
use thrombus::ops::{div, grad, Grid2D, ScalarField, VectorField};
use thrombus::transport::{advect_psi, backtrack};

fn grid(nx: usize, ny: usize) -> Grid2D {
    Grid2D::new(nx, ny, 1.0 + nx as f64 / 16.0, 1.0).unwrap()
}

fn field(g: Grid2D, v: &[f64]) -> ScalarField {
    ScalarField {
        grid: g,
        data: v[..g.len()].to_vec(),
    }
}

fn vector(g: Grid2D, v: &[f64]) -> VectorField {
    VectorField {
        grid: g,
        x: v[..g.len()].to_vec(),
        y: v[g.len()..2 * g.len()].to_vec(),
    }
}

const MAX_CELLS: usize = 12 * 12;

fn values(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, 2 * MAX_CELLS)
}

fn sup(v: &VectorField) -> f64 {
    v.x.iter().chain(&v.y).fold(0.0f64, |m, a| m.max(a.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_preserves_mass_bound_and_divergence(
        n in 8usize..=12,
        phi in values(-0.6, 0.6),
        u in values(-1.0, 1.0),
        mean in -0.3f64..0.3,
    ) {
        let g = grid(n, n);
        let params = ModelParams::default();
        let phi0 = field(g, &phi).map(|v| 0.5 * v + mean);
        let mut s = State::at_rest(phi0, VectorField::from_fn(g, |x, y| (x, y)), &params).unwrap();
        s.u = project(&vector(g, &u), 1.0).unwrap().0;
        let cfg = SolverConfig { dt: 1e-3, ..SolverConfig::default() };
        let m0 = s.phi.mean();
        for _ in 0..3 {
            s = step(&s, &cfg, &params).unwrap();
            prop_assert!((s.phi.mean() - m0).abs() <= 1e-12);
            prop_assert!(s.phi.max_abs() < 1.0);
            prop_assert!(relative_divergence(&s.u) <= 1e-8);
        }
    }

    #[test]
    fn transport_never_raises_the_sup_norm(
        nx in 8usize..=12,
        ny in 8usize..=12,
        u in values(-3.0, 3.0),
        psi in values(-2.0, 2.0),
        dt in 1e-3f64..0.1,
    ) {
        let g = grid(nx, ny);
        let p = vector(g, &psi);
        let next = advect_psi(&p, &backtrack(&vector(g, &u), dt).unwrap()).unwrap();
        prop_assert!(sup(&next) <= sup(&p));
    }

    #[test]
    fn filters_are_non_expansive(
        nx in 8usize..=12,
        ny in 8usize..=12,
        v in values(-1.0, 1.0),
        alpha in 1e-3f64..2.0,
    ) {
        let g = grid(nx, ny);
        let f = field(g, &v);
        let ff = filter_scalar(&f, alpha).unwrap();
        prop_assert!(ff.norm_l2() <= f.norm_l2() * (1.0 + 1e-12));
        prop_assert!(ff.max_abs() <= f.max_abs() * (1.0 + 1e-12));
        let w = vector(g, &v);
        let fw = filter_velocity(&w, alpha, 2).unwrap();
        prop_assert!(fw.norm_l2() <= w.norm_l2() * (1.0 + 1e-12));
        prop_assert!(sup(&fw) <= sup(&w) * (1.0 + 1e-12));
    }

    #[test]
    fn gradient_and_divergence_are_adjoint(
        nx in 8usize..=12,
        ny in 8usize..=12,
        s in values(-1.0, 1.0),
        v in values(-1.0, 1.0),
    ) {
        let g = grid(nx, ny);
        let (f, w) = (field(g, &s), vector(g, &v));
        let gf = grad(&f);
        let lhs: f64 = gf.x.iter().zip(&w.x).chain(gf.y.iter().zip(&w.y)).map(|(a, b)| a * b).sum();
        let rhs: f64 = -div(&w).data.iter().zip(&f.data).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn projection_is_idempotent(nx in 8usize..=12, ny in 8usize..=12, v in values(-1.0, 1.0)) {
        let g = grid(nx, ny);
        let (p1, _) = project(&vector(g, &v), 1.0).unwrap();
        let (p2, _) = project(&p1, 1.0).unwrap();
        let d: f64 = p1.x.iter().zip(&p2.x).chain(p1.y.iter().zip(&p2.y)).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(d <= 1e-8 * (1.0 + sup(&p1)));
    }

    #[test]
    fn regularized_potential_properties(s in -1.0f64..=1.0, wide in -5.0f64..5.0, xi in 1e-6f64..0.1) {
        let p = PotentialParams { xi, ..PotentialParams::default() };
        let f = convex_value(s, &p).unwrap();
        prop_assert!(f_xi(s, &p, 0) <= f + 1e-15);
        prop_assert!(f_xi(wide, &p, 2) >= p.theta);
        prop_assert!(f_xi(wide, &p, 0) >= 0.0);
        if s.abs() <= 1.0 - xi {
            prop_assert_eq!(f_xi(s, &p, 0), f);
        }
    }

    #[test]
    fn snapshot_round_trip(
        nx in 8usize..=12,
        ny in 8usize..=12,
        v in prop::collection::vec(-1e6f64..1e6, 7 * MAX_CELLS),
        t in 0.0f64..10.0,
    ) {
        let g = grid(nx, ny);
        let s = State {
            t,
            u: vector(g, &v),
            phi: field(g, &v[2 * MAX_CELLS..]),
            psi: vector(g, &v[3 * MAX_CELLS..]),
            mu: field(g, &v[5 * MAX_CELLS..]),
            pi: field(g, &v[6 * MAX_CELLS..]),
        };
        let back = decode_snapshot(&encode_snapshot(&s)).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn energy_is_additive_and_reflection_invariant(n in 8usize..=12, phi in values(-0.8, 0.8), u in values(-1.0, 1.0)) {
        let g = grid(n, n);
        let params = ModelParams::default();
        let mut s = State::at_rest(field(g, &phi), VectorField::from_fn(g, |x, y| (x + 0.1 * y, y)), &params).unwrap();
        s.u = vector(g, &u);
        let e = energy(&s, &params);
        prop_assert!((e.e_total - (e.e_kin + e.e_coh + e.e_ela)).abs() <= 1e-12 * (1.0 + e.e_total.abs()));
        prop_assert!(e.e_kin >= 0.0 && e.e_ela >= 0.0 && e.dissipation >= 0.0);

        // mirror x -> lx - x: u_x and the x derivatives of psi change sign
        let m = |k: usize| g.idx(g.nx - 1 - k % g.nx, k / g.nx);
        let mut r = s.clone();
        for k in 0..g.len() {
            r.phi.data[k] = s.phi.data[m(k)];
            r.mu.data[k] = s.mu.data[m(k)];
            r.u.x[k] = -s.u.x[m(k)];
            r.u.y[k] = s.u.y[m(k)];
            r.psi.x[k] = -s.psi.x[m(k)];
            r.psi.y[k] = s.psi.y[m(k)];
        }
        let er = energy(&r, &params);
        prop_assert!((er.e_total - e.e_total).abs() <= 1e-10 * (1.0 + e.e_total.abs()));
    }
}
