//! Fully explicit reference stepper with its own finite differences and its
//! own unpreconditioned CG projection. It shares no discretization code with
//! the production stepper.

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::model::{f_xi, ModelParams};
use crate::ops::{Grid2D, ScalarField, VectorField};

/// `dt <= C h^4 / sigma` is required for the explicit fourth-order term.
pub const EXPLICIT_STABILITY_CONSTANT: f64 = 0.05;

#[derive(Clone, Copy, PartialEq)]
enum Pad {
    Even,
    Odd,
    Quadratic,
}

/// Field with one ghost layer, index `(i + 1) + (j + 1) (nx + 2)`.
struct Padded {
    nx: usize,
    v: Vec<f64>,
}

impl Padded {
    fn new(g: &Grid2D, data: &[f64], pad: Pad) -> Self {
        let (nx, ny) = (g.nx, g.ny);
        let w = nx + 2;
        let mut v = vec![0.0; w * (ny + 2)];
        for j in 0..ny {
            for i in 0..nx {
                v[(j + 1) * w + i + 1] = data[j * nx + i];
            }
        }
        let rule = |a: f64, b: f64, c: f64| match pad {
            Pad::Even => a,
            Pad::Odd => -a,
            Pad::Quadratic => 3.0 * a - 3.0 * b + c,
        };
        for j in 1..=ny {
            let r = j * w;
            v[r] = rule(v[r + 1], v[r + 2], v[r + 3]);
            v[r + nx + 1] = rule(v[r + nx], v[r + nx - 1], v[r + nx - 2]);
        }
        for i in 0..w {
            v[i] = rule(v[w + i], v[2 * w + i], v[3 * w + i]);
            v[(ny + 1) * w + i] = rule(v[ny * w + i], v[(ny - 1) * w + i], v[(ny - 2) * w + i]);
        }
        Self { nx, v }
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> f64 {
        self.v[((j + 1) as usize) * (self.nx + 2) + (i + 1) as usize]
    }
}

struct Fd {
    g: Grid2D,
    hx: f64,
    hy: f64,
}

impl Fd {
    fn cells(&self) -> impl Iterator<Item = (usize, isize, isize)> + '_ {
        let nx = self.g.nx;
        (0..self.g.len()).map(move |k| (k, (k % nx) as isize, (k / nx) as isize))
    }

    fn dx(&self, p: &Padded) -> Vec<f64> {
        self.cells().map(|(_, i, j)| (p.at(i + 1, j) - p.at(i - 1, j)) / (2.0 * self.hx)).collect()
    }

    fn dy(&self, p: &Padded) -> Vec<f64> {
        self.cells().map(|(_, i, j)| (p.at(i, j + 1) - p.at(i, j - 1)) / (2.0 * self.hy)).collect()
    }

    fn lap(&self, p: &Padded) -> Vec<f64> {
        self.cells()
            .map(|(_, i, j)| {
                let c = p.at(i, j);
                (p.at(i + 1, j) - 2.0 * c + p.at(i - 1, j)) / (self.hx * self.hx)
                    + (p.at(i, j + 1) - 2.0 * c + p.at(i, j - 1)) / (self.hy * self.hy)
            })
            .collect()
    }

    fn pad(&self, d: &[f64], pad: Pad) -> Padded {
        Padded::new(&self.g, d, pad)
    }

    /// Central divergence of `(a, b)` with the given ghost rule.
    fn div(&self, a: &[f64], b: &[f64], pad: Pad) -> Vec<f64> {
        let ax = self.dx(&self.pad(a, pad));
        let by = self.dy(&self.pad(b, pad));
        ax.iter().zip(&by).map(|(p, q)| p + q).collect()
    }

    /// Face-flux divergence of `u phi` (zero flux through walls).
    fn flux_div(&self, ux: &[f64], uy: &[f64], phi: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.g.nx, self.g.ny);
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let fx = |a: usize, b: usize| 0.25 * (ux[a] + ux[b]) * (phi[a] + phi[b]);
                let fy = |a: usize, b: usize| 0.25 * (uy[a] + uy[b]) * (phi[a] + phi[b]);
                let e = if i + 1 < nx { fx(k, k + 1) } else { 0.0 };
                let w = if i > 0 { fx(k - 1, k) } else { 0.0 };
                let n = if j + 1 < ny { fy(k, k + nx) } else { 0.0 };
                let s = if j > 0 { fy(k - nx, k) } else { 0.0 };
                out[k] = (e - w) / self.hx + (n - s) / self.hy;
            }
        }
        out
    }

    fn upwind(&self, f: &[f64], ux: &[f64], uy: &[f64]) -> Vec<f64> {
        let p = self.pad(f, Pad::Even);
        self.cells()
            .map(|(k, i, j)| {
                let c = p.at(i, j);
                let ddx = if ux[k] > 0.0 { c - p.at(i - 1, j) } else { p.at(i + 1, j) - c } / self.hx;
                let ddy = if uy[k] > 0.0 { c - p.at(i, j - 1) } else { p.at(i, j + 1) - c } / self.hy;
                ux[k] * ddx + uy[k] * ddy
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Plain CG for `-div grad p = r`, mean-free.
fn reference_pressure(fd: &Fd, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let apply = |p: &[f64]| -> Vec<f64> {
        let pp = fd.pad(p, Pad::Even);
        let (gx, gy) = (fd.dx(&pp), fd.dy(&pp));
        fd.div(&gx, &gy, Pad::Odd).iter().map(|v| -v).collect()
    };
    let m = rhs.iter().sum::<f64>() / n as f64;
    let b: Vec<f64> = rhs.iter().map(|v| v - m).collect();
    let bn = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..10 * n {
        let q = apply(&p);
        let a = rr / dot(&p, &q);
        for k in 0..n {
            x[k] += a * p[k];
            r[k] -= a * q[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= 1e-12 * bn {
            let mx = x.iter().sum::<f64>() / n as f64;
            x.iter_mut().for_each(|v| *v -= mx);
            return Ok(x);
        }
        p = (0..n).map(|k| r[k] + rr_new / rr * p[k]).collect();
        rr = rr_new;
        if it + 1 == 10 * n {
            break;
        }
    }
    Err(Error::NonConvergence {
        solver: "reference pressure",
        iterations: 10 * n,
        residual: rr.sqrt() / bn,
    })
}

/// One fully explicit step of the coupled system followed by a projection.
pub fn explicit_reference_step(state: &State, dt: f64, params: &ModelParams) -> Result<State> {
    let g = state.grid();
    state.ensure_consistent()?;
    let h = g.min_spacing();
    let sigma = params.coeffs.sigma;
    let bound = EXPLICIT_STABILITY_CONSTANT * h.powi(4) / sigma;
    if !(dt > 0.0) || dt > bound {
        return Err(Error::StabilityBound { dt, bound });
    }
    let fd = Fd {
        g,
        hx: g.dx(),
        hy: g.dy(),
    };
    let c = &params.coeffs;
    let n = g.len();
    let (ux, uy) = (&state.u.x, &state.u.y);
    let phi = &state.phi.data;

    // elastic potential
    let adv_a = fd.upwind(&state.psi.x, ux, uy);
    let adv_b = fd.upwind(&state.psi.y, ux, uy);
    let psi_x: Vec<f64> = (0..n).map(|k| state.psi.x[k] - dt * adv_a[k]).collect();
    let psi_y: Vec<f64> = (0..n).map(|k| state.psi.y[k] - dt * adv_b[k]).collect();

    // gradients of the old potential and phase
    let pa = fd.pad(&state.psi.x, Pad::Quadratic);
    let pb = fd.pad(&state.psi.y, Pad::Quadratic);
    let (ax, ay, bx, by) = (fd.dx(&pa), fd.dy(&pa), fd.dx(&pb), fd.dy(&pb));
    let pphi = fd.pad(phi, Pad::Even);
    let (px, py) = (fd.dx(&pphi), fd.dy(&pphi));

    // chemical potential and phase update
    let lap_phi = fd.lap(&pphi);
    let mu: Vec<f64> = (0..n)
        .map(|k| {
            let s = phi[k];
            let grad2 = ax[k] * ax[k] + ay[k] * ay[k] + bx[k] * bx[k] + by[k] * by[k];
            -sigma * lap_phi[k] + f_xi(s, &params.potential, 1) - params.potential.theta0 * s
                + 0.5 * c.lambda_prime_of(s) * grad2
        })
        .collect();
    let lap_mu = fd.lap(&fd.pad(&mu, Pad::Even));
    let transport = fd.flux_div(ux, uy, phi);
    let phi_new: Vec<f64> = (0..n).map(|k| phi[k] + dt * (lap_mu[k] - transport[k])).collect();

    // momentum: convection, viscous stress, Darcy friction, stress divergence
    let pux = fd.pad(ux, Pad::Odd);
    let puy = fd.pad(uy, Pad::Odd);
    let (uxx, uxy, uyx, uyy) = (fd.dx(&pux), fd.dy(&pux), fd.dx(&puy), fd.dy(&puy));
    let nu: Vec<f64> = phi.iter().map(|&s| c.nu_of(s)).collect();
    let lam: Vec<f64> = phi.iter().map(|&s| c.lambda_of(s)).collect();
    let mut sxx = vec![0.0; n];
    let mut sxy = vec![0.0; n];
    let mut syy = vec![0.0; n];
    for k in 0..n {
        let shear = 0.5 * (uxy[k] + uyx[k]);
        sxx[k] = nu[k] * uxx[k] - lam[k] * (ax[k] * ax[k] + bx[k] * bx[k]) - sigma * px[k] * px[k];
        syy[k] = nu[k] * uyy[k] - lam[k] * (ay[k] * ay[k] + by[k] * by[k]) - sigma * py[k] * py[k];
        sxy[k] = nu[k] * shear - lam[k] * (ax[k] * ay[k] + bx[k] * by[k]) - sigma * px[k] * py[k];
    }
    let fx = fd.div(&sxx, &sxy, Pad::Quadratic);
    let fy = fd.div(&sxy, &syy, Pad::Quadratic);
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    for k in 0..n {
        let drag = c.darcy_clamped(phi[k]);
        let conv_x = ux[k] * uxx[k] + uy[k] * uxy[k];
        let conv_y = ux[k] * uyx[k] + uy[k] * uyy[k];
        sx[k] = ux[k] + dt * (fx[k] - conv_x - drag * ux[k]);
        sy[k] = uy[k] + dt * (fy[k] - conv_y - drag * uy[k]);
    }

    // projection
    let d: Vec<f64> = fd.div(&sx, &sy, Pad::Odd).iter().map(|v| v / dt).collect();
    let p = reference_pressure(&fd, &d.iter().map(|v| -v).collect::<Vec<_>>())?;
    let pp = fd.pad(&p, Pad::Even);
    let (gx, gy) = (fd.dx(&pp), fd.dy(&pp));
    let u_new = VectorField {
        grid: g,
        x: (0..n).map(|k| sx[k] - dt * gx[k]).collect(),
        y: (0..n).map(|k| sy[k] - dt * gy[k]).collect(),
    };

    let next = State {
        t: state.t + dt,
        u: u_new,
        phi: ScalarField { grid: g, data: phi_new },
        psi: VectorField {
            grid: g,
            x: psi_x,
            y: psi_y,
        },
        mu: ScalarField { grid: g, data: mu },
        pi: ScalarField { grid: g, data: p },
    };
    if !next.is_finite() {
        return Err(Error::NonConvergence {
            solver: "explicit reference",
            iterations: 1,
            residual: f64::NAN,
        });
    }
    Ok(next)
}
