//! Conjugate gradients for symmetric positive (semi)definite systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear solver settings shared by every elliptic solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CgSettings {
    /// Relative residual target `|b - Ax| / |b|`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iter: Option<usize>,
    /// Use the spectral preconditioner where one is available.
    pub precondition: bool,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
            precondition: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// True relative residual, recomputed from scratch after the iteration.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Residual `b - A x`, measured independently of the iteration's recursion.
pub fn residual(apply: &dyn Fn(&[f64]) -> Vec<f64>, b: &[f64], x: &[f64], singular: bool) -> Vec<f64> {
    let ax = apply(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    if singular {
        remove_mean(&mut r);
    }
    r
}

/// Preconditioned CG. With `singular` the operator is taken to have the
/// constants as null space: residuals and iterates are kept mean-free and
/// the returned solution has zero mean.
pub fn pcg(
    name: &'static str,
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    precond: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
    b: &[f64],
    x0: Option<&[f64]>,
    settings: &CgSettings,
    singular: bool,
) -> Result<(Vec<f64>, CgStats)> {
    let n = b.len();
    let max_iter = settings.max_iter.unwrap_or(10 * n).max(1);
    let bnorm = dot(b, b).sqrt();
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgStats::default()));
    }
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z = match precond {
            Some(m) if settings.precondition => m(r),
            _ => r.to_vec(),
        };
        if singular {
            remove_mean(&mut z);
        }
        z
    };

    let mut total = 0;
    let mut rel = f64::INFINITY;
    // Restarts recover from drift between the recursive and the true residual.
    for _ in 0..6 {
        let mut r = residual(apply, b, &x, singular);
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= settings.tol {
            break;
        }
        if total >= max_iter {
            break;
        }
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while total < max_iter {
            let q = apply(&p);
            let pq = dot(&p, &q);
            if pq <= 0.0 || !pq.is_finite() {
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            total += 1;
            if dot(&r, &r).sqrt() / bnorm <= 0.5 * settings.tol {
                break;
            }
            z = precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
    if singular {
        remove_mean(&mut x);
    }
    if rel <= settings.tol && x.iter().all(|v| v.is_finite()) {
        Ok((x, CgStats { iterations: total, residual: rel }))
    } else {
        Err(Error::NonConvergence {
            solver: name,
            iterations: total,
            residual: rel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                2.5 * x[i] - l - r
            })
            .collect()
    }

    #[test]
    fn solves_spd_system() {
        let b: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let (x, st) = pcg("t", &tridiag, None, &b, None, &CgSettings::default(), false).unwrap();
        let r = residual(&tridiag, &b, &x, false);
        assert!(dot(&r, &r).sqrt() <= 1e-10 * dot(&b, &b).sqrt());
        assert!(st.iterations <= 50);
    }

    #[test]
    fn reports_non_convergence() {
        let b: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let s = CgSettings {
            max_iter: Some(2),
            ..CgSettings::default()
        };
        let e = pcg("t", &tridiag, None, &b, None, &s, false).unwrap_err();
        assert!(matches!(e, Error::NonConvergence { iterations: 2, .. }));
    }

    #[test]
    fn singular_neumann_chain() {
        let op = |x: &[f64]| -> Vec<f64> {
            let n = x.len();
            (0..n)
                .map(|i| {
                    let l = if i > 0 { x[i - 1] } else { x[0] };
                    let r = if i + 1 < n { x[i + 1] } else { x[n - 1] };
                    2.0 * x[i] - l - r
                })
                .collect()
        };
        let mut b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        remove_mean(&mut b);
        let (x, _) = pcg("t", &op, None, &b, None, &CgSettings::default(), true).unwrap();
        assert!(x.iter().sum::<f64>().abs() < 1e-10);
    }
}
