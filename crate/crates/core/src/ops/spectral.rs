//! Orthonormal cosine/sine bases that diagonalize the constant-coefficient
//! operators; used as preconditioners.

use super::grid::Grid2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `cos(k pi (i + 1/2) / n)`, `k = 0..n`: mirror ghosts.
    Cosine,
    /// `sin(m pi (i + 1/2) / n)`, `m = 1..=n`: anti-mirror ghosts.
    Sine,
}

/// Dense orthonormal transform in one direction; row `k` is basis vector `k`.
#[derive(Debug, Clone)]
pub struct Transform1D {
    n: usize,
    basis: Basis,
    mat: Vec<f64>,
}

impl Transform1D {
    pub fn new(n: usize, basis: Basis) -> Self {
        let nf = n as f64;
        let mut mat = vec![0.0; n * n];
        for k in 0..n {
            let (freq, scale) = match basis {
                Basis::Cosine => (k as f64, if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() }),
                Basis::Sine => ((k + 1) as f64, if k + 1 == n { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() }),
            };
            for i in 0..n {
                let arg = freq * std::f64::consts::PI * (i as f64 + 0.5) / nf;
                mat[k * n + i] = scale
                    * match basis {
                        Basis::Cosine => arg.cos(),
                        Basis::Sine => arg.sin(),
                    };
            }
        }
        Self { n, basis, mat }
    }

    /// Mode angle `theta_k` such that the mode is `trig(theta_k (i + 1/2))`.
    pub fn theta(&self, k: usize) -> f64 {
        let f = match self.basis {
            Basis::Cosine => k as f64,
            Basis::Sine => (k + 1) as f64,
        };
        f * std::f64::consts::PI / self.n as f64
    }

    /// Eigenvalue of the compact second difference `(f[i-1] - 2f[i] + f[i+1]) / h^2`.
    pub fn compact_eigenvalue(&self, k: usize, h: f64) -> f64 {
        let s = (0.5 * self.theta(k)).sin() * 2.0 / h;
        -s * s
    }

    /// Eigenvalue of the wide second difference (central derivative applied twice).
    pub fn wide_eigenvalue(&self, k: usize, h: f64) -> f64 {
        let s = self.theta(k).sin() / h;
        -s * s
    }
}

/// Separable 2D transform.
#[derive(Debug, Clone)]
pub struct Transform2D {
    pub grid: Grid2D,
    pub tx: Transform1D,
    pub ty: Transform1D,
}

impl Transform2D {
    pub fn new(grid: Grid2D, basis: Basis) -> Self {
        Self {
            grid,
            tx: Transform1D::new(grid.nx, basis),
            ty: Transform1D::new(grid.ny, basis),
        }
    }

    /// Physical values to mode coefficients.
    pub fn forward(&self, data: &[f64]) -> Vec<f64> {
        self.apply(data, false)
    }

    /// Mode coefficients to physical values.
    pub fn inverse(&self, coef: &[f64]) -> Vec<f64> {
        self.apply(coef, true)
    }

    fn apply(&self, data: &[f64], transpose: bool) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut tmp = vec![0.0; nx * ny];
        let mx = &self.tx.mat;
        for j in 0..ny {
            let row = &data[j * nx..(j + 1) * nx];
            let out = &mut tmp[j * nx..(j + 1) * nx];
            for (k, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for (i, v) in row.iter().enumerate() {
                    s += v * if transpose { mx[i * nx + k] } else { mx[k * nx + i] };
                }
                *o = s;
            }
        }
        let my = &self.ty.mat;
        let mut res = vec![0.0; nx * ny];
        for k in 0..ny {
            for j in 0..ny {
                let m = if transpose { my[j * ny + k] } else { my[k * ny + j] };
                if m == 0.0 {
                    continue;
                }
                let src = &tmp[j * nx..(j + 1) * nx];
                let dst = &mut res[k * nx..(k + 1) * nx];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += m * s;
                }
            }
        }
        res
    }

    /// Eigenvalues of the compact 2D Laplacian, mode-indexed like the coefficients.
    pub fn compact_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues(|t, k, h| t.compact_eigenvalue(k, h))
    }

    pub fn wide_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues(|t, k, h| t.wide_eigenvalue(k, h))
    }

    fn eigenvalues(&self, f: impl Fn(&Transform1D, usize, f64) -> f64) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (hx, hy) = (self.grid.dx(), self.grid.dy());
        let ex: Vec<f64> = (0..nx).map(|k| f(&self.tx, k, hx)).collect();
        let mut out = Vec::with_capacity(nx * ny);
        for ky in 0..ny {
            let ey = f(&self.ty, ky, hy);
            out.extend(ex.iter().map(|e| e + ey));
        }
        out
    }

    /// Solve `diag(symbol) c = forward(rhs)` and map back; modes with a zero
    /// symbol are dropped.
    pub fn solve_diagonal(&self, symbol: &[f64], rhs: &[f64]) -> Vec<f64> {
        let mut c = self.forward(rhs);
        for (v, s) in c.iter_mut().zip(symbol) {
            *v = if *s == 0.0 { 0.0 } else { *v / s };
        }
        self.inverse(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::diff::laplace_raw;
    use crate::ops::grid::Boundary;

    #[test]
    fn transforms_are_orthonormal() {
        for basis in [Basis::Cosine, Basis::Sine] {
            for n in [8, 9, 16] {
                let t = Transform1D::new(n, basis);
                for a in 0..n {
                    for b in 0..n {
                        let d: f64 = (0..n).map(|i| t.mat[a * n + i] * t.mat[b * n + i]).sum();
                        let e = if a == b { 1.0 } else { 0.0 };
                        assert!((d - e).abs() < 1e-12, "{basis:?} n={n} a={a} b={b} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn modes_are_laplacian_eigenvectors() {
        let g = Grid2D::new(10, 12, 1.5, 0.7).unwrap();
        for (basis, bc) in [(Basis::Cosine, Boundary::Mirror), (Basis::Sine, Boundary::AntiMirror)] {
            let t = Transform2D::new(g, basis);
            let eig = t.compact_eigenvalues();
            for mode in [0, 7, 33, 119] {
                let mut c = vec![0.0; g.len()];
                c[mode] = 1.0;
                let f = t.inverse(&c);
                let l = laplace_raw(&f, None, &g, bc);
                for (a, b) in l.iter().zip(&f) {
                    assert!((a - eig[mode] * b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn round_trip() {
        let g = Grid2D::new(9, 11, 1.0, 1.0).unwrap();
        let t = Transform2D::new(g, Basis::Sine);
        let f: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let back = t.inverse(&t.forward(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
