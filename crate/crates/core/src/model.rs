//! Constitutive layer: the logarithmic (Flory-Huggins) potential and its
//! regularization, the phase-dependent viscosity, permeability and elastic
//! relaxation coefficients, and the mollified relaxation coefficient used by
//! the regularized stepper.
//!
//! The potential splits as `Psi(s) = F(s) - (theta0 / 2) s^2` with the convex
//! entropy part
//!
//! ```text
//! F(s) = (theta / 2) [(1 + s) ln(1 + s) + (1 - s) ln(1 - s)],   F''(s) = theta / (1 - s^2) >= theta.
//! ```
//!
//! `F_xi` agrees with `F` up to second derivatives on `[-1 + xi, 1 - xi]` and is
//! continued by its second-order Taylor polynomial outside, which makes it a
//! total `C^2` function with `F_xi'' >= theta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the Flory-Huggins potential and of its regularization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialParams {
    /// Absolute temperature.
    pub theta: f64,
    /// Critical temperature; also the coefficient of the concave part.
    pub theta0: f64,
    /// Width of the regularized band next to the pure phases.
    pub xi: f64,
    /// Width of the band where `F''` is monotone towards the endpoints.
    pub gamma: f64,
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self {
            theta: 1.0,
            theta0: 2.0,
            xi: 1e-4,
            gamma: 0.5,
        }
    }
}

impl PotentialParams {
    pub fn new(theta: f64, theta0: f64, xi: f64) -> Result<Self> {
        let p = Self {
            theta,
            theta0,
            xi,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        if !(self.theta0 > 0.0 && self.theta0.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta0 must be positive, got {}", self.theta0)));
        }
        if self.theta >= self.theta0 {
            return Err(Error::InvalidParameter(format!(
                "requires theta < theta0 for a double-well potential (theta = {}, theta0 = {})",
                self.theta, self.theta0
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.xi > 0.0 && self.xi < self.gamma.min(1.0)) {
            return Err(Error::InvalidParameter(format!(
                "xi must lie in (0, min(gamma, 1)) = (0, {}), got {}",
                self.gamma.min(1.0),
                self.xi
            )));
        }
        Ok(())
    }

    /// Same parameters with a different regularization width.
    pub fn with_xi(&self, xi: f64) -> Self {
        Self { xi, ..*self }
    }
}

fn check_open(func: &'static str, s: f64) -> Result<()> {
    if s.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            value: s,
            domain: "(-1, 1)",
        })
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Convex entropy part `F` on the closed interval `[-1, 1]` (finite at the endpoints).
pub fn convex_value(s: f64, p: &PotentialParams) -> Result<f64> {
    if s.abs() > 1.0 {
        return Err(Error::Domain {
            func: "convex_value",
            value: s,
            domain: "[-1, 1]",
        });
    }
    if s.abs() == 1.0 {
        return Ok(0.5 * p.theta * xlogx(2.0));
    }
    Ok(0.5 * p.theta * ((1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()))
}

fn convex_prime(s: f64, p: &PotentialParams) -> f64 {
    p.theta * s.atanh()
}

fn convex_second(s: f64, p: &PotentialParams) -> f64 {
    p.theta / ((1.0 - s) * (1.0 + s))
}

pub fn psi_value(s: f64, p: &PotentialParams) -> Result<f64> {
    check_open("psi_value", s)?;
    Ok(convex_value(s, p)? - 0.5 * p.theta0 * s * s)
}

pub fn psi_prime(s: f64, p: &PotentialParams) -> Result<f64> {
    check_open("psi_prime", s)?;
    Ok(convex_prime(s, p) - p.theta0 * s)
}

pub fn psi_second(s: f64, p: &PotentialParams) -> Result<f64> {
    check_open("psi_second", s)?;
    Ok(convex_second(s, p) - p.theta0)
}

/// Regularized convex part `F_xi` and its first two derivatives on the whole line.
///
/// Panics if `order > 2`.
pub fn f_xi(s: f64, p: &PotentialParams, order: u8) -> f64 {
    assert!(order <= 2, "f_xi supports derivative orders 0, 1, 2");
    let edge = 1.0 - p.xi;
    if s.abs() <= edge {
        return match order {
            0 => 0.5 * p.theta * ((1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()),
            1 => convex_prime(s, p),
            _ => convex_second(s, p),
        };
    }
    // F is even, so work on |s| and restore the sign of odd derivatives.
    let sign = s.signum();
    let a = edge;
    let d = s.abs() - a;
    let f0 = 0.5 * p.theta * ((1.0 + a) * a.ln_1p() + (1.0 - a) * (-a).ln_1p());
    let f1 = convex_prime(a, p);
    let f2 = convex_second(a, p);
    match order {
        0 => f0 + f1 * d + 0.5 * f2 * d * d,
        1 => sign * (f1 + f2 * d),
        _ => f2,
    }
}

/// Regularized potential `Psi_xi = F_xi - (theta0 / 2) s^2` and derivatives.
pub fn psi_xi(s: f64, p: &PotentialParams, order: u8) -> f64 {
    let f = f_xi(s, p, order);
    match order {
        0 => f - 0.5 * p.theta0 * s * s,
        1 => f - p.theta0 * s,
        _ => f - p.theta0,
    }
}

/// Positive root `s_eq` of `Psi'` on `(0, 1)` (the pure-phase equilibrium), by bisection.
pub fn equilibrium_root(p: &PotentialParams) -> Result<f64> {
    p.validate()?;
    // Psi' < 0 just right of 0 (Psi''(0) < 0) and -> +inf at 1.
    let mut lo = 1e-8_f64;
    let mut hi = 1.0 - 1e-15;
    let g = |s: f64| convex_prime(s, p) - p.theta0 * s;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Elastic relaxation coefficient `lambda(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaModel {
    /// `lambda(s) = star + slope (s + 1)`, extended affinely.
    Affine { star: f64, slope: f64 },
    /// `c0 + c1 s + c2 s^2`.
    Quadratic { c0: f64, c1: f64, c2: f64 },
    /// Convex piecewise-linear table through `(nodes[i], values[i])`, extended
    /// affinely with the end slopes.
    Table { nodes: Vec<f64>, values: Vec<f64> },
}

impl Default for LambdaModel {
    fn default() -> Self {
        LambdaModel::Affine { star: 1.0, slope: 0.5 }
    }
}

/// A scalar coefficient of the phase variable with its first two derivatives.
pub trait Coefficient {
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
    fn second(&self, s: f64) -> f64;
}

impl LambdaModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            LambdaModel::Affine { star, slope } => {
                if !(*star > 0.0) || !(*slope > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lambda requires lambda_star > 0 and lambda_slope > 0, got {star}, {slope}"
                    )));
                }
            }
            LambdaModel::Quadratic { c2, .. } => {
                if *c2 < 0.0 {
                    return Err(Error::InvalidParameter("quadratic lambda must be convex".into()));
                }
            }
            LambdaModel::Table { nodes, values } => {
                if nodes.len() < 2 || nodes.len() != values.len() {
                    return Err(Error::InvalidParameter(
                        "lambda table needs at least two (node, value) pairs".into(),
                    ));
                }
                if nodes.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter("lambda table nodes must increase".into()));
                }
                let slopes = self.table_slopes();
                if slopes.iter().any(|&k| !(k > 0.0)) {
                    return Err(Error::InvalidParameter("lambda table must be increasing".into()));
                }
                if slopes.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidParameter("lambda table must be convex".into()));
                }
                if values.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::InvalidParameter("lambda table values must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn table_slopes(&self) -> Vec<f64> {
        match self {
            LambdaModel::Table { nodes, values } => nodes
                .windows(2)
                .zip(values.windows(2))
                .map(|(n, v)| (v[1] - v[0]) / (n[1] - n[0]))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn table_segment(nodes: &[f64], s: f64) -> usize {
        let last = nodes.len() - 2;
        match nodes.iter().position(|&n| n > s) {
            Some(0) => 0,
            Some(k) => (k - 1).min(last),
            None => last,
        }
    }
}

impl Coefficient for LambdaModel {
    fn value(&self, s: f64) -> f64 {
        match self {
            LambdaModel::Affine { star, slope } => star + slope * (s + 1.0),
            LambdaModel::Quadratic { c0, c1, c2 } => c0 + s * (c1 + c2 * s),
            LambdaModel::Table { nodes, values } => {
                let k = Self::table_segment(nodes, s);
                let slope = (values[k + 1] - values[k]) / (nodes[k + 1] - nodes[k]);
                values[k] + slope * (s - nodes[k])
            }
        }
    }

    fn derivative(&self, s: f64) -> f64 {
        match self {
            LambdaModel::Affine { slope, .. } => *slope,
            LambdaModel::Quadratic { c1, c2, .. } => c1 + 2.0 * c2 * s,
            LambdaModel::Table { nodes, values } => {
                let k = Self::table_segment(nodes, s);
                (values[k + 1] - values[k]) / (nodes[k + 1] - nodes[k])
            }
        }
    }

    fn second(&self, _s: f64) -> f64 {
        match self {
            LambdaModel::Quadratic { c2, .. } => 2.0 * c2,
            // Piecewise affine: zero away from the kinks.
            _ => 0.0,
        }
    }
}

/// Number of midpoint nodes used for the mollifier convolution.
const MOLLIFIER_NODES: usize = 256;

/// `lambda` convolved with a normalized symmetric `C^infty` bump of half-width `alpha`.
#[derive(Debug, Clone)]
pub struct MollifiedLambda {
    base: LambdaModel,
    alpha: f64,
    offsets: Vec<f64>,
    weights: Vec<f64>,
    dweights: Vec<f64>,
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_prime(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - t * t;
        bump(t) * (-2.0 * t / (q * q))
    }
}

pub fn mollify_lambda(lambda: &LambdaModel, alpha: f64) -> Result<MollifiedLambda> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("mollifier width must be positive, got {alpha}")));
    }
    let n = MOLLIFIER_NODES;
    let h = 2.0 / n as f64;
    let offsets: Vec<f64> = (0..n).map(|i| -1.0 + (i as f64 + 0.5) * h).collect();
    let raw: Vec<f64> = offsets.iter().map(|&t| bump(t) * h).collect();
    let z: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / z).collect();
    let dweights = offsets.iter().map(|&t| bump_prime(t) * h / z).collect();
    Ok(MollifiedLambda {
        base: lambda.clone(),
        alpha,
        offsets,
        weights,
        dweights,
    })
}

impl MollifiedLambda {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Second moment of the normalized kernel, `int t^2 rho(t) dt`.
    pub fn kernel_second_moment(&self) -> f64 {
        self.offsets.iter().zip(&self.weights).map(|(t, w)| t * t * w).sum()
    }
}

impl Coefficient for MollifiedLambda {
    fn value(&self, s: f64) -> f64 {
        // Pair symmetric nodes so affine functions are reproduced to rounding.
        let n = self.offsets.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let t = self.offsets[n - 1 - i];
            let w = self.weights[i];
            acc += w * (self.base.value(s - self.alpha * t) + self.base.value(s + self.alpha * t));
        }
        acc
    }

    fn derivative(&self, s: f64) -> f64 {
        let n = self.offsets.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let t = self.offsets[n - 1 - i];
            let w = self.weights[i];
            acc += w * (self.base.derivative(s - self.alpha * t) + self.base.derivative(s + self.alpha * t));
        }
        acc
    }

    fn second(&self, s: f64) -> f64 {
        self.offsets
            .iter()
            .zip(&self.dweights)
            .map(|(&t, &dw)| self.base.derivative(s - self.alpha * t) * dw)
            .sum::<f64>()
            / self.alpha
    }
}

/// Viscosity, permeability, elastic relaxation and capillarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientParams {
    /// Viscosity of pure blood (`s = 1`).
    pub nu1: f64,
    /// Viscosity of pure thrombus (`s = -1`).
    pub nu2: f64,
    pub lambda: LambdaModel,
    pub k_star: f64,
    pub k_slope: f64,
    pub sigma: f64,
}

impl Default for CoefficientParams {
    fn default() -> Self {
        Self {
            nu1: 1.0,
            nu2: 1.5,
            lambda: LambdaModel::default(),
            k_star: 0.5,
            k_slope: 0.5,
            sigma: 1.0,
        }
    }
}

impl CoefficientParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        pos("nu1", self.nu1)?;
        pos("nu2", self.nu2)?;
        pos("k_star", self.k_star)?;
        pos("sigma", self.sigma)?;
        if !(self.k_slope >= 0.0) {
            return Err(Error::InvalidParameter(format!("k_slope must be >= 0, got {}", self.k_slope)));
        }
        self.lambda.validate()
    }

    /// `nu(s)`, linear between the pure-phase values, argument clamped to `[-1, 1]`.
    pub fn nu_of(&self, s: f64) -> f64 {
        let s = s.clamp(-1.0, 1.0);
        self.nu1 * 0.5 * (1.0 + s) + self.nu2 * 0.5 * (1.0 - s)
    }

    pub fn k_of(&self, s: f64) -> f64 {
        let s = s.clamp(-1.0, 1.0);
        self.k_star + self.k_slope * 0.5 * (1.0 + s)
    }

    pub fn lambda_of(&self, s: f64) -> f64 {
        self.lambda.value(s)
    }

    pub fn lambda_prime_of(&self, s: f64) -> f64 {
        self.lambda.derivative(s)
    }

    pub fn nu_bounds(&self) -> (f64, f64) {
        (self.nu1.min(self.nu2), self.nu1.max(self.nu2))
    }

    pub fn k_bounds(&self) -> (f64, f64) {
        (self.k_star, self.k_star + self.k_slope)
    }

    /// `|nu1 - nu2| / (nu1 + nu2)`; reported, never enforced.
    pub fn viscosity_contrast(&self) -> f64 {
        (self.nu1 - self.nu2).abs() / (self.nu1 + self.nu2)
    }

    /// Darcy friction `g(phi) = nu(phi) (1 - phi) / (2 k(phi))`.
    pub fn darcy_coefficient(&self, phi: f64) -> Result<f64> {
        const TOL: f64 = 1e-9;
        if !(phi.abs() <= 1.0 + TOL) {
            return Err(Error::Domain {
                func: "darcy_coefficient",
                value: phi,
                domain: "[-1, 1]",
            });
        }
        Ok(self.darcy_clamped(phi))
    }

    /// Darcy friction with the argument clamped to `[-1, 1]`.
    pub fn darcy_clamped(&self, phi: f64) -> f64 {
        let s = phi.clamp(-1.0, 1.0);
        self.nu_of(s) * (1.0 - s) / (2.0 * self.k_of(s))
    }
}

/// All constitutive constants.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub potential: PotentialParams,
    pub coeffs: CoefficientParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        self.coeffs.validate()
    }
}
