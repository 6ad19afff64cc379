//! Independent oracles: explicit reference stepper, manufactured solutions,
//! the linear spinodal rate and the regularization cascade.

pub mod cascade;
pub mod mms;
pub mod reference;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub use cascade::{cascade_study, trajectory_distance, CascadeReport, CascadeScenario};
pub use mms::{manufactured_solution_study, manufactured_temporal_study, Subproblem};
pub use reference::explicit_reference_step;

/// Errors of a refinement study and their least-squares log-log slopes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub label: String,
    /// Refinement parameter per level (mesh width or time step), coarse first.
    pub h: Vec<f64>,
    pub err_l2: Vec<f64>,
    pub err_inf: Vec<f64>,
    pub order_l2: f64,
    pub order_inf: f64,
}

impl ConvergenceTable {
    pub fn new(label: impl Into<String>, h: Vec<f64>, err_l2: Vec<f64>, err_inf: Vec<f64>) -> Result<Self> {
        if h.len() < 3 || err_l2.len() != h.len() || err_inf.len() != h.len() {
            return Err(Error::InvalidParameter(
                "a convergence table needs at least 3 levels with one error per level".into(),
            ));
        }
        let order_l2 = fit_order(&h, &err_l2);
        let order_inf = fit_order(&h, &err_inf);
        Ok(Self {
            label: label.into(),
            h,
            err_l2,
            err_inf,
            order_l2,
            order_inf,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,err_l2,err_inf\n");
        for k in 0..self.h.len() {
            s.push_str(&format!("{:e},{:e},{:e}\n", self.h[k], self.err_l2[k], self.err_inf[k]));
        }
        s
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_order(h: &[f64], e: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Linear growth rate `-kappa^2 (Psi''(0) + sigma kappa^2)` of a Fourier mode
/// of a small perturbation of the mixed state.
pub fn spinodal_growth_oracle(kappa: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let p = &params.potential;
    let psi2 = p.theta - p.theta0;
    Ok(-kappa * kappa * (psi2 + params.coeffs.sigma * kappa * kappa))
}
