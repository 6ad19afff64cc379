//! Regularization cascade: trajectories of the Leray-alpha stepper for a
//! decreasing sequence of filter widths, and for several potential
//! regularizations on separated data.

use serde::Serialize;

use crate::dynamics::{step_regularized, SolverConfig, State};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Fixed initial data, solver settings and horizon of a cascade.
#[derive(Debug, Clone)]
pub struct CascadeScenario {
    pub initial: State,
    pub config: SolverConfig,
    pub params: ModelParams,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    pub alphas: Vec<f64>,
    /// Distance of each positive-alpha trajectory to the `alpha = 0` one.
    pub alpha_distances: Vec<f64>,
    pub xis: Vec<f64>,
    /// Distance of each `xi` trajectory (at `alpha = 0`) to the last one.
    pub xi_distances: Vec<f64>,
    /// `max |phi|` over every run, to document that the `xi` runs stayed separated.
    pub max_abs_phi: f64,
}

impl CascadeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("parameter,value,distance\n");
        for (a, d) in self.alphas.iter().zip(&self.alpha_distances) {
            s.push_str(&format!("alpha,{a:e},{d:e}\n"));
        }
        for (x, d) in self.xis.iter().zip(&self.xi_distances) {
            s.push_str(&format!("xi,{x:e},{d:e}\n"));
        }
        s
    }

    /// Strict decrease of the alpha distances along the given order.
    pub fn alpha_monotone(&self) -> bool {
        self.alpha_distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Grid-normalized L2 distance over `(u, phi, psi)`.
pub fn trajectory_distance(a: &State, b: &State) -> f64 {
    let sq = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    let s = sq(&a.u.x, &b.u.x)
        + sq(&a.u.y, &b.u.y)
        + sq(&a.phi.data, &b.phi.data)
        + sq(&a.psi.x, &b.psi.x)
        + sq(&a.psi.y, &b.psi.y);
    (s / a.phi.data.len() as f64).sqrt()
}

fn run(sc: &CascadeScenario, alpha: f64, xi: f64, max_phi: &mut f64) -> Result<State> {
    let steps = (sc.t_end / sc.config.dt).round() as usize;
    let mut s = sc.initial.clone();
    for _ in 0..steps {
        s = step_regularized(&s, &sc.config, &sc.params, alpha, xi)?;
        *max_phi = max_phi.max(s.phi.max_abs());
    }
    Ok(s)
}

/// `alphas` must be positive and decreasing; the reference run uses `alpha = 0`.
pub fn cascade_study(sc: &CascadeScenario, alphas: &[f64], xis: &[f64]) -> Result<CascadeReport> {
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]) && v.iter().all(|x| *x > 0.0);
    if !decreasing(alphas) || !decreasing(xis) {
        return Err(Error::InvalidParameter(
            "cascade parameters must be positive and strictly decreasing".into(),
        ));
    }
    let xi0 = sc.params.potential.xi;
    let mut max_phi = 0.0;
    let reference = run(sc, 0.0, xi0, &mut max_phi)?;
    let mut alpha_distances = Vec::new();
    for &a in alphas {
        alpha_distances.push(trajectory_distance(&run(sc, a, xi0, &mut max_phi)?, &reference));
    }
    let mut xi_runs = Vec::new();
    for &x in xis {
        xi_runs.push(run(sc, 0.0, x, &mut max_phi)?);
    }
    let xi_distances = match xi_runs.last() {
        Some(last) => xi_runs.iter().map(|s| trajectory_distance(s, last)).collect(),
        None => Vec::new(),
    };
    Ok(CascadeReport {
        alphas: alphas.to_vec(),
        alpha_distances,
        xis: xis.to_vec(),
        xi_distances,
        max_abs_phi: max_phi,
    })
}
