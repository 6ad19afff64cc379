//! Coupled first-order time step for `(u, pi, phi, mu, psi)`.
//!
//! Sub-steps in order: transport of `psi` along backtracked characteristics,
//! the Cahn-Hilliard solve for `(phi, mu)`, then momentum and projection.

pub mod cahn_hilliard;
pub mod forcing;
pub mod momentum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mollify_lambda, Coefficient, ModelParams};
use crate::ops::cg::CgSettings;
use crate::ops::elliptic::{filter_scalar_with, filter_velocity_with, relative_divergence};
use crate::ops::{Grid2D, ScalarField, VectorField};
use crate::transport::{advect_psi, backtrack, courant_number, monitor_jacobian};

pub use cahn_hilliard::{solve_cahn_hilliard, ChInputs, NewtonReport};
pub use forcing::{chemical_potential, elastic_density, momentum_forcing, ForcingForm};
pub use momentum::{solve_momentum, MomentumInputs, MomentumReport};

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: VectorField,
    pub phi: ScalarField,
    pub psi: VectorField,
    /// Chemical potential of the last Cahn-Hilliard solve.
    pub mu: ScalarField,
    /// Zero-mean pressure of the last projection.
    pub pi: ScalarField,
}

impl State {
    /// Fluid at rest, `psi` constant; `mu` is computed from `phi`.
    pub fn at_rest(phi: ScalarField, psi: VectorField, params: &ModelParams) -> Result<Self> {
        let g = phi.grid;
        let mu = chemical_potential(&phi, &psi, params)?;
        Ok(Self {
            t: 0.0,
            u: VectorField::zeros(g),
            phi,
            psi,
            mu,
            pi: ScalarField::zeros(g),
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.phi.grid
    }

    pub fn ensure_consistent(&self) -> Result<()> {
        let g = self.grid();
        self.u.ensure_grid(&g)?;
        self.psi.ensure_grid(&g)?;
        self.mu.ensure_grid(&g)?;
        self.pi.ensure_grid(&g)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.u.is_finite()
            && self.phi.is_finite()
            && self.psi.is_finite()
            && self.mu.is_finite()
            && self.pi.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SemiImplicit,
    /// Fully explicit reference stepper (small `dt` only).
    ExplicitReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max: usize,
    pub scheme: Scheme,
    pub use_potential_form_forcing: bool,
    /// Leray-alpha filter width; `0` disables regularization.
    pub alpha_filter: f64,
    /// Helmholtz passes of the velocity filter.
    pub filter_passes: u8,
    pub picard_max: usize,
    pub picard_tol: f64,
    /// Courant number above which a warning is recorded.
    pub cfl_advisory: f64,
    pub linear: CgSettings,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            newton_tol: 1e-10,
            newton_max: 50,
            scheme: Scheme::SemiImplicit,
            use_potential_form_forcing: true,
            alpha_filter: 0.0,
            filter_passes: 2,
            picard_max: 5,
            picard_tol: 1e-10,
            cfl_advisory: 1.0,
            linear: CgSettings::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.newton_tol > 0.0) || self.newton_max == 0 {
            return bad("newton_tol must be positive and newton_max at least 1".into());
        }
        if !(self.alpha_filter >= 0.0 && self.alpha_filter.is_finite()) {
            return bad(format!("alpha_filter must be >= 0, got {}", self.alpha_filter));
        }
        if !(1..=2).contains(&self.filter_passes) {
            return bad(format!("filter_passes must be 1 or 2, got {}", self.filter_passes));
        }
        if !(self.linear.tol > 0.0 && self.linear.tol < 1.0) {
            return bad(format!("linear tolerance must lie in (0, 1), got {}", self.linear.tol));
        }
        Ok(())
    }

    pub fn forcing_form(&self) -> ForcingForm {
        if self.use_potential_form_forcing {
            ForcingForm::Potential
        } else {
            ForcingForm::Divergence
        }
    }
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepInfo {
    pub newton: NewtonReport,
    pub momentum: MomentumReport,
    pub courant: f64,
    /// Range of the departure-map Jacobian and its expected bound.
    pub jacobian: (f64, f64, f64),
    /// `|v|_2` of the advecting velocity and `|u|_2` it was filtered from.
    pub advecting_norm: f64,
    pub velocity_norm: f64,
    pub divergence: f64,
    pub warnings: Vec<String>,
}

pub fn step(state: &State, config: &SolverConfig, params: &ModelParams) -> Result<State> {
    step_with_info(state, config, params).map(|r| r.0)
}

/// One step of the configured scheme; a positive `alpha_filter` selects the
/// regularized stepper.
pub fn step_with_info(state: &State, config: &SolverConfig, params: &ModelParams) -> Result<(State, StepInfo)> {
    match config.scheme {
        Scheme::ExplicitReference => {
            let next = crate::verification::explicit_reference_step(state, config.dt, params)?;
            Ok((next, StepInfo::default()))
        }
        Scheme::SemiImplicit => advance(state, config, params, config.alpha_filter, params.potential.xi),
    }
}

pub fn step_regularized(
    state: &State,
    config: &SolverConfig,
    params: &ModelParams,
    alpha: f64,
    xi: f64,
) -> Result<State> {
    step_regularized_with_info(state, config, params, alpha, xi).map(|r| r.0)
}

/// Leray-alpha step: advecting velocities are `filter_velocity(u)`, the
/// viscosity sees `filter_scalar(phi)`, and `lambda` is mollified. With
/// `alpha = 0` this is exactly [`step`].
pub fn step_regularized_with_info(
    state: &State,
    config: &SolverConfig,
    params: &ModelParams,
    alpha: f64,
    xi: f64,
) -> Result<(State, StepInfo)> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(xi > 0.0 && xi < 0.5) {
        return Err(Error::InvalidParameter(format!("xi must lie in (0, 1/2), got {xi}")));
    }
    advance(state, config, params, alpha, xi)
}

fn advance(state: &State, config: &SolverConfig, params: &ModelParams, alpha: f64, xi: f64) -> Result<(State, StepInfo)> {
    config.validate()?;
    state.ensure_consistent()?;
    if !state.is_finite() {
        return Err(Error::InvalidParameter("state has non-finite values".into()));
    }
    let dt = config.dt;
    let lin = &config.linear;
    let mut potential = params.potential;
    potential.xi = xi;
    let mollified;
    let lambda: &dyn Coefficient = if alpha > 0.0 {
        mollified = mollify_lambda(&params.coeffs.lambda, alpha)?;
        &mollified
    } else {
        &params.coeffs.lambda
    };

    let mut info = StepInfo::default();
    let v = filter_velocity_with(&state.u, alpha, config.filter_passes, lin)?;
    info.advecting_norm = v.norm_l2();
    info.velocity_norm = state.u.norm_l2();
    info.courant = courant_number(&v, dt);
    if info.courant > config.cfl_advisory {
        let msg = format!("courant number {:.3} exceeds advisory {}", info.courant, config.cfl_advisory);
        log::warn!("t = {:.6e}: {msg}", state.t);
        info.warnings.push(msg);
    }

    // (1) potential transport
    let map = backtrack(&v, dt)?;
    info.jacobian = monitor_jacobian(&v, &map);
    let psi = advect_psi(&state.psi, &map)?;

    // (2) Cahn-Hilliard with the fresh elastic density
    let e = elastic_density(&psi);
    let elastic = ScalarField {
        grid: e.grid,
        data: e
            .data
            .iter()
            .zip(&state.phi.data)
            .map(|(d, &s)| 0.5 * lambda.derivative(s) * d)
            .collect(),
    };
    let moving = v.max_abs() > 0.0;
    let ch = ChInputs {
        phi_old: &state.phi,
        advect: moving.then_some(&v),
        elastic: Some(&elastic),
        source: None,
        dt,
        sigma: params.coeffs.sigma,
        potential,
    };
    let (phi, mu, newton) = solve_cahn_hilliard(&ch, config.newton_tol, config.newton_max, lin)?;
    info.newton = newton;

    // (3) momentum and projection
    let f = forcing::momentum_forcing_with(&phi, &mu, &psi, params.coeffs.sigma, lambda, config.forcing_form())?;
    let nu_arg = filter_scalar_with(&phi, alpha, lin)?;
    let mi = MomentumInputs {
        u_old: &state.u,
        advecting: Some(&v),
        nu_arg: &nu_arg,
        darcy_arg: &phi,
        forcing: &f,
        dt,
    };
    let (u, pi, mom) = solve_momentum(&mi, &params.coeffs, config.picard_max, config.picard_tol, lin)?;
    info.momentum = mom;
    info.divergence = relative_divergence(&u);

    let next = State {
        t: state.t + dt,
        u,
        phi,
        psi,
        mu,
        pi,
    };
    if !next.is_finite() {
        return Err(Error::NonConvergence {
            solver: "step",
            iterations: 1,
            residual: f64::NAN,
        });
    }
    Ok((next, info))
}
