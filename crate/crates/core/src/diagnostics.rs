//! Energy, dissipation and invariant checks.

use serde::Serialize;

use crate::dynamics::{elastic_density, State};
use crate::model::{psi_xi, ModelParams};
use crate::ops::diff::{face_gradient_sq, grad_bc};
use crate::ops::elliptic::relative_divergence;
use crate::ops::Boundary;

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub e_kin: f64,
    pub e_coh: f64,
    pub e_ela: f64,
    pub e_total: f64,
    pub dissipation: f64,
    /// Mean of `phi`.
    pub mass: f64,
    pub max_abs_phi: f64,
    /// `1 - max|phi|`.
    pub separation_margin: f64,
    /// `|div u|_2 min(dx, dy) / |u|_2`.
    pub div_residual: f64,
    /// `(E_new - E_old) / dt + D_new`; zero for the first report.
    pub energy_residual: f64,
}

pub const CSV_HEADER: &str =
    "t,e_kin,e_coh,e_ela,e_total,dissipation,mass,max_abs_phi,separation_margin,div_residual,energy_residual";

impl EnergyReport {
    pub fn csv_row(&self) -> String {
        // `{:e}` round-trips f64 exactly
        [
            self.t,
            self.e_kin,
            self.e_coh,
            self.e_ela,
            self.e_total,
            self.dissipation,
            self.mass,
            self.max_abs_phi,
            self.separation_margin,
            self.div_residual,
            self.energy_residual,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
    }

    /// Fills `energy_residual` relative to the previous report.
    pub fn chain(mut self, previous: &EnergyReport) -> Self {
        let dt = self.t - previous.t;
        if dt > 0.0 {
            self.energy_residual = (self.e_total - previous.e_total) / dt + self.dissipation;
        }
        self
    }
}

pub fn energy(state: &State, params: &ModelParams) -> EnergyReport {
    let g = state.grid();
    let area = g.cell_area();
    let c = &params.coeffs;
    let n = g.len();

    let e_kin = 0.5 * state.u.dot(&state.u);
    let bulk: f64 = state.phi.data.iter().map(|&s| psi_xi(s, &params.potential, 0)).sum::<f64>() * area;
    let e_coh = bulk + 0.5 * c.sigma * face_gradient_sq(&state.phi);
    let dens = elastic_density(&state.psi);
    let e_ela = 0.5 * (0..n).map(|k| c.lambda_of(state.phi.data[k]) * dens.data[k]).sum::<f64>() * area;

    let gx = grad_bc(&state.u.component(0), Boundary::AntiMirror);
    let gy = grad_bc(&state.u.component(1), Boundary::AntiMirror);
    let mut visc = 0.0;
    for k in 0..n {
        let s = state.phi.data[k];
        let shear = 0.5 * (gx.y[k] + gy.x[k]);
        let du2 = gx.x[k] * gx.x[k] + gy.y[k] * gy.y[k] + 2.0 * shear * shear;
        let (ux, uy) = (state.u.x[k], state.u.y[k]);
        visc += c.nu_of(s) * du2 + c.darcy_clamped(s) * (ux * ux + uy * uy);
    }
    let dissipation = visc * area + face_gradient_sq(&state.mu);
    let max_abs_phi = state.phi.max_abs();
    EnergyReport {
        t: state.t,
        e_kin,
        e_coh,
        e_ela,
        e_total: e_kin + e_coh + e_ela,
        dissipation,
        mass: state.phi.mean(),
        max_abs_phi,
        separation_margin: 1.0 - max_abs_phi,
        div_residual: relative_divergence(&state.u),
        energy_residual: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative divergence bound.
    pub divergence: f64,
    /// Allowed energy increase per step, relative to `max(|E0|, 1e-300)`.
    pub energy: f64,
    /// Allowed drift of the mean of `phi`.
    pub mass: f64,
    /// Allowed mean of the pressure.
    pub pressure_mean: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            divergence: 1e-8,
            energy: 1e-8,
            mass: 1e-12,
            pressure_mean: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NonFinite,
    PhaseBound,
    Divergence,
    PressureMean,
    NegativeEnergy,
    EnergyIncrease,
    MassDrift,
    GridMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: &'static str,
    /// Cell `(i, j)` where the worst value occurs, if local.
    pub location: Option<(usize, usize)>,
    pub value: f64,
    pub message: String,
}

/// Reports of the initial and of the previous state, for the time-history checks.
#[derive(Debug, Clone, Copy)]
pub struct History<'a> {
    pub initial: &'a EnergyReport,
    pub previous: &'a EnergyReport,
}

/// Checks every state invariant; never fails, returns all violations found.
pub fn validate(state: &State, params: &ModelParams, tol: &Tolerances, history: Option<History>) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Err(e) = state.ensure_consistent() {
        out.push(Violation {
            kind: ViolationKind::GridMismatch,
            field: "state",
            location: None,
            value: f64::NAN,
            message: e.to_string(),
        });
        return out;
    }
    let g = state.grid();
    let fields: [(&'static str, &[f64]); 7] = [
        ("u_x", &state.u.x),
        ("u_y", &state.u.y),
        ("phi", &state.phi.data),
        ("psi_x", &state.psi.x),
        ("psi_y", &state.psi.y),
        ("mu", &state.mu.data),
        ("pi", &state.pi.data),
    ];
    let mut finite = state.t.is_finite();
    for (name, data) in fields {
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            finite = false;
            out.push(Violation {
                kind: ViolationKind::NonFinite,
                field: name,
                location: Some((k % g.nx, k / g.nx)),
                value: data[k],
                message: format!("non-finite value in {name}"),
            });
        }
    }
    if !finite {
        return out;
    }

    let (kmax, pmax) = state
        .phi
        .data
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bk, bv), (k, v)| if v.abs() > bv { (k, v.abs()) } else { (bk, bv) });
    if pmax >= 1.0 {
        out.push(Violation {
            kind: ViolationKind::PhaseBound,
            field: "phi",
            location: Some((kmax % g.nx, kmax / g.nx)),
            value: state.phi.data[kmax],
            message: format!("|phi| = {pmax} reaches the pure phases"),
        });
    }
    let d = relative_divergence(&state.u);
    if d > tol.divergence {
        out.push(Violation {
            kind: ViolationKind::Divergence,
            field: "u",
            location: None,
            value: d,
            message: format!("relative divergence {d:.3e} exceeds {:.1e}", tol.divergence),
        });
    }
    let pm = state.pi.mean();
    if pm.abs() > tol.pressure_mean * state.pi.max_abs().max(1.0) {
        out.push(Violation {
            kind: ViolationKind::PressureMean,
            field: "pi",
            location: None,
            value: pm,
            message: format!("pressure mean {pm:.3e} is not zero"),
        });
    }
    let rep = energy(state, params);
    for (name, v) in [("e_kin", rep.e_kin), ("e_ela", rep.e_ela), ("dissipation", rep.dissipation)] {
        if v < 0.0 {
            out.push(Violation {
                kind: ViolationKind::NegativeEnergy,
                field: name,
                location: None,
                value: v,
                message: format!("{name} = {v:.3e} is negative"),
            });
        }
    }
    if let Some(h) = history {
        let allowed = tol.energy * h.initial.e_total.abs().max(1e-300);
        let inc = rep.e_total - h.previous.e_total;
        if inc > allowed {
            out.push(Violation {
                kind: ViolationKind::EnergyIncrease,
                field: "e_total",
                location: None,
                value: inc,
                message: format!("energy increased by {inc:.3e} (allowed {allowed:.1e})"),
            });
        }
        let drift = rep.mass - h.initial.mass;
        if drift.abs() > tol.mass {
            out.push(Violation {
                kind: ViolationKind::MassDrift,
                field: "phi",
                location: None,
                value: drift,
                message: format!("mean of phi drifted by {drift:.3e}"),
            });
        }
    }
    out
}
