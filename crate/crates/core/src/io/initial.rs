//! Named initial-condition presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ops::elliptic::project;
use crate::ops::{Grid2D, ScalarField, VectorField};

fn default_amplitude() -> f64 {
    0.9
}

fn default_one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Interface normal along `x`.
    X,
    /// Interface normal along `y`.
    Y,
}

/// Phase field presets. Thrombus is `phi = -1`, blood `phi = +1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiPreset {
    Constant {
        value: f64,
    },
    /// `mean + amplitude cos(kx pi x / lx) cos(ky pi y / ly)`.
    CosineMode {
        #[serde(default = "default_one")]
        kx: u32,
        #[serde(default)]
        ky: u32,
        amplitude: f64,
        #[serde(default)]
        mean: f64,
    },
    /// `amplitude tanh((x - position) / width)` (or along `y`); `position`
    /// defaults to the domain midpoint.
    TanhInterface {
        width: f64,
        orientation: Orientation,
        #[serde(default)]
        position: Option<f64>,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// `mean` plus i.i.d. uniform noise in `[-amplitude, amplitude]`; the seed
    /// falls back to the run seed.
    RandomSpinodal {
        amplitude: f64,
        #[serde(default)]
        mean: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// `amplitude tanh((r - radius) / width)`: thrombus disc around `center`.
    ThrombusBlob {
        radius: f64,
        center: [f64; 2],
        width: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityPreset {
    #[default]
    Zero,
    /// `u_x = amplitude sin(2 pi y / ly)`, made discretely solenoidal by projection.
    Shear { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiPreset {
    Constant {
        value: [f64; 2],
    },
    /// `psi(x) = x`: the undeformed configuration.
    #[default]
    Identity,
}

impl PhiPreset {
    /// Largest `|phi|` the preset can produce.
    pub fn bound(&self) -> f64 {
        match self {
            PhiPreset::Constant { value } => value.abs(),
            PhiPreset::CosineMode { amplitude, mean, .. } => mean.abs() + amplitude.abs(),
            PhiPreset::TanhInterface { amplitude, .. } | PhiPreset::ThrombusBlob { amplitude, .. } => amplitude.abs(),
            PhiPreset::RandomSpinodal { amplitude, mean, .. } => mean.abs() + amplitude.abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            PhiPreset::TanhInterface { width, .. } | PhiPreset::ThrombusBlob { width, .. } if !(*width > 0.0) => {
                bad(format!("interface width must be positive, got {width}"))
            }
            PhiPreset::ThrombusBlob { radius, .. } if !(*radius > 0.0) => {
                bad(format!("blob radius must be positive, got {radius}"))
            }
            PhiPreset::RandomSpinodal { amplitude, .. } | PhiPreset::CosineMode { amplitude, .. }
                if !amplitude.is_finite() =>
            {
                bad("amplitude must be finite".into())
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, grid: Grid2D, run_seed: u64) -> ScalarField {
        use std::f64::consts::PI;
        match self {
            PhiPreset::Constant { value } => ScalarField::constant(grid, *value),
            PhiPreset::CosineMode { kx, ky, amplitude, mean } => ScalarField::from_fn(grid, |x, y| {
                mean + amplitude * (*kx as f64 * PI * x / grid.lx).cos() * (*ky as f64 * PI * y / grid.ly).cos()
            }),
            PhiPreset::TanhInterface {
                width,
                orientation,
                position,
                amplitude,
            } => ScalarField::from_fn(grid, |x, y| {
                let (c, mid) = match orientation {
                    Orientation::X => (x, 0.5 * grid.lx),
                    Orientation::Y => (y, 0.5 * grid.ly),
                };
                amplitude * ((c - position.unwrap_or(mid)) / width).tanh()
            }),
            PhiPreset::RandomSpinodal { amplitude, mean, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run_seed));
                let data = (0..grid.len()).map(|_| mean + amplitude * rng.gen_range(-1.0..=1.0)).collect();
                ScalarField { grid, data }
            }
            PhiPreset::ThrombusBlob {
                radius,
                center,
                width,
                amplitude,
            } => ScalarField::from_fn(grid, |x, y| {
                let r = ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt();
                amplitude * ((r - radius) / width).tanh()
            }),
        }
    }
}

impl VelocityPreset {
    pub fn build(&self, grid: Grid2D) -> Result<VectorField> {
        match self {
            VelocityPreset::Zero => Ok(VectorField::zeros(grid)),
            VelocityPreset::Shear { amplitude } => {
                let raw = VectorField::from_fn(grid, |_, y| {
                    (amplitude * (2.0 * std::f64::consts::PI * y / grid.ly).sin(), 0.0)
                });
                Ok(project(&raw, 1.0)?.0)
            }
        }
    }
}

impl PsiPreset {
    pub fn build(&self, grid: Grid2D) -> VectorField {
        match self {
            PsiPreset::Constant { value } => VectorField::from_fn(grid, |_, _| (value[0], value[1])),
            PsiPreset::Identity => VectorField::from_fn(grid, |x, y| (x, y)),
        }
    }
}

/// Initial data section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub phi: PhiPreset,
    #[serde(default)]
    pub u: VelocityPreset,
    #[serde(default)]
    pub psi: PsiPreset,
}

impl InitialSpec {
    /// Builds the state and checks `max |phi| <= 1 - xi` and `|mean phi| < 1`.
    pub fn build(&self, grid: Grid2D, params: &ModelParams, seed: u64) -> Result<State> {
        let phi = self.phi.build(grid, seed);
        let limit = 1.0 - params.potential.xi;
        if phi.max_abs() > limit {
            return Err(Error::InvalidParameter(format!(
                "initial phi reaches {} > 1 - xi = {limit}",
                phi.max_abs()
            )));
        }
        let mut state = State::at_rest(phi, self.psi.build(grid), params)?;
        state.u = self.u.build(grid)?;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(16, 12, 1.0, 0.75).unwrap()
    }

    #[test]
    fn random_spinodal_is_seeded() {
        let p = PhiPreset::RandomSpinodal {
            amplitude: 0.05,
            mean: 0.0,
            seed: None,
        };
        assert_eq!(p.build(grid(), 7), p.build(grid(), 7));
        assert_ne!(p.build(grid(), 7), p.build(grid(), 8));
        assert!(p.build(grid(), 7).max_abs() <= 0.05);
    }

    #[test]
    fn blob_is_thrombus_inside() {
        let p = PhiPreset::ThrombusBlob {
            radius: 0.2,
            center: [0.5, 0.375],
            width: 0.05,
            amplitude: 0.9,
        };
        let f = p.build(grid(), 0);
        assert!(f.get(8, 6) < -0.8);
        assert!(f.get(0, 0) > 0.8);
    }

    #[test]
    fn shear_is_solenoidal() {
        let u = VelocityPreset::Shear { amplitude: 1.0 }.build(grid()).unwrap();
        assert!(crate::ops::elliptic::relative_divergence(&u) < 1e-9);
        assert!(u.max_speed() > 0.5);
    }

    #[test]
    fn rejects_phase_outside_band() {
        let spec = InitialSpec {
            phi: PhiPreset::Constant { value: 0.99995 },
            u: VelocityPreset::Zero,
            psi: PsiPreset::Identity,
        };
        assert!(spec.build(grid(), &ModelParams::default(), 0).is_err());
    }
}
