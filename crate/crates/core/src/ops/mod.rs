//! Grid, fields, finite-difference operators and elliptic solves.

pub mod cg;
pub mod diff;
pub mod elliptic;
pub mod field;
pub mod grid;
pub mod spectral;

pub use cg::{CgSettings, CgStats};
pub use diff::{div, grad, laplace_neumann, laplace_noslip};
pub use elliptic::{filter_scalar, filter_velocity, project, solve_helmholtz_neumann};
pub use field::{ScalarField, VectorField};
pub use grid::{Boundary, Grid2D};
