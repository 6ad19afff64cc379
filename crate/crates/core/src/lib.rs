//! Phase-field model of thrombus growth in blood flow: a Cahn-Hilliard
//! phase variable with a logarithmic potential, coupled to an incompressible
//! viscoelastic flow whose elastic strain is carried by a transported vector
//! potential.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod ops;
pub mod runner;
pub mod transport;
pub mod verification;

pub use error::{Error, Result};
