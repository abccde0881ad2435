//! Kinetic Monte Carlo for a two-species Kac system (passive particles that
//! only exchange with a thermostat of active particles) together with the
//! moment equations and the relaxation-equation limit.

pub mod bgk;
pub mod cli;
pub mod error;
pub mod fit;
pub mod model;
pub mod moment_ode;
pub mod observables;
pub mod quadrature;
pub mod sampler;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{ModelParams, SystemState};
