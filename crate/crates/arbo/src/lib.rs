//! Stage-structured arboviral transmission model with vaccination,
//! protection, treatment and vector control.
//!
//! The crate covers closed-form thresholds, equilibria and their stability,
//! bifurcation coefficients, fixed-step integration, Latin hypercube
//! sensitivity analysis, a forward-backward sweep for the five-control
//! problem and cost-effectiveness post-processing.

pub mod autodiff;
pub mod control;
pub mod econ;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod ode;
pub mod sensitivity;
pub mod stability;
pub mod thresholds;

pub use error::{ArboError, Result};
pub use model::{ControlParams, ControlValues, ModelParams, StateVector};
pub use ode::{TimeGrid, Trajectory};
