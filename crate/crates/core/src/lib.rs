//! Classical and generalized Gibbs states.
//!
//! [`engine`] computes thermodynamic functions for any [`engine::ThermoModel`];
//! [`models`] holds the concrete models with closed-form partition functions;
//! [`oracle`] integrates and samples independently of those closed forms;
//! [`mechanics`] integrates Hamiltonian flows for conservation and invariance
//! checks.

pub mod engine;
pub mod error;
pub mod lie;
pub mod mechanics;
pub mod models;
pub mod oracle;
pub mod verify;

pub use engine::{AdmissibilityResult, Engine, ThermoModel, ThermoReport};
pub use error::{GibbsError, Result};
