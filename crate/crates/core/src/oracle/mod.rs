//! Independent numerical checks: integration over phase-space domains,
//! exact-law samplers for every model, and goodness-of-fit tests.

pub mod batch;
pub mod domain;
pub mod gof;
pub mod integrate;
pub mod rng;
pub mod samplers;

pub use batch::{ParticleState, SampleBatch};
pub use domain::{Domain, Region, MOMENTUM_TAIL};
pub use gof::{chi_square_gof, gof_statistic, GofResult};
pub use integrate::{gauss_legendre, gauss_quadrature, mc_integrate, mean_estimate, Estimate, Moments, CHUNK};
pub use rng::{child_seed, mix64, StreamRng};
