//! Concrete models with closed-form partition functions.
//!
//! Gas-like models lay out a phase point as `[r₁, p₁, r₂, p₂, …]`, six
//! coordinates per particle; the sphere uses the three coordinates of the
//! point on the sphere.

pub mod gravity;
pub mod ideal;
pub mod relativistic;
pub mod solid;
pub mod special;
pub mod sphere;
pub mod vessel;

use serde::{Deserialize, Serialize};

pub use gravity::{
    gravity_altitude_density, gravity_gas_energy, gravity_gas_log_partition, GravityGas, GravityGasSpec,
};
pub use ideal::{
    ideal_gas_energy, ideal_gas_entropy, ideal_gas_log_partition, ideal_gas_pressure, IdealGas, IdealGasSpec,
};
pub use relativistic::{
    massless_log_partition, photon_log_partition, photon_number_pmf, relativistic_energy, relativistic_log_partition,
    MasslessGas, MasslessGasSpec, PhotonGas, PhotonGasSpec, RelativisticGas, RelativisticGasSpec,
};
pub use solid::{solid_log_partition, Solid, SolidSpec};
pub use sphere::{sphere_density, sphere_log_partition, sphere_mean, SphereModel, SphereSpec};
pub use vessel::{
    centrifuge_mean_radius, centrifuge_radial_density, drift_velocity, frame_potential, vessel_coupling,
    vessel_log_partition, Vessel, VesselGeometry, VesselSpec,
};

use crate::engine::ThermoModel;
use crate::error::{invalid, GibbsError, Result};
use crate::lie::Vec3;
use crate::oracle::{samplers, SampleBatch};

pub(crate) fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be positive and finite, got {v}")))
    }
}

pub(crate) fn check_masses(masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(invalid("need at least one particle"));
    }
    masses.iter().try_for_each(|m| check_positive("mass", *m))
}

pub(crate) fn inadmissible_scalar(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(GibbsError::Inadmissible(format!("b must be > 0, got {b}")))
    }
}

pub(crate) fn log_n_factorial(flag: bool, n: usize) -> f64 {
    if flag {
        special::ln_factorial(n)
    } else {
        0.0
    }
}

pub(crate) fn kinetic(p: Vec3, m: f64) -> f64 {
    p.norm_squared() / (2.0 * m)
}

/// Iterates `(r, p)` pairs of a gas phase point.
pub(crate) struct GasLayout;

impl GasLayout {
    pub(crate) fn particles(z: &[f64]) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        z.chunks_exact(6)
            .map(|c| (Vec3::new(c[0], c[1], c[2]), Vec3::new(c[3], c[4], c[5])))
    }
}

/// Model selected by the `"model"` key of a JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    IdealGas(IdealGasSpec),
    GravityGas(GravityGasSpec),
    RelativisticGas(RelativisticGasSpec),
    MasslessGas(MasslessGasSpec),
    PhotonGas(PhotonGasSpec),
    Solid(SolidSpec),
    Sphere(SphereSpec),
    Vessel(VesselSpec),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::IdealGas(_) => "ideal_gas",
            ModelSpec::GravityGas(_) => "gravity_gas",
            ModelSpec::RelativisticGas(_) => "relativistic_gas",
            ModelSpec::MasslessGas(_) => "massless_gas",
            ModelSpec::PhotonGas(_) => "photon_gas",
            ModelSpec::Solid(_) => "solid",
            ModelSpec::Sphere(_) => "sphere",
            ModelSpec::Vessel(_) => "vessel",
        }
    }

    pub fn build(&self) -> Result<Box<dyn ThermoModel>> {
        Ok(match self {
            ModelSpec::IdealGas(s) => Box::new(IdealGas::new(s.clone())?),
            ModelSpec::GravityGas(s) => Box::new(GravityGas::new(s.clone())?),
            ModelSpec::RelativisticGas(s) => Box::new(RelativisticGas::new(s.clone())?),
            ModelSpec::MasslessGas(s) => Box::new(MasslessGas::new(s.clone())?),
            ModelSpec::PhotonGas(s) => Box::new(PhotonGas::new(s.clone())?),
            ModelSpec::Solid(s) => Box::new(Solid::new(s.clone())?),
            ModelSpec::Sphere(s) => Box::new(SphereModel::new(s.clone())?),
            ModelSpec::Vessel(s) => Box::new(Vessel::new(s.clone())?),
        })
    }

    /// Exact draws from `ρ_b`.
    pub fn sample(&self, b: &[f64], n: usize, seed: u64) -> Result<SampleBatch> {
        let scalar = || -> Result<f64> {
            match b {
                [x] => Ok(*x),
                _ => Err(invalid(format!("{} takes a scalar b", self.name()))),
            }
        };
        match self {
            ModelSpec::IdealGas(s) => samplers::sample_ideal(s, scalar()?, n, seed),
            ModelSpec::GravityGas(s) => samplers::sample_gravity(s, scalar()?, n, seed),
            ModelSpec::RelativisticGas(s) => samplers::sample_relativistic_gas(s, scalar()?, n, seed),
            ModelSpec::MasslessGas(s) => samplers::sample_massless(s, scalar()?, n, seed),
            ModelSpec::Solid(s) => samplers::sample_solid(s, scalar()?, n, seed),
            ModelSpec::Sphere(s) => match b {
                [x, y, z] => samplers::sample_sphere(s, &Vec3::new(*x, *y, *z), n, seed),
                _ => Err(invalid("sphere takes a 3-component b")),
            },
            ModelSpec::Vessel(s) => {
                let el = crate::lie::GalileanAlgebraElement::from_slice(b)?;
                samplers::sample_vessel(s, &el, n, seed)
            }
            ModelSpec::PhotonGas(_) => Err(GibbsError::Unsupported {
                model: self.name().into(),
                what: "the photon gas has a variable particle number and no fixed phase space".into(),
            }),
        }
    }
}
