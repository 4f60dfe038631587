//! Rotation group acting on a sphere of radius `R`, momentum map `J = −R·Om`.
//!
//! The Gibbs exponent is `−⟨J, b⟩ = R (Om·b)`, which integrates over the sphere
//! (area measure) to `P(b) = 4π sinh(R²‖b‖) / ‖b‖`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::check_positive;
use super::special::{langevin, log_sinhc};
use crate::engine::{AdmissibilityResult, ThermoModel};
use crate::error::{invalid, Result};
use crate::lie::{sphere_momentum, LieAlgebra, So3, Vec3};
use crate::oracle::{Domain, ParticleState, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub radius: f64,
}

impl SphereSpec {
    pub fn new(radius: f64) -> Result<Self> {
        check_positive("radius", radius)?;
        Ok(Self { radius })
    }
}

/// `log 4π + log sinh(R²‖b‖) − log ‖b‖`, tending to `log 4πR²` at `b = 0`.
pub fn sphere_log_partition(spec: &SphereSpec, b: &Vec3) -> f64 {
    let r2 = spec.radius * spec.radius;
    (4.0 * PI * r2).ln() + log_sinhc(r2 * b.norm())
}

/// `(coth y − 1/y) / y`, smooth at `y = 0`.
fn langevin_over_y(y: f64) -> f64 {
    if y < 1e-3 {
        let y2 = y * y;
        1.0 / 3.0 - y2 / 45.0 + 2.0 * y2 * y2 / 945.0
    } else {
        langevin(y) / y
    }
}

/// `E_J(b) = −R² (coth(R²‖b‖) − 1/(R²‖b‖)) b/‖b‖`.
pub fn sphere_mean(spec: &SphereSpec, b: &Vec3) -> Vec3 {
    let r2 = spec.radius * spec.radius;
    -b * (r2 * r2 * langevin_over_y(r2 * b.norm()))
}

/// `ρ_b(m) = exp(R Om·b) / P(b)` with respect to the area measure.
pub fn sphere_density(spec: &SphereSpec, b: &Vec3, point: &Vec3) -> Result<f64> {
    sphere_momentum(point, spec.radius)?;
    Ok((spec.radius * point.dot(b) - sphere_log_partition(spec, b)).exp())
}

#[derive(Debug, Clone)]
pub struct SphereModel {
    pub spec: SphereSpec,
}

impl SphereModel {
    pub fn new(spec: SphereSpec) -> Result<Self> {
        check_positive("radius", spec.radius)?;
        Ok(Self { spec })
    }

    /// Phase point of a sampled state: the point on the sphere.
    pub fn phase_point(state: &ParticleState) -> Vec<f64> {
        state.r.as_slice().to_vec()
    }
}

fn v3(b: &[f64]) -> Vec3 {
    Vec3::new(b[0], b[1], b[2])
}

impl ThermoModel for SphereModel {
    fn name(&self) -> &str {
        "sphere"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &So3
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        if b.len() != 3 {
            AdmissibilityResult::rejected(format!("expected 3 components, got {}", b.len()))
        } else if b.iter().all(|x| x.is_finite()) {
            AdmissibilityResult::ok()
        } else {
            AdmissibilityResult::rejected("b must be finite")
        }
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(Ok(sphere_log_partition(&self.spec, &v3(b))))
    }

    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(Ok(sphere_mean(&self.spec, &v3(b)).as_slice().to_vec()))
    }

    fn phase_domain(&self, _b: &[f64]) -> Result<Domain> {
        Domain::new(vec![Region::SphereSurface {
            radius: self.spec.radius,
        }])
    }

    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != 3 {
            return Err(invalid("sphere phase point has 3 coordinates"));
        }
        Ok(sphere_momentum(&v3(z), self.spec.radius)?.as_slice().to_vec())
    }

    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        -self.spec.radius * v3(z).dot(&v3(b))
    }
}
