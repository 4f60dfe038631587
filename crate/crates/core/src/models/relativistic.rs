//! Relativistic, massless and photon gases.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::{bessel_k2_scaled, bessel_k_scaled, ln_factorial, log_bessel_k2};
use super::{check_masses, check_positive, inadmissible_scalar, log_n_factorial, GasLayout};
use crate::engine::{positive_scalar, AdmissibilityResult, ThermoModel};
use crate::error::{GibbsError, Result};
use crate::lie::{Abelian, LieAlgebra};
use crate::oracle::{Domain, Region, MOMENTUM_TAIL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativisticGasSpec {
    pub volume: f64,
    pub light_speed: f64,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub indistinguishable: bool,
}

impl RelativisticGasSpec {
    pub fn new(volume: f64, light_speed: f64, masses: Vec<f64>) -> Result<Self> {
        let s = Self {
            volume,
            light_speed,
            masses,
            indistinguishable: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("volume", self.volume)?;
        check_positive("light_speed", self.light_speed)?;
        check_masses(&self.masses)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }
}

/// `Σᵢ [log(4πVc/b) + 2 log mᵢ + log K₂(mᵢbc²)]`.
pub fn relativistic_log_partition(spec: &RelativisticGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    let c = spec.light_speed;
    let base = (4.0 * PI * spec.volume * c / b).ln();
    let mut sum = 0.0;
    for m in &spec.masses {
        sum += base + 2.0 * m.ln() + log_bessel_k2(m * b * c * c)?;
    }
    Ok(sum - log_n_factorial(spec.indistinguishable, spec.n()))
}

/// `E(b) = Σᵢ [3/b + mᵢc² K₁(x)/K₂(x)]`, `x = mᵢbc²`.
pub fn relativistic_energy(spec: &RelativisticGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    let c2 = spec.light_speed * spec.light_speed;
    let mut sum = 0.0;
    for m in &spec.masses {
        let x = m * b * c2;
        sum += 3.0 / b + m * c2 * bessel_k_scaled(1, x)? / bessel_k2_scaled(x)?;
    }
    Ok(sum)
}

#[derive(Debug, Clone)]
pub struct RelativisticGas {
    pub spec: RelativisticGasSpec,
}

impl RelativisticGas {
    pub fn new(spec: RelativisticGasSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn hamiltonian(&self, z: &[f64]) -> f64 {
        let c = self.spec.light_speed;
        GasLayout::particles(z)
            .zip(&self.spec.masses)
            .map(|((_, p), m)| c * (p.norm_squared() + m * m * c * c).sqrt())
            .sum()
    }
}

impl ThermoModel for RelativisticGas {
    fn name(&self) -> &str {
        "relativistic_gas"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &Abelian(1)
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        positive_scalar(b)
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(relativistic_log_partition(&self.spec, b[0]))
    }

    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(relativistic_energy(&self.spec, b[0]).map(|e| vec![e]))
    }

    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        inadmissible_scalar(b[0])?;
        let c = self.spec.light_speed;
        let side = self.spec.volume.cbrt();
        let tol = MOMENTUM_TAIL / self.spec.n() as f64;
        let mut regions = Vec::new();
        for m in &self.spec.masses {
            // exp(−bc√(p² + m²c²)) ≤ exp(−bcp): bound the tail by the massless
            // one, rescaled by the ratio of the two momentum integrals
            let x = m * b[0] * c * c;
            let ratio = 2.0 / (x * x * bessel_k2_scaled(x)? * (-x).exp());
            let ball = Region::exponential_momentum_ball(b[0] * c, tol / ratio);
            let Region::MomentumBall { radius, tail_bound } = ball else {
                unreachable!("exponential_momentum_ball returns a ball")
            };
            regions.push(Region::cube(side));
            regions.push(Region::MomentumBall {
                radius,
                tail_bound: tail_bound * ratio,
            });
        }
        Domain::new(regions)
    }

    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.hamiltonian(z)])
    }

    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        b[0] * self.hamiltonian(z)
    }
}

/// `N` massless particles with `H = c‖p‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasslessGasSpec {
    pub volume: f64,
    pub light_speed: f64,
    pub particles: usize,
    #[serde(default)]
    pub indistinguishable: bool,
}

impl MasslessGasSpec {
    pub fn new(volume: f64, light_speed: f64, particles: usize) -> Result<Self> {
        let s = Self {
            volume,
            light_speed,
            particles,
            indistinguishable: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("volume", self.volume)?;
        check_positive("light_speed", self.light_speed)
    }
}

/// `n log(8πV / (c³b³))`.
pub fn massless_log_partition(volume: f64, c: f64, n: usize, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    Ok(n as f64 * (8.0 * PI * volume / (c * b).powi(3)).ln())
}

#[derive(Debug, Clone)]
pub struct MasslessGas {
    pub spec: MasslessGasSpec,
}

impl MasslessGas {
    pub fn new(spec: MasslessGasSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn hamiltonian(&self, z: &[f64]) -> f64 {
        GasLayout::particles(z)
            .map(|(_, p)| self.spec.light_speed * p.norm())
            .sum()
    }
}

impl ThermoModel for MasslessGas {
    fn name(&self) -> &str {
        "massless_gas"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &Abelian(1)
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        positive_scalar(b)
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        let s = &self.spec;
        Some(
            massless_log_partition(s.volume, s.light_speed, s.particles, b[0])
                .map(|v| v - log_n_factorial(s.indistinguishable, s.particles)),
        )
    }

    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(inadmissible_scalar(b[0]).map(|_| vec![3.0 * self.spec.particles as f64 / b[0]]))
    }

    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        inadmissible_scalar(b[0])?;
        if self.spec.particles == 0 {
            return Err(crate::error::invalid(
                "massless gas with no particles has no phase space",
            ));
        }
        let tol = MOMENTUM_TAIL / self.spec.particles as f64;
        let side = self.spec.volume.cbrt();
        let regions = (0..self.spec.particles)
            .flat_map(|_| {
                [
                    Region::cube(side),
                    Region::exponential_momentum_ball(b[0] * self.spec.light_speed, tol),
                ]
            })
            .collect();
        Domain::new(regions)
    }

    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.hamiltonian(z)])
    }

    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        b[0] * self.hamiltonian(z)
    }
}

/// Photon gas with a variable number of particles, two polarizations each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonGasSpec {
    pub volume: f64,
    pub light_speed: f64,
}

impl PhotonGasSpec {
    pub fn new(volume: f64, light_speed: f64) -> Result<Self> {
        let s = Self { volume, light_speed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("volume", self.volume)?;
        check_positive("light_speed", self.light_speed)
    }
}

/// `log P = λ = 16πV / (c³b³)`, also the mean photon number.
pub fn photon_log_partition(volume: f64, c: f64, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    Ok(16.0 * PI * volume / (c * b).powi(3))
}

/// Probability of `n` photons: Poisson with mean `λ`.
pub fn photon_number_pmf(volume: f64, c: f64, b: f64, n: usize) -> Result<f64> {
    let lambda = photon_log_partition(volume, c, b)?;
    Ok((n as f64 * lambda.ln() - lambda - ln_factorial(n)).exp())
}

#[derive(Debug, Clone)]
pub struct PhotonGas {
    pub spec: PhotonGasSpec,
}

impl PhotonGas {
    pub fn new(spec: PhotonGasSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }
}

impl ThermoModel for PhotonGas {
    fn name(&self) -> &str {
        "photon_gas"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &Abelian(1)
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        positive_scalar(b)
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(photon_log_partition(self.spec.volume, self.spec.light_speed, b[0]))
    }

    fn phase_domain(&self, _b: &[f64]) -> Result<Domain> {
        Err(self.no_phase_space())
    }

    fn momentum(&self, _z: &[f64]) -> Result<Vec<f64>> {
        Err(self.no_phase_space())
    }

    fn coupling(&self, _z: &[f64], _b: &[f64]) -> f64 {
        f64::NAN
    }
}

impl PhotonGas {
    fn no_phase_space(&self) -> GibbsError {
        GibbsError::Unsupported {
            model: "photon_gas".into(),
            what: "no fixed-dimension phase space".into(),
        }
    }
}
