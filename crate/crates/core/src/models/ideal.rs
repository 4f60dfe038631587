use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{check_masses, check_positive, inadmissible_scalar, kinetic, log_n_factorial, GasLayout};
use crate::engine::{positive_scalar, AdmissibilityResult, ThermoModel};
use crate::error::Result;
use crate::lie::{Abelian, LieAlgebra};
use crate::oracle::{Domain, Region, MOMENTUM_TAIL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealGasSpec {
    pub volume: f64,
    pub masses: Vec<f64>,
    /// Divide the partition function by `N!`.
    #[serde(default)]
    pub indistinguishable: bool,
}

impl IdealGasSpec {
    pub fn new(volume: f64, masses: Vec<f64>) -> Result<Self> {
        let s = Self {
            volume,
            masses,
            indistinguishable: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("volume", self.volume)?;
        check_masses(&self.masses)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    /// Edge of the cubic vessel `[0, L]³` used for sampling and integration.
    pub fn side(&self) -> f64 {
        self.volume.cbrt()
    }
}

/// `Σᵢ [log V + (3/2) log(2π mᵢ / b)]`.
pub fn ideal_gas_log_partition(spec: &IdealGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    let lv = spec.volume.ln();
    let sum: f64 = spec.masses.iter().map(|m| lv + 1.5 * (TAU * m / b).ln()).sum();
    Ok(sum - log_n_factorial(spec.indistinguishable, spec.n()))
}

/// `E(b) = 3N / (2b)`.
pub fn ideal_gas_energy(spec: &IdealGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    Ok(1.5 * spec.n() as f64 / b)
}

/// `Π(b) = (2/3) E(b) / V = N / (bV)`.
pub fn ideal_gas_pressure(spec: &IdealGasSpec, b: f64) -> Result<f64> {
    Ok(2.0 / 3.0 * ideal_gas_energy(spec, b)? / spec.volume)
}

#[derive(Debug, Clone)]
pub struct IdealGas {
    pub spec: IdealGasSpec,
}

impl IdealGas {
    pub fn new(spec: IdealGasSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }
}

impl ThermoModel for IdealGas {
    fn name(&self) -> &str {
        "ideal_gas"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &Abelian(1)
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        positive_scalar(b)
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(ideal_gas_log_partition(&self.spec, b[0]))
    }

    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(ideal_gas_energy(&self.spec, b[0]).map(|e| vec![e]))
    }

    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        inadmissible_scalar(b[0])?;
        let tol = MOMENTUM_TAIL / self.spec.n().max(1) as f64;
        let regions = self
            .spec
            .masses
            .iter()
            .flat_map(|m| {
                [
                    Region::cube(self.spec.side()),
                    Region::gaussian_momentum_ball((m / b[0]).sqrt(), tol),
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

impl IdealGas {
    pub fn hamiltonian(&self, z: &[f64]) -> f64 {
        GasLayout::particles(z)
            .zip(&self.spec.masses)
            .map(|((_, p), m)| kinetic(p, *m))
            .sum()
    }
}

/// Entropy `S(b) = (3/2)Σ log mᵢ + N log V + (3N/2)(1 + log 2π) − (3N/2) log b`.
pub fn ideal_gas_entropy(spec: &IdealGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    let n = spec.n() as f64;
    let lm: f64 = spec.masses.iter().map(|m| m.ln()).sum();
    Ok(1.5 * lm + n * spec.volume.ln() + 1.5 * n * (1.0 + (2.0 * PI).ln())
        - 1.5 * n * b.ln()
        - log_n_factorial(spec.indistinguishable, spec.n()))
}
