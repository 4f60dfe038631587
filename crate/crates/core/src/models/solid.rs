use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{check_positive, inadmissible_scalar, GasLayout};
use crate::engine::{positive_scalar, AdmissibilityResult, ThermoModel};
use crate::error::{invalid, Result};
use crate::lie::{Abelian, LieAlgebra};
use crate::oracle::{Domain, Region, MOMENTUM_TAIL};

/// `3N` independent harmonic oscillators with unit mass and frequencies `νᵢ`,
/// grouped three per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidSpec {
    pub frequencies: Vec<f64>,
}

impl SolidSpec {
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        let s = Self { frequencies };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() || self.frequencies.len() % 3 != 0 {
            return Err(invalid(format!("need 3N frequencies, got {}", self.frequencies.len())));
        }
        self.frequencies
            .iter()
            .try_for_each(|f| check_positive("frequency", *f))
    }

    pub fn atoms(&self) -> usize {
        self.frequencies.len() / 3
    }

    /// Spring constant `μᵢ = (2πνᵢ)²` at unit mass.
    pub fn stiffness(&self, i: usize) -> f64 {
        (TAU * self.frequencies[i]).powi(2)
    }
}

/// `−Σ log νᵢ − 3N log b`.
pub fn solid_log_partition(spec: &SolidSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    let n = spec.frequencies.len() as f64;
    Ok(-spec.frequencies.iter().map(|f| f.ln()).sum::<f64>() - n * b.ln())
}

#[derive(Debug, Clone)]
pub struct Solid {
    pub spec: SolidSpec,
}

impl Solid {
    pub fn new(spec: SolidSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    /// `Σ pᵢ²/2 + μᵢqᵢ²/2`, with atom `a` holding oscillators `3a..3a+3` as
    /// its position and momentum coordinates.
    pub fn hamiltonian(&self, z: &[f64]) -> f64 {
        GasLayout::particles(z)
            .enumerate()
            .map(|(a, (q, p))| {
                (0..3)
                    .map(|k| 0.5 * p[k] * p[k] + 0.5 * self.spec.stiffness(3 * a + k) * q[k] * q[k])
                    .sum::<f64>()
            })
            .sum()
    }
}

impl ThermoModel for Solid {
    fn name(&self) -> &str {
        "solid"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &Abelian(1)
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        positive_scalar(b)
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(solid_log_partition(&self.spec, b[0]))
    }

    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(inadmissible_scalar(b[0]).map(|_| vec![self.spec.frequencies.len() as f64 / b[0]]))
    }

    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        inadmissible_scalar(b[0])?;
        let tol = MOMENTUM_TAIL / (2 * self.spec.atoms()) as f64;
        let mut regions = Vec::new();
        for a in 0..self.spec.atoms() {
            let sq: Vec<f64> = (0..3)
                .map(|k| 1.0 / (b[0] * self.spec.stiffness(3 * a + k)).sqrt())
                .collect();
            regions.push(Region::gaussian_box(&sq, tol));
            regions.push(Region::gaussian_box(&[1.0 / b[0].sqrt(); 3], tol));
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
