use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::special::{log_one_minus_exp_neg_over_x, one_minus_exp_neg_over_x, truncated_exp_mean};
use super::{check_masses, check_positive, inadmissible_scalar, kinetic, log_n_factorial, GasLayout};
use crate::engine::{positive_scalar, AdmissibilityResult, ThermoModel};
use crate::error::{invalid, Result};
use crate::lie::{Abelian, LieAlgebra};
use crate::oracle::{Domain, Region, MOMENTUM_TAIL};

/// Gas in a vertical column `[0, √Σ]² × [0, h]` under gravity `g` along `−e_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GravityGasSpec {
    pub section_area: f64,
    pub height: f64,
    pub gravity: f64,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub indistinguishable: bool,
}

impl GravityGasSpec {
    pub fn new(section_area: f64, height: f64, gravity: f64, masses: Vec<f64>) -> Result<Self> {
        let s = Self {
            section_area,
            height,
            gravity,
            masses,
            indistinguishable: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("section_area", self.section_area)?;
        check_positive("height", self.height)?;
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return Err(invalid(format!("gravity must be non-negative, got {}", self.gravity)));
        }
        check_masses(&self.masses)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }
}

/// `Σᵢ log[Σ (2πmᵢ/b)^{3/2} (1 − exp(−mᵢgbh)) / (mᵢgb)]`.
pub fn gravity_gas_log_partition(spec: &GravityGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    let base = spec.section_area.ln() + spec.height.ln();
    let sum: f64 = spec
        .masses
        .iter()
        .map(|m| {
            let x = m * spec.gravity * b * spec.height;
            base + 1.5 * (TAU * m / b).ln() + log_one_minus_exp_neg_over_x(x)
        })
        .sum();
    Ok(sum - log_n_factorial(spec.indistinguishable, spec.n()))
}

/// `E(b) = Σᵢ [3/(2b) + mᵢgh (1/x − 1/(eˣ − 1))]`, `x = mᵢgbh`.
pub fn gravity_gas_energy(spec: &GravityGasSpec, b: f64) -> Result<f64> {
    inadmissible_scalar(b)?;
    Ok(spec
        .masses
        .iter()
        .map(|m| {
            let w = m * spec.gravity * spec.height;
            1.5 / b + w * truncated_exp_mean(w * b)
        })
        .sum())
}

/// Normalized altitude marginal `∝ exp(−mgbz)` on `[0, h]`.
pub fn gravity_altitude_density(m: f64, g: f64, b: f64, h: f64, z: f64) -> f64 {
    if !(0.0..=h).contains(&z) {
        return 0.0;
    }
    let a = m * g * b;
    (-a * z).exp() / (h * one_minus_exp_neg_over_x(a * h))
}

#[derive(Debug, Clone)]
pub struct GravityGas {
    pub spec: GravityGasSpec,
}

impl GravityGas {
    pub fn new(spec: GravityGasSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn hamiltonian(&self, z: &[f64]) -> f64 {
        GasLayout::particles(z)
            .zip(&self.spec.masses)
            .map(|((r, p), m)| kinetic(p, *m) + m * self.spec.gravity * r.z)
            .sum()
    }
}

impl ThermoModel for GravityGas {
    fn name(&self) -> &str {
        "gravity_gas"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &Abelian(1)
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        positive_scalar(b)
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(gravity_gas_log_partition(&self.spec, b[0]))
    }

    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(gravity_gas_energy(&self.spec, b[0]).map(|e| vec![e]))
    }

    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        inadmissible_scalar(b[0])?;
        let w = self.spec.section_area.sqrt();
        let tol = MOMENTUM_TAIL / self.spec.n() as f64;
        let regions = self
            .spec
            .masses
            .iter()
            .flat_map(|m| {
                [
                    Region::Box {
                        lo: vec![0.0; 3],
                        hi: vec![w, w, self.spec.height],
                    },
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ideal::{ideal_gas_log_partition, IdealGasSpec};

    #[test]
    fn weak_gravity_recovers_ideal_gas() {
        let g = GravityGasSpec::new(2.0, 3.0, 1e-8, vec![1.0, 2.5]).unwrap();
        let i = IdealGasSpec::new(6.0, vec![1.0, 2.5]).unwrap();
        for b in [0.5, 1.0, 3.0] {
            let a = gravity_gas_log_partition(&g, b).unwrap();
            let c = ideal_gas_log_partition(&i, b).unwrap();
            // log((1 − e^{−x})/x) = −x/2 + O(x²)
            let first_order: f64 = g.masses.iter().map(|m| -0.5 * m * 1e-8 * b * 3.0).sum();
            assert!((a - c - first_order).abs() < 1e-13, "{a} vs {c}");
        }
        let unit = GravityGasSpec::new(1.0, 1.0, 1e-8, vec![1.0]).unwrap();
        let a = gravity_gas_log_partition(&unit, 1.0).unwrap();
        let c = ideal_gas_log_partition(&IdealGasSpec::new(1.0, vec![1.0]).unwrap(), 1.0).unwrap();
        assert!(((a - c) / c).abs() < 1e-8);
        let g0 = GravityGasSpec::new(2.0, 3.0, 0.0, vec![1.0]).unwrap();
        assert!(gravity_gas_log_partition(&g0, 1.0).unwrap().is_finite());
        assert!((gravity_gas_energy(&g0, 2.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn analytic_energy_matches_difference() {
        let g = GravityGasSpec::new(1.0, 2.0, 3.0, vec![1.0, 0.5]).unwrap();
        for b in [0.2, 1.0, 5.0] {
            let h = 1e-5 * b;
            let f = |t: f64| gravity_gas_log_partition(&g, t).unwrap();
            let fd = -(f(b - 2.0 * h) - 8.0 * f(b - h) + 8.0 * f(b + h) - f(b + 2.0 * h)) / (12.0 * h);
            let e = gravity_gas_energy(&g, b).unwrap();
            assert!(((fd - e) / e).abs() < 1e-8, "{fd} vs {e}");
        }
    }

    #[test]
    fn altitude_density_normalized() {
        let (x, w) = crate::oracle::gauss_legendre(40);
        let h = 2.0;
        let total: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| w * gravity_altitude_density(1.0, 2.0, 0.7, h, 0.5 * h * (1.0 + x)))
            .sum::<f64>()
            * 0.5
            * h;
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(gravity_altitude_density(1.0, 2.0, 0.7, h, 2.5), 0.0);
    }

    #[test]
    fn rejects_negative_gravity() {
        assert!(GravityGasSpec::new(1.0, 1.0, -1.0, vec![1.0]).is_err());
    }
}
