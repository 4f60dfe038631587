//! Cross-checks of a model's closed forms against independent oracles:
//! Monte-Carlo integration, factorized deterministic quadrature, sampler
//! means and derivative identities.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::engine::{Biased, Engine, ThermoModel};
use crate::error::{invalid, Result};
use crate::lie::{GalileanAlgebraElement, Vec3};
use crate::models::relativistic::{photon_log_partition, photon_number_pmf, RelativisticGasSpec};
use crate::models::special::adaptive_quad;
use crate::models::sphere::SphereSpec;
use crate::models::vessel::{frame_potential, log_weight_bound};
use crate::models::{GravityGas, GravityGasSpec, IdealGas, IdealGasSpec, ModelSpec, VesselSpec};
use crate::oracle::samplers::{massless_partition_estimate, relativistic_partition_estimate};
use crate::oracle::{gauss_quadrature, mc_integrate, Domain, Estimate, Moments, SampleBatch};

/// Largest accepted deviation of an estimate, in standard errors.
pub const STDERR_GATE: f64 = 3.0;
/// Tolerance of the deterministic quadrature check on `log P`.
pub const QUADRATURE_TOL: f64 = 1e-8;
const FD_TOL: f64 = 1e-6;
const QUAD_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub model: String,
    pub b: Vec<f64>,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Multiplies the closed-form partition function by `1 + bias`.
    pub closed_form_bias: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_samples: 200_000,
            seed: 0x5eed,
            closed_form_bias: 0.0,
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// `(P − value)/stderr` computed from `log P`, safe against overflow of `P`.
fn z_score_log(est: &Estimate, log_p: f64) -> f64 {
    if !(est.value > 0.0 && est.stderr > 0.0) {
        return f64::INFINITY;
    }
    (1.0 - (log_p - est.value.ln()).exp()) / (est.stderr / est.value)
}

fn gate_check(name: &str, z: f64, what: &str) -> Check {
    Check::new(name, z.abs() <= STDERR_GATE, format!("{what}: {z:+.3} stderr"))
}

/// `∫ exp(−x²/(2s²)) dx` over `ℝ` by adaptive quadrature.
fn gaussian_integral(s: f64) -> f64 {
    adaptive_quad(|x| (-0.5 * x * x / (s * s)).exp(), -40.0 * s, 40.0 * s, QUAD_REL_TOL)
}

fn log_n_factorial(flag: bool, n: usize) -> f64 {
    if flag {
        crate::models::special::ln_factorial(n)
    } else {
        0.0
    }
}

/// `log ∫ exp(−bc√(p² + m²c²)) 4πp² dp`, the momentum part of one relativistic particle.
fn log_relativistic_momentum(m: f64, c: f64, b: f64) -> f64 {
    let mc = m * c;
    // shifted by the rest energy to keep the integrand O(1)
    let f = |p: f64| {
        let kinetic = if p == 0.0 {
            0.0
        } else {
            p * p / ((p * p + mc * mc).sqrt() + mc)
        };
        4.0 * PI * p * p * (-b * c * kinetic).exp()
    };
    let scale = 1.0 / (b * c) + (mc / (b * c)).sqrt();
    adaptive_quad(f, 0.0, 80.0 * scale.max(1.0 / (b * c)), QUAD_REL_TOL).ln() - b * c * mc
}

fn vessel_reference(spec: &VesselSpec, b: &[f64]) -> Result<f64> {
    let g = GalileanAlgebraElement::from_slice(b)?;
    let e = g.epsilon;
    let domain = Domain::new(vec![spec.geometry.region()])?;
    let mut sum = 0.0;
    for &m in &spec.masses {
        let shift = log_weight_bound(&spec.geometry, m, &g);
        let log_w = |z: &[f64]| -> f64 {
            let r = Vec3::new(z[0], z[1], z[2]);
            e * m * frame_potential(&g, &r).unwrap_or(f64::NAN) - shift
        };
        let v = gauss_quadrature(&domain, |z| log_w(z).exp(), 96)?;
        sum += v.ln() + shift + 3.0 * gaussian_integral((m / -e).sqrt()).ln();
    }
    Ok(sum - log_n_factorial(spec.indistinguishable, spec.n()))
}

/// Factorized deterministic quadrature of `log P(b)` from the model's
/// Hamiltonian, independent of the closed-form expressions.
pub fn reference_log_partition(spec: &ModelSpec, b: &[f64]) -> Option<Result<f64>> {
    let scalar = b.first().copied().unwrap_or(f64::NAN);
    Some(match spec {
        ModelSpec::IdealGas(s) => Ok(s
            .masses
            .iter()
            .map(|m| s.volume.ln() + 3.0 * gaussian_integral((m / scalar).sqrt()).ln())
            .sum::<f64>()
            - log_n_factorial(s.indistinguishable, s.n())),
        ModelSpec::GravityGas(s) => Ok(s
            .masses
            .iter()
            .map(|m| {
                let a = m * s.gravity * scalar;
                let column = adaptive_quad(|z| (-a * z).exp(), 0.0, s.height, QUAD_REL_TOL);
                s.section_area.ln() + column.ln() + 3.0 * gaussian_integral((m / scalar).sqrt()).ln()
            })
            .sum::<f64>()
            - log_n_factorial(s.indistinguishable, s.n())),
        ModelSpec::RelativisticGas(s) => Ok(s
            .masses
            .iter()
            .map(|m| s.volume.ln() + log_relativistic_momentum(*m, s.light_speed, scalar))
            .sum::<f64>()
            - log_n_factorial(s.indistinguishable, s.n())),
        ModelSpec::MasslessGas(s) => {
            let one = s.volume.ln() + log_relativistic_momentum(0.0, s.light_speed, scalar);
            Ok(s.particles as f64 * one - log_n_factorial(s.indistinguishable, s.particles))
        }
        ModelSpec::Solid(s) => Ok((0..s.frequencies.len())
            .map(|i| {
                let mu = s.stiffness(i);
                gaussian_integral(1.0 / (scalar * mu).sqrt()).ln() + gaussian_integral(1.0 / scalar.sqrt()).ln()
            })
            .sum()),
        ModelSpec::Sphere(s) => sphere_reference(s, b),
        ModelSpec::Vessel(s) => vessel_reference(s, b),
        ModelSpec::PhotonGas(_) => return None,
    })
}

/// `2πR² ∫₋₁¹ exp(R²‖b‖u) du` by quadrature in the height `u`.
fn sphere_reference(s: &SphereSpec, b: &[f64]) -> Result<f64> {
    if b.len() != 3 {
        return Err(invalid("sphere takes a 3-component b"));
    }
    let r2 = s.radius * s.radius;
    let k = r2 * Vec3::new(b[0], b[1], b[2]).norm();
    let v = adaptive_quad(|u| (k * (u - 1.0)).exp(), -1.0, 1.0, QUAD_REL_TOL);
    Ok((TAU * r2 * v).ln() + k)
}

/// Monte-Carlo estimates of `P` whose product (over the returned factors)
/// gives the partition function, each paired with its closed `log P` share.
fn monte_carlo_factors(
    spec: &ModelSpec,
    model: &dyn ThermoModel,
    b: &[f64],
    log_p: f64,
    opts: &VerifyOptions,
) -> Result<Vec<(String, Estimate, f64)>> {
    match spec {
        ModelSpec::RelativisticGas(s) => {
            let masses: BTreeSet<u64> = s.masses.iter().map(|m| m.to_bits()).collect();
            masses
                .into_iter()
                .enumerate()
                .map(|(k, bits)| {
                    let m = f64::from_bits(bits);
                    let one = RelativisticGasSpec::new(s.volume, s.light_speed, vec![m])?;
                    let lp = crate::models::relativistic_log_partition(&one, b[0])?;
                    let est = relativistic_partition_estimate(
                        s.volume,
                        m,
                        s.light_speed,
                        b[0],
                        opts.n_samples,
                        opts.seed + k as u64,
                    )?;
                    Ok((format!("mass {m}"), est, lp))
                })
                .collect()
        }
        ModelSpec::MasslessGas(s) => {
            let lp = crate::models::massless_log_partition(s.volume, s.light_speed, 1, b[0])?;
            let est = massless_partition_estimate(s.volume, s.light_speed, b[0], opts.n_samples, opts.seed)?;
            Ok(vec![("one particle".into(), est, lp)])
        }
        ModelSpec::IdealGas(s) => per_mass_factors(&s.masses, b, opts, |m| {
            Ok(Box::new(IdealGas::new(IdealGasSpec::new(s.volume, vec![m])?)?))
        }),
        ModelSpec::GravityGas(s) => per_mass_factors(&s.masses, b, opts, |m| {
            Ok(Box::new(GravityGas::new(GravityGasSpec::new(
                s.section_area,
                s.height,
                s.gravity,
                vec![m],
            )?)?))
        }),
        _ => {
            let domain = model.phase_domain(b)?;
            let est = mc_integrate(&domain, |z| (-model.coupling(z, b)).exp(), opts.n_samples, opts.seed)?;
            Ok(vec![("phase space".into(), est, log_p)])
        }
    }
}

/// One estimate per distinct mass, each over a single particle's phase space.
/// The joint integrand of several particles is too skewed for plain Monte Carlo.
fn per_mass_factors<F>(masses: &[f64], b: &[f64], opts: &VerifyOptions, one: F) -> Result<Vec<(String, Estimate, f64)>>
where
    F: Fn(f64) -> Result<Box<dyn ThermoModel>>,
{
    let distinct: BTreeSet<u64> = masses.iter().map(|m| m.to_bits()).collect();
    distinct
        .into_iter()
        .enumerate()
        .map(|(k, bits)| {
            let m = f64::from_bits(bits);
            let model = one(m)?;
            let lp = model.closed_log_partition(b).expect("closed form")?;
            let domain = model.phase_domain(b)?;
            let est = mc_integrate(
                &domain,
                |z| (-model.coupling(z, b)).exp(),
                opts.n_samples,
                opts.seed + k as u64,
            )?;
            Ok((format!("mass {m}"), est, lp))
        })
        .collect()
}

/// Phase point of one sample as the model lays it out.
fn phase_point(spec: &ModelSpec, sample: &[crate::oracle::ParticleState]) -> Vec<f64> {
    match spec {
        ModelSpec::Sphere(_) => sample[0].r.as_slice().to_vec(),
        _ => sample
            .iter()
            .flat_map(|s| s.r.iter().chain(s.p.iter()).copied().collect::<Vec<_>>())
            .collect(),
    }
}

fn sample_mean_check(spec: &ModelSpec, model: &dyn ThermoModel, batch: &SampleBatch, mean: &[f64]) -> Result<Check> {
    let mut acc = vec![Moments::default(); mean.len()];
    for sample in batch.samples() {
        let j = model.momentum(&phase_point(spec, sample))?;
        for (a, v) in acc.iter_mut().zip(j) {
            a.push(v);
        }
    }
    let mut worst = 0.0f64;
    for (a, e) in acc.iter().zip(mean) {
        let diff = a.mean() - e;
        // components constant on the batch agree to rounding
        let z = if a.stderr() > 0.0 {
            diff / a.stderr()
        } else if diff.abs() <= 1e-9 * e.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() > worst.abs() {
            worst = z;
        }
    }
    Ok(gate_check("mean_vs_samples", worst, "worst component"))
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Runs every check that applies to `spec` at `b`.
pub fn verify(spec: &ModelSpec, b: &[f64], opts: &VerifyOptions) -> Result<VerifyReport> {
    let inner = spec.build()?;
    let model = Biased {
        inner,
        bias: opts.closed_form_bias,
    };
    let engine = Engine {
        n_samples: opts.n_samples,
        seed: opts.seed,
        ..Engine::default()
    };
    engine.admissibility(&model, b).check()?;
    let log_p = engine.log_partition(&model, b)?;
    let mut checks = Vec::new();

    if let Some(reference) = reference_log_partition(spec, b) {
        let r = reference?;
        let err = rel_err(log_p, r);
        checks.push(Check::new(
            "closed_vs_quadrature",
            err <= QUADRATURE_TOL,
            format!("log P {log_p:.12e} vs {r:.12e}, error {err:.2e}"),
        ));
    }

    if !matches!(spec, ModelSpec::PhotonGas(_)) {
        let unbiased = log_p - opts.closed_form_bias.ln_1p();
        let factors = monte_carlo_factors(spec, &model, b, unbiased, opts)?;
        let share_bias = opts.closed_form_bias.ln_1p() / factors.len() as f64;
        for (what, est, lp) in factors {
            checks.push(gate_check(
                "closed_vs_monte_carlo",
                z_score_log(&est, lp + share_bias),
                &what,
            ));
        }
    }

    let n = model.dim();
    let mean = engine.mean_momentum(&model, b)?;
    if model.closed_mean(b).is_some() {
        let h = (1e-4 * b.iter().map(|x| x * x).sum::<f64>().sqrt()).max(1e-6);
        let mut worst = 0.0f64;
        let mut grad = vec![0.0; n];
        for (i, g) in grad.iter_mut().enumerate() {
            let e = unit(n, i);
            let f = |t: f64| -> Result<f64> {
                let bt: Vec<f64> = b.iter().zip(&e).map(|(x, d)| x + t * d).collect();
                engine.log_partition(&model, &bt)
            };
            *g = -(f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h);
        }
        let fd = model.algebra().dual_from_covector(&grad);
        let scale = mean.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        for (a, c) in fd.iter().zip(&mean) {
            worst = worst.max((a - c).abs() / scale);
        }
        checks.push(Check::new(
            "mean_vs_difference",
            worst <= FD_TOL,
            format!("relative deviation {worst:.2e}"),
        ));
    }

    if !matches!(spec, ModelSpec::PhotonGas(_)) {
        let batch = spec.sample(b, opts.n_samples, opts.seed ^ 0x5a5a)?;
        checks.push(sample_mean_check(spec, &model, &batch, &mean)?);
    }

    let mut worst = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let e = unit(n, i);
        let v = engine.covariance_form(&model, b, &e, &e)?;
        values.push(v);
    }
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    for v in &values {
        worst = worst.max(*v / scale);
    }
    checks.push(Check::new(
        "covariance_negative",
        worst <= 1e-7,
        format!("largest normalized diagonal {worst:.3e}"),
    ));

    if let ModelSpec::PhotonGas(s) = spec {
        checks.extend(photon_checks(s.volume, s.light_speed, b[0], &engine, &model)?);
    }

    Ok(VerifyReport {
        model: spec.name().into(),
        b: b.to_vec(),
        checks,
    })
}

fn photon_checks(volume: f64, c: f64, b: f64, engine: &Engine, model: &dyn ThermoModel) -> Result<Vec<Check>> {
    let h = 1e-4 * b;
    let f = |t: f64| engine.log_partition(model, &[t]);
    let fd = -(f(b - 2.0 * h)? - 8.0 * f(b - h)? + 8.0 * f(b + h)? - f(b + 2.0 * h)?) / (12.0 * h);
    let printed = 48.0 * PI * volume / (c.powi(3) * b.powi(4));
    let e_err = (fd - printed).abs() / printed;

    let lambda = 16.0 * PI * volume / (c * b).powi(3);
    let top = (lambda + 40.0 * lambda.sqrt() + 50.0).ceil() as usize;
    let (mut total, mut first, mut second) = (0.0, 0.0, 0.0);
    for k in 0..=top {
        let p = photon_number_pmf(volume, c, b, k)?;
        total += p;
        first += k as f64 * p;
        second += (k as f64) * (k as f64) * p;
    }
    let var = second - first * first;
    let resid = [
        (total - 1.0).abs(),
        (first - lambda).abs() / lambda,
        (var - lambda).abs() / lambda,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let closed = photon_log_partition(volume, c, b)?;
    Ok(vec![
        Check::new("photon_energy", e_err <= 1e-7, format!("relative error {e_err:.2e}")),
        Check::new(
            "photon_poisson",
            resid < 1e-10 && (closed - lambda).abs() <= 1e-12 * lambda,
            format!("largest residual {resid:.2e}"),
        ),
    ])
}
