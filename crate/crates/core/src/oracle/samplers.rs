//! Exact samplers for the Gibbs densities of each model, plus importance
//! estimators of the momentum-space partition integrals.
//!
//! All samplers split work into chunks of [`CHUNK`] samples, each with its own
//! child stream, and concatenate chunks in order.

use std::f64::consts::PI;

use super::batch::{ParticleState, SampleBatch};
use super::integrate::{chunked, Estimate, Moments, CHUNK};
use super::rng::StreamRng;
use crate::error::{invalid, GibbsError, Result};
use crate::lie::{GalileanAlgebraElement, Vec3};
use crate::models::vessel::log_weight_bound;
use crate::models::{
    drift_velocity, frame_potential, inadmissible_scalar, GravityGasSpec, IdealGasSpec, MasslessGasSpec,
    RelativisticGasSpec, SolidSpec, SphereSpec, VesselSpec,
};

/// Rejection samplers give up below this acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

fn collect_batch<F>(n_particles: usize, n: usize, seed: u64, draw: F) -> Result<SampleBatch>
where
    F: Fn(&mut StreamRng, &mut Vec<ParticleState>) -> Result<()> + Sync,
{
    let parts = chunked(n, seed, |rng, len| -> Result<Vec<ParticleState>> {
        let mut out = Vec::with_capacity(len * n_particles);
        for _ in 0..len {
            draw(rng, &mut out)?;
        }
        Ok(out)
    });
    let mut states = Vec::with_capacity(n * n_particles);
    for p in parts {
        states.extend(p?);
    }
    Ok(SampleBatch {
        n_particles,
        states,
        weights: None,
        seed,
    })
}

fn normal3(rng: &mut StreamRng, sigma: f64) -> Vec3 {
    Vec3::new(rng.normal(), rng.normal(), rng.normal()) * sigma
}

fn uniform_cube(rng: &mut StreamRng, side: f64) -> Vec3 {
    Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()) * side
}

/// Positions uniform in `[0, L]³`, momentum components normal with variance `m/b`.
pub fn sample_ideal(spec: &IdealGasSpec, b: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    inadmissible_scalar(b)?;
    let side = spec.side();
    collect_batch(spec.n(), n, seed, |rng, out| {
        for m in &spec.masses {
            let r = uniform_cube(rng, side);
            out.push(ParticleState::new(r, normal3(rng, (m / b).sqrt())));
        }
        Ok(())
    })
}

/// Altitude `z ∈ [0, h]` with density `∝ exp(−a z)`, by inversion.
fn truncated_exponential(rng: &mut StreamRng, a: f64, h: f64) -> f64 {
    if a * h < 1e-12 {
        return h * rng.uniform();
    }
    let c = -(-a * h).exp_m1();
    (-(-rng.uniform() * c).ln_1p() / a).min(h)
}

pub fn sample_gravity(spec: &GravityGasSpec, b: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    inadmissible_scalar(b)?;
    let w = spec.section_area.sqrt();
    collect_batch(spec.n(), n, seed, |rng, out| {
        for m in &spec.masses {
            let z = truncated_exponential(rng, m * spec.gravity * b, spec.height);
            let r = Vec3::new(w * rng.uniform(), w * rng.uniform(), z);
            out.push(ParticleState::new(r, normal3(rng, (m / b).sqrt())));
        }
        Ok(())
    })
}

/// Acceptance rate `x² K₂(x) / 2` of the Jüttner sampler, `x = mbc²`.
pub fn juttner_acceptance(m: f64, c: f64, b: f64) -> Result<f64> {
    let x = m * b * c * c;
    Ok(0.5 * x * x * crate::models::special::bessel_k2(x)?)
}

fn check_juttner(m: f64, c: f64, b: f64) -> Result<()> {
    for (what, v) in [("mass", m), ("light speed", c), ("b", b)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{what} must be positive, got {v}")));
        }
    }
    let rate = juttner_acceptance(m, c, b)?;
    if rate < MIN_ACCEPTANCE {
        return Err(GibbsError::Numerical(format!(
            "Jüttner acceptance rate {rate:e} below {MIN_ACCEPTANCE:e} at mbc² = {}",
            m * b * c * c
        )));
    }
    Ok(())
}

/// One momentum with density `∝ exp(−bc√(p² + m²c²))`: proposals from the
/// massless law `∝ exp(−bcp)`, accepted with probability
/// `exp(−bc(√(p² + m²c²) − p))`.
fn juttner_momentum(rng: &mut StreamRng, m: f64, c: f64, b: f64) -> Vec3 {
    let mc = m * c;
    loop {
        let p = rng.gamma3(1.0 / (b * c));
        // √(p² + m²c²) − p without cancellation
        let excess = mc * mc / ((p * p + mc * mc).sqrt() + p);
        if rng.uniform() < (-b * c * excess).exp() {
            return rng.unit_vector() * p;
        }
    }
}

/// Relativistic momenta for a single particle at the origin.
pub fn sample_juttner(m: f64, c: f64, b: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    check_juttner(m, c, b)?;
    collect_batch(1, n, seed, |rng, out| {
        out.push(ParticleState::new(Vec3::zeros(), juttner_momentum(rng, m, c, b)));
        Ok(())
    })
}

pub fn sample_relativistic_gas(spec: &RelativisticGasSpec, b: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    inadmissible_scalar(b)?;
    for m in &spec.masses {
        check_juttner(*m, spec.light_speed, b)?;
    }
    let side = spec.volume.cbrt();
    collect_batch(spec.n(), n, seed, |rng, out| {
        for m in &spec.masses {
            let r = uniform_cube(rng, side);
            out.push(ParticleState::new(r, juttner_momentum(rng, *m, spec.light_speed, b)));
        }
        Ok(())
    })
}

pub fn sample_massless(spec: &MasslessGasSpec, b: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    inadmissible_scalar(b)?;
    let side = spec.volume.cbrt();
    let scale = 1.0 / (b * spec.light_speed);
    collect_batch(spec.particles, n, seed, |rng, out| {
        for _ in 0..spec.particles {
            let r = uniform_cube(rng, side);
            let p = rng.gamma3(scale);
            out.push(ParticleState::new(r, rng.unit_vector() * p));
        }
        Ok(())
    })
}

/// Oscillator coordinates `q ~ N(0, 1/(bμ))`, `p ~ N(0, 1/b)`, three per atom.
pub fn sample_solid(spec: &SolidSpec, b: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    inadmissible_scalar(b)?;
    collect_batch(spec.atoms(), n, seed, |rng, out| {
        for a in 0..spec.atoms() {
            let mut q = Vec3::zeros();
            for k in 0..3 {
                q[k] = rng.normal() / (b * spec.stiffness(3 * a + k)).sqrt();
            }
            out.push(ParticleState::new(q, normal3(rng, 1.0 / b.sqrt())));
        }
        Ok(())
    })
}

/// Points on the sphere with density `∝ exp(R Om·b)`, by rejection from the
/// uniform law with envelope `exp(R²‖b‖)`.
pub fn sample_sphere(spec: &SphereSpec, b: &Vec3, n: usize, seed: u64) -> Result<SampleBatch> {
    let r = spec.radius;
    if !(r > 0.0) || !b.iter().all(|x| x.is_finite()) {
        return Err(invalid("sphere sampler needs R > 0 and a finite b"));
    }
    let top = r * r * b.norm();
    // acceptance rate is P(b) / (4πR² e^{R²‖b‖}) = (1 − e^{−2y}) / (2y)
    let rate = if top > 0.0 {
        -(-2.0 * top).exp_m1() / (2.0 * top)
    } else {
        1.0
    };
    if rate < MIN_ACCEPTANCE {
        return Err(GibbsError::Numerical(format!(
            "sphere acceptance rate {rate:e} below {MIN_ACCEPTANCE:e}"
        )));
    }
    collect_batch(1, n, seed, |rng, out| loop {
        let u = rng.unit_vector() * r;
        if rng.uniform() < (r * u.dot(b) - top).exp() {
            out.push(ParticleState::new(u, Vec3::zeros()));
            return Ok(());
        }
    })
}

/// Vessel particles: positions by rejection against the uniform law on the
/// vessel, momenta normal around `m U*(r)` with variance `m/(−ε)`.
pub fn sample_vessel(spec: &VesselSpec, b: &GalileanAlgebraElement, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    if !b.is_admissible() {
        return Err(GibbsError::Inadmissible(format!("ε must be < 0, got {}", b.epsilon)));
    }
    let region = spec.geometry.region();
    let bounds: Vec<f64> = spec
        .masses
        .iter()
        .map(|m| log_weight_bound(&spec.geometry, *m, b))
        .collect();
    if bounds.iter().any(|v| !v.is_finite()) {
        return Err(GibbsError::Numerical("unbounded position weight".into()));
    }
    // rough acceptance check from a pilot run
    let mut pilot = StreamRng::child(seed, u64::MAX);
    let mut z = [0.0; 3];
    for (m, top) in spec.masses.iter().zip(&bounds) {
        let acc: f64 = (0..CHUNK)
            .map(|_| {
                region.sample(&mut pilot, &mut z);
                (b.epsilon * m * frame_potential(b, &Vec3::from(z)).unwrap_or(f64::NAN) - top).exp()
            })
            .sum::<f64>()
            / CHUNK as f64;
        if !(acc >= MIN_ACCEPTANCE) {
            return Err(GibbsError::Numerical(format!(
                "vessel acceptance rate {acc:e} below {MIN_ACCEPTANCE:e} for mass {m}"
            )));
        }
    }
    let eps = b.epsilon;
    collect_batch(spec.n(), n, seed, |rng, out| {
        let mut z = [0.0; 3];
        for (m, top) in spec.masses.iter().zip(&bounds) {
            let r = loop {
                region.sample(rng, &mut z);
                let r = Vec3::from(z);
                let lw = eps * m * frame_potential(b, &r)?;
                if rng.uniform() < (lw - top).exp() {
                    break r;
                }
            };
            let p = drift_velocity(b, &r)? * *m + normal3(rng, (m / -eps).sqrt());
            out.push(ParticleState::new(r, p));
        }
        Ok(())
    })
}

fn estimate(parts: Vec<Moments>, scale: f64, n: usize, seed: u64) -> Estimate {
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Estimate {
        value: scale * m.mean(),
        stderr: scale * m.stderr(),
        n_samples: n,
        seed,
    }
}

/// Single-particle partition function `V ∫ exp(−bc√(p² + m²c²)) d³p`, estimated
/// by importance sampling from the massless law (the Jüttner proposal).
pub fn relativistic_partition_estimate(volume: f64, m: f64, c: f64, b: f64, n: usize, seed: u64) -> Result<Estimate> {
    check_juttner(m, c, b)?;
    if n < 1000 {
        return Err(invalid(format!("need at least 1000 samples, got {n}")));
    }
    let mc = m * c;
    let parts = chunked(n, seed, |rng, len| {
        let mut acc = Moments::default();
        for _ in 0..len {
            let p = rng.gamma3(1.0 / (b * c));
            acc.push((-b * c * mc * mc / ((p * p + mc * mc).sqrt() + p)).exp());
        }
        acc
    });
    Ok(estimate(parts, volume * 8.0 * PI / (b * c).powi(3), n, seed))
}

/// Single-particle massless partition function `V ∫ exp(−bc‖p‖) d³p`, by
/// importance sampling from an exponential-modulus law with half the rate.
pub fn massless_partition_estimate(volume: f64, c: f64, b: f64, n: usize, seed: u64) -> Result<Estimate> {
    inadmissible_scalar(b)?;
    if n < 1000 {
        return Err(invalid(format!("need at least 1000 samples, got {n}")));
    }
    let rate = b * c;
    let a = 0.5 * rate;
    let parts = chunked(n, seed, |rng, len| {
        let mut acc = Moments::default();
        for _ in 0..len {
            let p = rng.gamma3(1.0 / a);
            // target / proposal density, proposal a³ exp(−ap)/(8π)
            acc.push(8.0 * PI / a.powi(3) * (-(rate - a) * p).exp());
        }
        acc
    });
    Ok(estimate(parts, volume, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::gof::chi_square_gof;

    #[test]
    fn empty_batch_for_zero_samples() {
        let s = IdealGasSpec::new(1.0, vec![1.0]).unwrap();
        let b = sample_ideal(&s, 1.0, 0, 1).unwrap();
        assert!(b.is_empty());
        assert_eq!(b.n_samples(), 0);
    }

    #[test]
    fn deterministic_and_chunk_independent() {
        let s = IdealGasSpec::new(1.0, vec![1.0, 2.0]).unwrap();
        let a = sample_ideal(&s, 1.5, 10_000, 9).unwrap();
        let b = sample_ideal(&s, 1.5, 10_000, 9).unwrap();
        assert_eq!(a, b);
        // a longer run shares its first chunks
        let c = sample_ideal(&s, 1.5, 2 * CHUNK + 5, 9).unwrap();
        assert_eq!(&a.states[..2 * CHUNK * 2], &c.states[..2 * CHUNK * 2]);
    }

    #[test]
    fn truncated_exponential_law() {
        let mut rng = StreamRng::new(4);
        let v: Vec<f64> = (0..50_000).map(|_| truncated_exponential(&mut rng, 1.7, 2.0)).collect();
        let g = chi_square_gof(&v, |z| (-1.7 * z).exp(), 0.0, 2.0, 20).unwrap();
        assert!(g.p_value > 0.01, "{g:?}");
    }

    #[test]
    fn juttner_acceptance_limits() {
        assert!((juttner_acceptance(1e-4, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!(sample_juttner(200.0, 1.0, 1.0, 10, 1).is_err());
        assert!(sample_juttner(-1.0, 1.0, 1.0, 10, 1).is_err());
    }

    #[test]
    fn importance_estimators_are_consistent() {
        let e = massless_partition_estimate(1.0, 1.0, 1.0, 100_000, 3).unwrap();
        assert!(e.agrees_with(8.0 * PI, 3.0), "{e:?}");
        let r = relativistic_partition_estimate(1.0, 1e-3, 1.0, 1.0, 100_000, 3).unwrap();
        assert!(r.agrees_with(8.0 * PI, 3.0) || (r.value / (8.0 * PI) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn vessel_inadmissible_rejected() {
        let s: VesselSpec = serde_json_spec();
        let b = GalileanAlgebraElement::new(Vec3::zeros(), Vec3::zeros(), Vec3::zeros(), 0.5);
        assert!(matches!(sample_vessel(&s, &b, 10, 1), Err(GibbsError::Inadmissible(_))));
    }

    fn serde_json_spec() -> VesselSpec {
        serde_json::from_str(r#"{"volume": 1.0, "masses": [1.0]}"#).unwrap()
    }
}
