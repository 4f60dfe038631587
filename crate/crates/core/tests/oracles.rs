use gibbs_core::lie::{GalileanAlgebraElement, Vec3};
use gibbs_core::models::*;
use gibbs_core::oracle::samplers::sample_juttner;
use gibbs_core::oracle::{chi_square_gof, Moments, ParticleState, Region, SampleBatch};
use gibbs_core::verify::{verify, VerifyOptions};
use gibbs_core::{Engine, ThermoModel};

fn vessel_spec() -> VesselSpec {
    VesselSpec::new(
        VesselGeometry::Cylinder {
            radius: 1.0,
            height: 0.5,
        },
        vec![1.0, 2.0],
    )
    .unwrap()
}

fn vessel_b(omega_z: f64, beta_z: f64, epsilon: f64) -> Vec<f64> {
    GalileanAlgebraElement::new(
        Vec3::new(0.0, 0.0, omega_z),
        Vec3::new(0.0, 0.0, beta_z),
        Vec3::zeros(),
        epsilon,
    )
    .to_array()
    .to_vec()
}

fn cases() -> Vec<(ModelSpec, Vec<Vec<f64>>)> {
    vec![
        (
            ModelSpec::IdealGas(IdealGasSpec::new(2.0, vec![1.0, 3.0]).unwrap()),
            vec![vec![0.4], vec![3.0]],
        ),
        (
            ModelSpec::GravityGas(GravityGasSpec::new(1.0, 2.0, 1.5, vec![1.0, 2.0]).unwrap()),
            vec![vec![0.3], vec![2.0]],
        ),
        (
            ModelSpec::RelativisticGas(RelativisticGasSpec::new(1.0, 1.0, vec![1.0, 0.2]).unwrap()),
            vec![vec![0.5], vec![4.0]],
        ),
        (
            ModelSpec::MasslessGas(MasslessGasSpec::new(1.0, 1.0, 2).unwrap()),
            vec![vec![0.7], vec![3.0]],
        ),
        (
            ModelSpec::PhotonGas(PhotonGasSpec::new(1.0, 1.0).unwrap()),
            vec![vec![0.5], vec![2.0]],
        ),
        (
            ModelSpec::Solid(SolidSpec::new(vec![0.5, 1.0, 2.0]).unwrap()),
            vec![vec![0.2], vec![5.0]],
        ),
        (
            ModelSpec::Sphere(SphereSpec::new(1.5).unwrap()),
            vec![vec![0.2, -0.1, 0.3], vec![1.0, 2.0, -0.5]],
        ),
        (
            ModelSpec::Vessel(vessel_spec()),
            vec![vessel_b(0.0, 0.0, -1.0), vessel_b(1.5, 0.4, -2.0)],
        ),
    ]
}

#[test]
fn closed_forms_agree_with_oracles() {
    let opts = VerifyOptions {
        n_samples: 100_000,
        ..VerifyOptions::default()
    };
    for (spec, points) in cases() {
        for b in points {
            let report = verify(&spec, &b, &opts).unwrap();
            let failed: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
            assert!(failed.is_empty(), "{} at {b:?}: {failed:?}", spec.name());
        }
    }
}

#[test]
fn ideal_momentum_is_maxwell_boltzmann() {
    let b = 2.0;
    let masses = [1.0, 4.0];
    let spec = ModelSpec::IdealGas(IdealGasSpec::new(1.0, masses.to_vec()).unwrap());
    let batch = spec.sample(&[b], 40_000, 11).unwrap();
    let n = batch.n_samples() as f64;
    for (i, m) in masses.iter().enumerate() {
        let sigma = (m / b).sqrt();
        for axis in 0..3 {
            let u: Vec<f64> = batch.particle(i).map(|s| s.p[axis] / sigma).collect();
            let mut first = Moments::default();
            let mut second = Moments::default();
            let mut fourth = Moments::default();
            for x in &u {
                first.push(*x);
                second.push(x * x);
                fourth.push(x.powi(4));
            }
            assert!(first.mean().abs() < 3.0 * first.stderr());
            assert!((second.mean() - 1.0).abs() < 3.0 * second.stderr());
            // standard error of the sample kurtosis of a normal law is sqrt(24/n)
            let kurtosis = fourth.mean() / second.mean().powi(2);
            assert!((kurtosis - 3.0).abs() < 3.0 * (24.0 / n).sqrt(), "kurtosis {kurtosis}");
            let gof = chi_square_gof(
                &u.iter().map(|x| x.clamp(-7.0, 7.0)).collect::<Vec<_>>(),
                |x| (-0.5 * x * x).exp(),
                -7.0,
                7.0,
                40,
            )
            .unwrap();
            assert!(gof.p_value > 0.001, "{gof:?}");
        }
    }
}

#[test]
fn juttner_modulus_histogram() {
    let (m, c, b) = (1.0, 1.0, 0.5);
    let batch = sample_juttner(m, c, b, 50_000, 3).unwrap();
    let moduli: Vec<f64> = batch.states.iter().map(|s| s.p.norm()).collect();
    let top = 100.0;
    assert!(moduli.iter().all(|p| *p < top));
    let gof = chi_square_gof(
        &moduli,
        |p| p * p * (-b * c * (m * m * c * c + p * p).sqrt()).exp(),
        0.0,
        top,
        200,
    )
    .unwrap();
    assert!(gof.p_value > 0.001, "{gof:?}");
}

#[test]
fn gravity_momentum_ignores_gravity() {
    let b = 1.5;
    let spec = ModelSpec::GravityGas(GravityGasSpec::new(1.0, 3.0, 2.0, vec![2.0]).unwrap());
    let batch = spec.sample(&[b], 40_000, 5).unwrap();
    let sigma = (2.0f64 / b).sqrt();
    let n = batch.n_samples() as f64;
    for axis in 0..3 {
        let u: Vec<f64> = batch
            .particle(0)
            .map(|s| (s.p[axis] / sigma).clamp(-7.0, 7.0))
            .collect();
        let gof = chi_square_gof(&u, |x| (-0.5 * x * x).exp(), -7.0, 7.0, 40).unwrap();
        assert!(gof.p_value > 0.001, "axis {axis}: {gof:?}");
    }
    // altitude and kinetic energy are uncorrelated
    let z: Vec<f64> = batch.particle(0).map(|s| s.r.z).collect();
    let k: Vec<f64> = batch.particle(0).map(|s| s.p.norm_squared()).collect();
    let corr = correlation(&z, &k);
    assert!(corr.abs() < 3.0 / n.sqrt(), "correlation {corr}");
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn sphere_sample_covariance_matches_hessian() {
    let spec = SphereSpec::new(1.2).unwrap();
    let model = SphereModel::new(spec.clone()).unwrap();
    let b = [0.5, -0.3, 1.0];
    let engine = Engine::default();
    let mean = engine.mean_momentum(&model, &b).unwrap();
    let cov = engine.covariance_matrix(&model, &b).unwrap();
    let batch = ModelSpec::Sphere(spec).sample(&b, 100_000, 9).unwrap();
    let j: Vec<Vec<f64>> = batch
        .samples()
        .map(|s| model.momentum(s[0].r.as_slice()).unwrap())
        .collect();
    for a in 0..3 {
        for c in a..3 {
            let mut prod = Moments::default();
            for v in &j {
                prod.push((v[a] - mean[a]) * (v[c] - mean[c]));
            }
            assert!(
                (prod.mean() - cov[a][c]).abs() < 3.0 * prod.stderr(),
                "({a},{c}): {} vs {}",
                prod.mean(),
                cov[a][c]
            );
        }
    }
}

fn phase_point(spec: &ModelSpec, sample: &[ParticleState]) -> Vec<f64> {
    match spec {
        ModelSpec::Sphere(_) => sample[0].r.as_slice().to_vec(),
        _ => sample
            .iter()
            .flat_map(|s| s.r.iter().chain(s.p.iter()).copied().collect::<Vec<_>>())
            .collect(),
    }
}

fn position_region(spec: &ModelSpec) -> Option<Region> {
    match spec {
        ModelSpec::IdealGas(s) => Some(Region::cube(s.side())),
        ModelSpec::GravityGas(s) => {
            let w = s.section_area.sqrt();
            Some(Region::Box {
                lo: vec![0.0; 3],
                hi: vec![w, w, s.height],
            })
        }
        ModelSpec::Vessel(s) => Some(s.geometry.region()),
        _ => None,
    }
}

#[test]
fn samplers_stay_on_the_support() {
    let engine = Engine::default();
    for (spec, points) in cases() {
        if matches!(spec, ModelSpec::PhotonGas(_)) {
            continue;
        }
        let model = spec.build().unwrap();
        let region = position_region(&spec);
        for b in points {
            let batch = spec.sample(&b, 2_000, 1).unwrap();
            assert!(batch.is_finite());
            let lp = engine.log_partition(model.as_ref(), &b).unwrap();
            for sample in batch.samples() {
                let d = (-model.coupling(&phase_point(&spec, sample), &b) - lp).exp();
                assert!(d > 0.0 && d.is_finite(), "{}: density {d}", spec.name());
                for s in sample {
                    if let Some(r) = &region {
                        assert!(r.contains(s.r.as_slice()), "{}: {:?} outside", spec.name(), s.r);
                    }
                    if let ModelSpec::Sphere(sp) = &spec {
                        assert!((s.r.norm() - sp.radius).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn batches_are_reproducible() {
    for (spec, points) in cases() {
        if matches!(spec, ModelSpec::PhotonGas(_)) {
            continue;
        }
        let b = &points[0];
        let first: SampleBatch = spec.sample(b, 500, 77).unwrap();
        assert_eq!(first, spec.sample(b, 500, 77).unwrap(), "{}", spec.name());
        assert_ne!(first.states, spec.sample(b, 500, 78).unwrap().states, "{}", spec.name());
    }
    let spec = ModelSpec::Sphere(SphereSpec::new(1.0).unwrap());
    let opts = VerifyOptions::default();
    let a = verify(&spec, &[0.1, 0.2, 0.3], &opts).unwrap();
    let b = verify(&spec, &[0.1, 0.2, 0.3], &opts).unwrap();
    assert_eq!(a.checks, b.checks);
}
