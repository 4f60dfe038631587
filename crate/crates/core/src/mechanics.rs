//! Hamiltonian flows of independent particles, integrated by kick–drift–kick
//! leapfrog, with conservation diagnostics and invariance tests of Gibbs
//! batches under the flow.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GibbsError, Result};
use crate::lie::{rotation_about, Mat3, Vec3};
use crate::models::sphere::SphereSpec;
use crate::models::ModelSpec;
use crate::oracle::samplers::sample_sphere;
use crate::oracle::{chi_square_gof, gof_statistic, ParticleState, SampleBatch};

/// Default leapfrog step for the invariance tests.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default transport time for the invariance tests.
pub const DEFAULT_HORIZON: f64 = 10.0;

const GOF_BINS: usize = 40;

/// One-particle Hamiltonian `|p|²/2m + U(r)`, or a non-separable frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianKind {
    Free,
    /// `U = m g z`.
    Gravity {
        g: f64,
    },
    /// `U = μ|r|²/2`.
    CentralSpring {
        stiffness: f64,
    },
    /// Centrifugal potential `U = −m|ω×r|²/2`.
    CentrifugeFrame {
        angular_velocity: [f64; 3],
    },
    /// `H = |p|²/2m − ω·(r×p)` in canonical rotating coordinates; not separable.
    RotatingFrame {
        angular_velocity: [f64; 3],
    },
}

impl HamiltonianKind {
    pub fn is_separable(&self) -> bool {
        !matches!(self, HamiltonianKind::RotatingFrame { .. })
    }

    pub fn force(&self, r: &Vec3, m: f64) -> Vec3 {
        match *self {
            HamiltonianKind::Free | HamiltonianKind::RotatingFrame { .. } => Vec3::zeros(),
            HamiltonianKind::Gravity { g } => Vec3::new(0.0, 0.0, -m * g),
            HamiltonianKind::CentralSpring { stiffness } => -r * stiffness,
            HamiltonianKind::CentrifugeFrame { angular_velocity } => {
                let w = Vec3::from(angular_velocity);
                -w.cross(&w.cross(r)) * m
            }
        }
    }

    pub fn potential(&self, r: &Vec3, m: f64) -> f64 {
        match *self {
            HamiltonianKind::Free | HamiltonianKind::RotatingFrame { .. } => 0.0,
            HamiltonianKind::Gravity { g } => m * g * r.z,
            HamiltonianKind::CentralSpring { stiffness } => 0.5 * stiffness * r.norm_squared(),
            HamiltonianKind::CentrifugeFrame { angular_velocity } => {
                -0.5 * m * Vec3::from(angular_velocity).cross(r).norm_squared()
            }
        }
    }

    pub fn particle_energy(&self, s: &ParticleState, m: f64) -> f64 {
        let kin = s.p.norm_squared() / (2.0 * m);
        match *self {
            HamiltonianKind::RotatingFrame { angular_velocity } => {
                kin - Vec3::from(angular_velocity).dot(&s.r.cross(&s.p))
            }
            _ => kin + self.potential(&s.r, m),
        }
    }

    /// Hessian of `U` when it is quadratic.
    fn stiffness_matrix(&self, m: f64) -> Option<Mat3> {
        match *self {
            HamiltonianKind::CentralSpring { stiffness } => Some(Mat3::identity() * stiffness),
            HamiltonianKind::CentrifugeFrame { angular_velocity } => {
                let w = Vec3::from(angular_velocity);
                Some((w * w.transpose() - Mat3::identity() * w.norm_squared()) * m)
            }
            _ => None,
        }
    }
}

/// Axis-aligned box whose opposite faces are identified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl PeriodicBox {
    pub fn cube(side: f64) -> Self {
        Self {
            lo: [0.0; 3],
            hi: [side; 3],
        }
    }

    fn wrap(&self, r: &mut Vec3) {
        for k in 0..3 {
            let w = self.hi[k] - self.lo[k];
            let x = (r[k] - self.lo[k]).rem_euclid(w);
            // rem_euclid can round up to w itself
            r[k] = self.lo[k] + if x >= w { 0.0 } else { x };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    #[serde(flatten)]
    pub kind: HamiltonianKind,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub periodic: Option<PeriodicBox>,
}

impl FlowSpec {
    pub fn new(kind: HamiltonianKind, dt: f64, steps: usize) -> Result<Self> {
        let s = Self {
            kind,
            dt,
            steps,
            periodic: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Steps of `dt` covering `horizon`, rounded up.
    pub fn for_horizon(kind: HamiltonianKind, dt: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        Self::new(kind, dt, ((horizon / dt).round() as usize).max(1))
    }

    pub fn with_periodic(mut self, b: PeriodicBox) -> Self {
        self.periodic = Some(b);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(invalid("steps must be at least 1"));
        }
        if !self.kind.is_separable() {
            return Err(GibbsError::Unsupported {
                model: format!("{:?}", self.kind),
                what: "leapfrog needs a separable Hamiltonian T(p) + U(q)".into(),
            });
        }
        if let Some(b) = &self.periodic {
            if (0..3).any(|k| !(b.hi[k] > b.lo[k])) {
                return Err(invalid("periodic box needs hi > lo on every axis"));
            }
        }
        Ok(())
    }

    /// Modified energy conserved by the discrete map: `H` itself when the
    /// force is constant, `|p|²/2m + rᵀ(K − K²dt²/4m)r/2` when `U = rᵀKr/2`.
    pub fn shadow_energy(&self, state: &[ParticleState], masses: &[f64]) -> f64 {
        state
            .iter()
            .zip(masses)
            .map(|(s, &m)| match self.kind.stiffness_matrix(m) {
                Some(k) => {
                    let km = k - k * k * (self.dt * self.dt / (4.0 * m));
                    s.p.norm_squared() / (2.0 * m) + 0.5 * s.r.dot(&(km * s.r))
                }
                None => self.kind.particle_energy(s, m),
            })
            .sum()
    }
}

/// Total energy of a multi-particle state.
pub fn energy(kind: &HamiltonianKind, state: &[ParticleState], masses: &[f64]) -> f64 {
    state.iter().zip(masses).map(|(s, &m)| kind.particle_energy(s, m)).sum()
}

pub fn total_momentum(state: &[ParticleState]) -> Vec3 {
    state.iter().map(|s| s.p).sum()
}

pub fn total_angular_momentum(state: &[ParticleState]) -> Vec3 {
    state.iter().map(|s| s.r.cross(&s.p)).sum()
}

/// Flips every momentum, the time-reversal involution.
pub fn reverse(state: &[ParticleState]) -> Vec<ParticleState> {
    state.iter().map(|s| ParticleState::new(s.r, -s.p)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<ParticleState>>,
    pub times: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&[ParticleState]> {
        self.states.last().map(|s| s.as_slice())
    }

    /// CSV with header `t,x0,y0,z0,px0,py0,pz0,x1,...`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut header = String::from("t");
        for i in 0..n {
            for c in ["x", "y", "z", "px", "py", "pz"] {
                header.push_str(&format!(",{c}{i}"));
            }
        }
        writeln!(w, "{header}")?;
        for (t, state) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.16e}")?;
            for s in state {
                for v in s.r.iter().chain(s.p.iter()) {
                    write!(w, ",{v:.16e}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_masses(initial: &[ParticleState], masses: &[f64]) -> Result<()> {
    if initial.len() != masses.len() {
        return Err(invalid(format!(
            "{} particles but {} masses",
            initial.len(),
            masses.len()
        )));
    }
    if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(invalid(format!("masses must be positive, got {m}")));
    }
    Ok(())
}

fn leapfrog_step(spec: &FlowSpec, state: &mut [ParticleState], masses: &[f64]) {
    let h = spec.dt;
    for (s, &m) in state.iter_mut().zip(masses) {
        s.p += spec.kind.force(&s.r, m) * (0.5 * h);
        s.r += s.p * (h / m);
        if let Some(b) = &spec.periodic {
            b.wrap(&mut s.r);
        }
        s.p += spec.kind.force(&s.r, m) * (0.5 * h);
    }
}

/// Leapfrog trajectory of `steps + 1` snapshots starting at `t = 0`.
pub fn integrate_flow(spec: &FlowSpec, initial: &[ParticleState], masses: &[f64]) -> Result<Trajectory> {
    spec.validate()?;
    check_masses(initial, masses)?;
    let mut state = initial.to_vec();
    let mut states = Vec::with_capacity(spec.steps + 1);
    let mut times = Vec::with_capacity(spec.steps + 1);
    states.push(state.clone());
    times.push(0.0);
    for k in 1..=spec.steps {
        leapfrog_step(spec, &mut state, masses);
        states.push(state.clone());
        times.push(k as f64 * spec.dt);
    }
    Ok(Trajectory { states, times })
}

/// Final state of the leapfrog flow, without recording the path.
pub fn flow_map(spec: &FlowSpec, initial: &[ParticleState], masses: &[f64]) -> Result<Vec<ParticleState>> {
    spec.validate()?;
    check_masses(initial, masses)?;
    let mut state = initial.to_vec();
    for _ in 0..spec.steps {
        leapfrog_step(spec, &mut state, masses);
    }
    Ok(state)
}

/// `max_t |f(state_t) − f(state_0)|`.
pub fn conserved_drift<F>(traj: &Trajectory, observable: F) -> Result<f64>
where
    F: Fn(&[ParticleState]) -> f64,
{
    let first = traj.states.first().ok_or_else(|| invalid("empty trajectory"))?;
    let f0 = observable(first);
    Ok(traj
        .states
        .iter()
        .map(|s| (observable(s) - f0).abs())
        .fold(0.0, f64::max))
}

fn flatten(state: &[ParticleState]) -> Vec<f64> {
    state
        .iter()
        .flat_map(|s| s.r.iter().chain(s.p.iter()).copied().collect::<Vec<_>>())
        .collect()
}

fn unflatten(z: &[f64]) -> Vec<ParticleState> {
    z.chunks_exact(6)
        .map(|c| ParticleState::new(Vec3::new(c[0], c[1], c[2]), Vec3::new(c[3], c[4], c[5])))
        .collect()
}

/// Jacobian of one leapfrog step at `state`, by central differences of size `h`.
pub fn step_jacobian(spec: &FlowSpec, state: &[ParticleState], masses: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let one = FlowSpec { steps: 1, ..*spec };
    one.validate()?;
    check_masses(state, masses)?;
    let z = flatten(state);
    let d = z.len();
    let mut jac = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut plus = z.clone();
        let mut minus = z.clone();
        plus[j] += h;
        minus[j] -= h;
        let fp = flatten(&flow_map(&one, &unflatten(&plus), masses)?);
        let fm = flatten(&flow_map(&one, &unflatten(&minus), masses)?);
        for i in 0..d {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Transports every sample of `batch` along the flow, in parallel.
pub fn transport_batch(spec: &FlowSpec, batch: &SampleBatch, masses: &[f64]) -> Result<SampleBatch> {
    spec.validate()?;
    if masses.len() != batch.n_particles || batch.n_particles == 0 {
        return Err(invalid("one mass per batch particle required"));
    }
    let mut out = batch.clone();
    out.states.par_chunks_mut(batch.n_particles).for_each(|sample| {
        for _ in 0..spec.steps {
            leapfrog_step(spec, sample, masses);
        }
    });
    Ok(out)
}

/// Bonferroni-adjusted minimum of several p-values.
fn bonferroni(ps: &[f64]) -> f64 {
    (ps.iter().copied().fold(1.0, f64::min) * ps.len() as f64).min(1.0)
}

/// Draws from `ρ_b`, pushes the batch forward by the model's flow for time
/// `horizon` and returns the chi-square p-value of the transported batch
/// against `ρ_b`.
///
/// Ideal gas: free flow in the periodic cube, positions of particle 0 tested
/// against the uniform law. Solid with a single frequency: central-spring flow,
/// one position and one momentum coordinate of atom 0 tested against their
/// normal marginals. Sphere: rotation by the angle `horizon` about `b`.
pub fn flow_invariance_test(model: &ModelSpec, b: &[f64], horizon: f64, n: usize, seed: u64) -> Result<f64> {
    match model {
        ModelSpec::IdealGas(s) => {
            let side = s.side();
            let flow = FlowSpec::for_horizon(HamiltonianKind::Free, DEFAULT_DT, horizon)?
                .with_periodic(PeriodicBox::cube(side));
            let batch = transport_batch(&flow, &model.sample(b, n, seed)?, &s.masses)?;
            let ps = (0..3)
                .map(|k| Ok(gof_statistic(&batch, 0, |st| st.r[k], |_| 1.0, (0.0, side), GOF_BINS)?.p_value))
                .collect::<Result<Vec<_>>>()?;
            Ok(bonferroni(&ps))
        }
        ModelSpec::Solid(s) => {
            let nu = s.frequencies[0];
            if s.frequencies.iter().any(|f| *f != nu) {
                return Err(GibbsError::Unsupported {
                    model: model.name().into(),
                    what: "flow invariance needs a single frequency (central spring)".into(),
                });
            }
            let mu = s.stiffness(0);
            let flow = FlowSpec::for_horizon(HamiltonianKind::CentralSpring { stiffness: mu }, DEFAULT_DT, horizon)?;
            let batch = transport_batch(&flow, &model.sample(b, n, seed)?, &vec![1.0; s.atoms()])?;
            let bq = b[0] * mu;
            let sq = 8.0 / bq.sqrt();
            let sp = 8.0 / b[0].sqrt();
            let pq = gof_statistic(
                &batch,
                0,
                |st| st.r.x.clamp(-sq, sq),
                |q| (-0.5 * bq * q * q).exp(),
                (-sq, sq),
                GOF_BINS,
            )?;
            let pp = gof_statistic(
                &batch,
                0,
                |st| st.p.x.clamp(-sp, sp),
                |p| (-0.5 * b[0] * p * p).exp(),
                (-sp, sp),
                GOF_BINS,
            )?;
            Ok(bonferroni(&[pq.p_value, pp.p_value]))
        }
        ModelSpec::Sphere(s) => {
            let bv = match b {
                [x, y, z] => Vec3::new(*x, *y, *z),
                _ => return Err(invalid("sphere takes a 3-component b")),
            };
            rotation_invariance_test(s, &bv, &bv, horizon, n, seed)
        }
        _ => Err(GibbsError::Unsupported {
            model: model.name().into(),
            what: "no flow registered for the invariance test".into(),
        }),
    }
}

/// Orthonormal `(e1, e2)` completing `u` to a right-handed frame.
fn complete_frame(u: &Vec3) -> (Vec3, Vec3) {
    let k = u.iamin();
    let e1 = u.cross(&Vec3::ith(k, 1.0)).normalize();
    (e1, u.cross(&e1))
}

/// Sphere batch from `ρ_b` rotated by `angle` about `axis`, tested on the
/// height `Om·b̂` (density `∝ exp(R‖b‖t)`) and on the azimuth about `b̂`
/// (uniform).
pub fn rotation_invariance_test(
    spec: &SphereSpec,
    b: &Vec3,
    axis: &Vec3,
    angle: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let rot = rotation_about(axis, angle);
    let mut batch = sample_sphere(spec, b, n, seed)?;
    for s in &mut batch.states {
        s.r = rot * s.r;
    }
    let r = spec.radius;
    let u = if b.norm() > 0.0 { b.normalize() } else { Vec3::z() };
    let (e1, e2) = complete_frame(&u);
    let k = r * b.norm();
    let heights: Vec<f64> = batch.states.iter().map(|s| s.r.dot(&u).clamp(-r, r)).collect();
    let az: Vec<f64> = batch.states.iter().map(|s| s.r.dot(&e2).atan2(s.r.dot(&e1))).collect();
    let ph = chi_square_gof(&heights, |t| (k * (t - r)).exp(), -r, r, GOF_BINS)?;
    let pa = chi_square_gof(&az, |_| 1.0, -PI, PI, GOF_BINS)?;
    Ok(bonferroni(&[ph.p_value, pa.p_value]))
}
