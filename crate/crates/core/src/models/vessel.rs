//! Gas in a vessel, parameterized by an element `b = (ω, β, δ, ε)` of the
//! Galilean algebra.
//!
//! A particle is described by its position `r` and momentum `p = m v` at
//! `t = 0`. With `U* = (ω × r + δ)/ε` and `p₀ = p − m U*`,
//!
//! `⟨J, b⟩ = −ε (‖p₀‖²/(2m) + m f(r))`,
//! `f(r) = r·β/ε − ‖ω × r‖²/(2ε²) − (δ/ε)·((ω/ε) × r) − ‖δ‖²/(2ε²)`,
//!
//! so the momentum law is Gaussian around `m U*` and positions carry the
//! weight `exp(ε m f(r))`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::special::one_minus_exp_neg_over_x;
use super::{check_masses, check_positive, log_n_factorial, GasLayout};
use crate::engine::{AdmissibilityResult, ThermoModel};
use crate::error::{invalid, GibbsError, Result};
use crate::lie::{free_particle_momentum, galilean_pairing, GalileanAlgebra, GalileanAlgebraElement, LieAlgebra, Vec3};
use crate::oracle::{gauss_legendre, gauss_quadrature, Domain, Region, MOMENTUM_TAIL};

const QUAD_NODES: usize = 64;
const RIM_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum VesselGeometry {
    /// `x² + y² ≤ radius²`, `0 ≤ z ≤ height`.
    Cylinder {
        radius: f64,
        height: f64,
    },
    Box {
        lo: [f64; 3],
        hi: [f64; 3],
    },
}

impl VesselGeometry {
    pub fn region(&self) -> Region {
        match self {
            VesselGeometry::Cylinder { radius, height } => Region::Cylinder {
                radius: *radius,
                z_min: 0.0,
                z_max: *height,
            },
            VesselGeometry::Box { lo, hi } => Region::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
        }
    }

    pub fn volume(&self) -> f64 {
        self.region().volume()
    }

    /// Largest distance from the origin to a point of the vessel.
    pub fn max_radius(&self) -> f64 {
        match self {
            VesselGeometry::Cylinder { radius, height } => (radius * radius + height * height).sqrt(),
            VesselGeometry::Box { lo, hi } => (0..3).map(|k| lo[k].abs().max(hi[k].abs()).powi(2)).sum::<f64>().sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            VesselGeometry::Cylinder { radius, height } => {
                check_positive("cylinder_radius", *radius)?;
                check_positive("height", *height)
            }
            VesselGeometry::Box { lo, hi } => {
                if (0..3).all(|k| hi[k] > lo[k] && lo[k].is_finite() && hi[k].is_finite()) {
                    Ok(())
                } else {
                    Err(invalid("box vessel needs lo < hi on every axis"))
                }
            }
        }
    }
}

/// Flat configuration keys of a vessel.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct VesselKeys {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cylinder_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    section_area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<[f64; 3]>,
    masses: Vec<f64>,
    #[serde(default)]
    indistinguishable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VesselKeys", into = "VesselKeys")]
pub struct VesselSpec {
    pub geometry: VesselGeometry,
    pub masses: Vec<f64>,
    pub indistinguishable: bool,
}

impl TryFrom<VesselKeys> for VesselSpec {
    type Error = GibbsError;

    fn try_from(k: VesselKeys) -> Result<Self> {
        let geometry = match (k.cylinder_radius, k.section_area, k.height, k.volume, k.lo, k.hi) {
            (Some(radius), None, Some(height), None, None, None) => VesselGeometry::Cylinder { radius, height },
            (None, Some(area), Some(height), None, None, None) => {
                check_positive("section_area", area)?;
                let w = 0.5 * area.sqrt();
                VesselGeometry::Box {
                    lo: [-w, -w, 0.0],
                    hi: [w, w, height],
                }
            }
            (None, None, None, Some(volume), None, None) => {
                check_positive("volume", volume)?;
                let l = volume.cbrt();
                VesselGeometry::Box {
                    lo: [-0.5 * l, -0.5 * l, 0.0],
                    hi: [0.5 * l, 0.5 * l, l],
                }
            }
            (None, None, None, None, Some(lo), Some(hi)) => VesselGeometry::Box { lo, hi },
            _ => {
                return Err(invalid(
                    "vessel needs exactly one of: cylinder_radius + height, section_area + height, volume, lo + hi",
                ))
            }
        };
        let s = VesselSpec {
            geometry,
            masses: k.masses,
            indistinguishable: k.indistinguishable,
        };
        s.validate()?;
        Ok(s)
    }
}

impl From<VesselSpec> for VesselKeys {
    fn from(s: VesselSpec) -> Self {
        let mut k = VesselKeys {
            cylinder_radius: None,
            section_area: None,
            height: None,
            volume: None,
            lo: None,
            hi: None,
            masses: s.masses,
            indistinguishable: s.indistinguishable,
        };
        match s.geometry {
            VesselGeometry::Cylinder { radius, height } => {
                k.cylinder_radius = Some(radius);
                k.height = Some(height);
            }
            VesselGeometry::Box { lo, hi } => {
                k.lo = Some(lo);
                k.hi = Some(hi);
            }
        }
        k
    }
}

impl VesselSpec {
    pub fn new(geometry: VesselGeometry, masses: Vec<f64>) -> Result<Self> {
        let s = Self {
            geometry,
            masses,
            indistinguishable: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        check_masses(&self.masses)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    fn mass(&self, i: usize) -> Result<f64> {
        self.masses
            .get(i)
            .copied()
            .ok_or_else(|| invalid(format!("no particle {i}")))
    }
}

fn nonzero_epsilon(b: &GalileanAlgebraElement) -> Result<f64> {
    if b.epsilon == 0.0 || !b.epsilon.is_finite() {
        Err(invalid("the time component ε must be non-zero"))
    } else {
        Ok(b.epsilon)
    }
}

fn admissible_epsilon(b: &GalileanAlgebraElement) -> Result<f64> {
    if b.is_admissible() {
        Ok(b.epsilon)
    } else {
        Err(GibbsError::Inadmissible(format!("ε must be < 0, got {}", b.epsilon)))
    }
}

/// `f(r₀) = r₀·β/ε − ‖ω × r₀‖²/(2ε²) − (δ/ε)·((ω/ε) × r₀) − ‖δ‖²/(2ε²)`.
pub fn frame_potential(b: &GalileanAlgebraElement, r0: &Vec3) -> Result<f64> {
    let e = nonzero_epsilon(b)?;
    let wr = b.omega.cross(r0);
    Ok(r0.dot(&b.beta) / e
        - wr.norm_squared() / (2.0 * e * e)
        - b.delta.dot(&wr) / (e * e)
        - b.delta.norm_squared() / (2.0 * e * e))
}

/// Velocity of the moving frame, `U* = (ω × r₀ + δ)/ε`.
pub fn drift_velocity(b: &GalileanAlgebraElement, r0: &Vec3) -> Result<Vec3> {
    let e = nonzero_epsilon(b)?;
    Ok((b.omega.cross(r0) + b.delta) / e)
}

/// `⟨Jᵢ(r₀, p₀), b⟩ = −ε(‖p₀‖²/(2mᵢ) + mᵢ f(r₀))` with `p₀ = mᵢ(v − U*)`.
pub fn vessel_coupling(spec: &VesselSpec, b: &GalileanAlgebraElement, i: usize, r0: &Vec3, p0: &Vec3) -> Result<f64> {
    let m = spec.mass(i)?;
    let f = frame_potential(b, r0)?;
    Ok(-b.epsilon * (p0.norm_squared() / (2.0 * m) + m * f))
}

/// `ε m f(r)`, the log of the position weight.
fn log_position_weight(m: f64, b: &GalileanAlgebraElement, r: &Vec3) -> f64 {
    let e = b.epsilon;
    let u = b.omega.cross(r) + b.delta;
    m * r.dot(&b.beta) - m * u.norm_squared() / (2.0 * e)
}

/// Upper bound of `ε m f` over the vessel. The weight is convex in `r`, so its
/// maximum sits at a corner of a box or on a rim circle of a cylinder.
pub(crate) fn log_weight_bound(geometry: &VesselGeometry, m: f64, b: &GalileanAlgebraElement) -> f64 {
    match geometry {
        VesselGeometry::Box { lo, hi } => (0..8)
            .map(|c| {
                let r = Vec3::new(
                    if c & 1 == 0 { lo[0] } else { hi[0] },
                    if c & 2 == 0 { lo[1] } else { hi[1] },
                    if c & 4 == 0 { lo[2] } else { hi[2] },
                );
                log_position_weight(m, b, &r)
            })
            .fold(f64::NEG_INFINITY, f64::max),
        VesselGeometry::Cylinder { radius, height } => {
            let mut best = f64::NEG_INFINITY;
            for k in 0..RIM_POINTS {
                let phi = TAU * k as f64 / RIM_POINTS as f64;
                for z in [0.0, *height] {
                    let r = Vec3::new(radius * phi.cos(), radius * phi.sin(), z);
                    best = best.max(log_position_weight(m, b, &r));
                }
            }
            let rmax = geometry.max_radius();
            let w = b.omega.norm();
            let lipschitz = m * b.beta.norm() + m * w * (w * rmax + b.delta.norm()) / b.epsilon.abs();
            best + lipschitz * PI * radius / RIM_POINTS as f64
        }
    }
}

/// `log ∫_vessel exp(ε m f(r)) dr` by tensor Gauss–Legendre quadrature.
fn log_position_integral(geometry: &VesselGeometry, m: f64, b: &GalileanAlgebraElement) -> Result<f64> {
    let shift = log_weight_bound(geometry, m, b);
    let d = Domain::new(vec![geometry.region()])?;
    let v = gauss_quadrature(
        &d,
        |z| (log_position_weight(m, b, &Vec3::new(z[0], z[1], z[2])) - shift).exp(),
        QUAD_NODES,
    )?;
    Ok(v.ln() + shift)
}

/// `Σᵢ [(3/2) log(2πmᵢ/(−ε)) + log ∫ exp(ε mᵢ f(r)) dr]`.
pub fn vessel_log_partition(spec: &VesselSpec, b: &GalileanAlgebraElement) -> Result<f64> {
    let e = admissible_epsilon(b)?;
    let mut sum = 0.0;
    for m in &spec.masses {
        sum += 1.5 * (TAU * m / -e).ln() + log_position_integral(&spec.geometry, *m, b)?;
    }
    Ok(sum - log_n_factorial(spec.indistinguishable, spec.n()))
}

/// Parameters `(R, a)` of the radial law `∝ Δ exp(aΔ²)` in a rotating cylinder.
fn centrifuge_params(spec: &VesselSpec, b: &GalileanAlgebraElement, i: usize) -> Result<(f64, f64)> {
    let e = admissible_epsilon(b)?;
    let VesselGeometry::Cylinder { radius, .. } = spec.geometry else {
        return Err(invalid("the centrifuge law needs a cylindrical vessel"));
    };
    if b.beta != Vec3::zeros() || b.delta != Vec3::zeros() || b.omega.x != 0.0 || b.omega.y != 0.0 {
        return Err(invalid("the centrifuge law needs ω along e_z and β = δ = 0"));
    }
    let m = spec.mass(i)?;
    Ok((radius, m * b.omega.z * b.omega.z / (2.0 * -e)))
}

/// Normalized marginal of the distance `Δ` to the rotation axis:
/// `Δ exp(aΔ²) / ∫₀^R Δ exp(aΔ²) dΔ` with `a = mᵢω²/(2|ε|)`.
pub fn centrifuge_radial_density(
    spec: &VesselSpec,
    b: &GalileanAlgebraElement,
    i: usize,
    delta_radius: f64,
) -> Result<f64> {
    let (r, a) = centrifuge_params(spec, b, i)?;
    if !(0.0..=r).contains(&delta_radius) {
        return Err(invalid(format!("radius {delta_radius} outside [0, {r}]")));
    }
    let r2 = r * r;
    Ok(delta_radius * (a * (delta_radius * delta_radius - r2)).exp() / (0.5 * r2 * one_minus_exp_neg_over_x(a * r2)))
}

/// Mean distance of particle `i` to the rotation axis.
pub fn centrifuge_mean_radius(spec: &VesselSpec, b: &GalileanAlgebraElement, i: usize) -> Result<f64> {
    let (r, _) = centrifuge_params(spec, b, i)?;
    let (x, w) = gauss_legendre(QUAD_NODES);
    let mut sum = 0.0;
    for (x, w) in x.iter().zip(&w) {
        let d = 0.5 * r * (1.0 + x);
        sum += w * d * centrifuge_radial_density(spec, b, i, d)?;
    }
    Ok(0.5 * r * sum)
}

#[derive(Debug, Clone)]
pub struct Vessel {
    pub spec: VesselSpec,
}

impl Vessel {
    pub fn new(spec: VesselSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    fn particle_momenta(&self, z: &[f64]) -> Result<Vec<crate::lie::GalileanMomentum>> {
        GasLayout::particles(z)
            .zip(&self.spec.masses)
            .map(|((r, p), m)| free_particle_momentum(&r, &(p / *m), 0.0, *m))
            .collect()
    }
}

fn element(b: &[f64]) -> GalileanAlgebraElement {
    GalileanAlgebraElement::from_slice(b).expect("10 components checked by admissibility")
}

impl ThermoModel for Vessel {
    fn name(&self) -> &str {
        "vessel"
    }

    fn algebra(&self) -> &dyn LieAlgebra {
        &GalileanAlgebra
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        if b.len() != 10 {
            return AdmissibilityResult::rejected(format!("expected 10 components, got {}", b.len()));
        }
        if !b.iter().all(|x| x.is_finite()) {
            return AdmissibilityResult::rejected("b must be finite");
        }
        if b[9] < 0.0 {
            AdmissibilityResult::ok()
        } else {
            AdmissibilityResult::rejected(format!("ε must be < 0, got {}", b[9]))
        }
    }

    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        Some(vessel_log_partition(&self.spec, &element(b)))
    }

    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        let b = element(b);
        let e = admissible_epsilon(&b)?;
        let u_max = (b.omega.norm() * self.spec.geometry.max_radius() + b.delta.norm()) / e.abs();
        let tol = MOMENTUM_TAIL / self.spec.n() as f64;
        let mut regions = Vec::new();
        for m in &self.spec.masses {
            // a Gaussian ball around the origin, widened to contain every centre m U*
            let Region::MomentumBall { radius, tail_bound } = Region::gaussian_momentum_ball((m / -e).sqrt(), tol)
            else {
                unreachable!("gaussian_momentum_ball returns a ball")
            };
            regions.push(self.spec.geometry.region());
            regions.push(Region::MomentumBall {
                radius: radius + m * u_max,
                tail_bound,
            });
        }
        Domain::new(regions)
    }

    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        let total = self
            .particle_momenta(z)?
            .iter()
            .fold(crate::lie::GalileanMomentum::zero(), |acc, j| acc.add(j));
        Ok(total.to_array().to_vec())
    }

    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        let b = element(b);
        GasLayout::particles(z)
            .zip(&self.spec.masses)
            .map(|((r, p), m)| match free_particle_momentum(&r, &(p / *m), 0.0, *m) {
                Ok(j) => galilean_pairing(&j, &b),
                Err(_) => f64::NAN,
            })
            .sum()
    }

    /// Mass cocycle `Θ(x) = M (0, δ, β, 0)` for total mass `M`.
    fn cocycle(&self, x: &[f64]) -> Vec<f64> {
        let x = element(x);
        let total: f64 = self.spec.masses.iter().sum();
        let mut out = vec![0.0; 10];
        for k in 0..3 {
            out[3 + k] = total * x.delta[k];
            out[6 + k] = total * x.beta[k];
        }
        out
    }
}
