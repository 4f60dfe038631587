//! Phase-space integration domains.
//!
//! A [`Domain`] is a Cartesian product of [`Region`]s. A phase point is the
//! concatenation of the ambient coordinates of every region, e.g. an ideal-gas
//! particle contributes a position box and a truncated momentum ball, six
//! coordinates in total.

use std::f64::consts::{PI, TAU};

use statrs::function::erf::erfc;

use super::rng::StreamRng;
use crate::error::{invalid, Result};

/// Tail mass tolerated beyond a momentum truncation radius.
pub const MOMENTUM_TAIL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Axis-aligned box in 1 to 3 dimensions.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Cylinder with axis `e_z`: `x² + y² ≤ radius²`, `z_min ≤ z ≤ z_max`.
    Cylinder { radius: f64, z_min: f64, z_max: f64 },
    /// Two-dimensional sphere embedded in 3-space (three coordinates).
    SphereSurface { radius: f64 },
    /// Full momentum space truncated to a ball; `tail_bound` is the relative
    /// integral mass discarded outside it.
    MomentumBall { radius: f64, tail_bound: f64 },
    /// Box `[-h₁, h₁] × …` truncating independent Gaussian coordinates.
    CenteredBox { half: Vec<f64>, tail_bound: f64 },
}

fn chi3_tail(s: f64) -> f64 {
    erfc(s / 2f64.sqrt()) + (2.0 / PI).sqrt() * s * (-0.5 * s * s).exp()
}

fn gamma3_tail(x: f64) -> f64 {
    (-x).exp() * (1.0 + x + 0.5 * x * x)
}

/// Smallest `x ≥ 0` on a bisection grid with `tail(x) ≤ tol`.
fn invert_tail(tail: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while tail(hi) > tol {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

impl Region {
    pub fn cube(side: f64) -> Self {
        Region::Box {
            lo: vec![0.0; 3],
            hi: vec![side; 3],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Region::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    /// Ball for a Gaussian momentum law with per-component standard deviation
    /// `sigma`, keeping all but `tol` of the mass.
    pub fn gaussian_momentum_ball(sigma: f64, tol: f64) -> Self {
        let s = invert_tail(chi3_tail, tol);
        Region::MomentumBall {
            radius: s * sigma,
            tail_bound: chi3_tail(s),
        }
    }

    /// Ball for a momentum law `∝ exp(−rate·‖p‖)`.
    pub fn exponential_momentum_ball(rate: f64, tol: f64) -> Self {
        let x = invert_tail(gamma3_tail, tol);
        Region::MomentumBall {
            radius: x / rate,
            tail_bound: gamma3_tail(x),
        }
    }

    /// Centered box for independent Gaussian coordinates with the given
    /// standard deviations, keeping all but `tol` of the mass.
    pub fn gaussian_box(sigmas: &[f64], tol: f64) -> Self {
        let k = sigmas.len().max(1) as f64;
        let tail = |s: f64| erfc(s / 2f64.sqrt());
        let s = invert_tail(tail, tol / k);
        Region::CenteredBox {
            half: sigmas.iter().map(|sig| s * sig).collect(),
            tail_bound: k * tail(s),
        }
    }

    /// Number of ambient coordinates this region contributes to a phase point.
    pub fn coord_dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::CenteredBox { half, .. } => half.len(),
            _ => 3,
        }
    }

    /// Intrinsic dimension (number of quadrature axes).
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Region::SphereSurface { .. } => 2,
            other => other.coord_dim(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Region::Cylinder { radius, z_min, z_max } => PI * radius * radius * (z_max - z_min),
            Region::SphereSurface { radius } => 4.0 * PI * radius * radius,
            Region::MomentumBall { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            Region::CenteredBox { half, .. } => half.iter().map(|h| 2.0 * h).product(),
        }
    }

    pub fn tail_bound(&self) -> f64 {
        match self {
            Region::MomentumBall { tail_bound, .. } | Region::CenteredBox { tail_bound, .. } => *tail_bound,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Region::Box { lo, hi } => {
                (1..=3).contains(&lo.len())
                    && lo.len() == hi.len()
                    && lo.iter().zip(hi).all(|(a, b)| b > a && a.is_finite() && b.is_finite())
            }
            Region::Cylinder { radius, z_min, z_max } => *radius > 0.0 && z_max > z_min,
            Region::SphereSurface { radius } => *radius > 0.0,
            Region::MomentumBall { radius, .. } => *radius > 0.0 && radius.is_finite(),
            Region::CenteredBox { half, .. } => !half.is_empty() && half.iter().all(|h| *h > 0.0 && h.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("degenerate region {self:?}")))
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let slack = 1e-12;
        match self {
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v >= *a - slack && *v <= *b + slack),
            Region::Cylinder { radius, z_min, z_max } => {
                x[0] * x[0] + x[1] * x[1] <= radius * radius * (1.0 + slack)
                    && x[2] >= z_min - slack
                    && x[2] <= z_max + slack
            }
            Region::SphereSurface { radius } => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                (r - radius).abs() <= 1e-9 * radius
            }
            Region::MomentumBall { radius, .. } => {
                x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= radius * radius * (1.0 + slack)
            }
            Region::CenteredBox { half, .. } => x.iter().zip(half).all(|(v, h)| v.abs() <= h + slack),
        }
    }

    /// Uniform draw (w.r.t. the region's natural measure) into `out`.
    pub fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        match self {
            Region::Box { lo, hi } => {
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = rng.uniform_in(*a, *b);
                }
            }
            Region::Cylinder { radius, z_min, z_max } => {
                let r = radius * rng.uniform().sqrt();
                let phi = TAU * rng.uniform();
                out[0] = r * phi.cos();
                out[1] = r * phi.sin();
                out[2] = rng.uniform_in(*z_min, *z_max);
            }
            Region::SphereSurface { radius } => {
                let u = rng.unit_vector() * *radius;
                out.copy_from_slice(u.as_slice());
            }
            Region::MomentumBall { radius, .. } => {
                let r = radius * rng.uniform().cbrt();
                let u = rng.unit_vector() * r;
                out.copy_from_slice(u.as_slice());
            }
            Region::CenteredBox { half, .. } => {
                for (o, h) in out.iter_mut().zip(half) {
                    *o = rng.uniform_in(-h, *h);
                }
            }
        }
    }

    /// Parameter box used by tensor quadrature.
    pub(crate) fn param_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Region::Box { lo, hi } => lo.iter().copied().zip(hi.iter().copied()).collect(),
            Region::Cylinder { radius, z_min, z_max } => vec![(0.0, *radius), (0.0, TAU), (*z_min, *z_max)],
            Region::SphereSurface { .. } => vec![(-1.0, 1.0), (0.0, TAU)],
            Region::MomentumBall { radius, .. } => vec![(0.0, *radius), (-1.0, 1.0), (0.0, TAU)],
            Region::CenteredBox { half, .. } => half.iter().map(|h| (-h, *h)).collect(),
        }
    }

    /// Maps quadrature parameters to ambient coordinates, returning the
    /// Jacobian of the parameterization.
    pub(crate) fn param_map(&self, t: &[f64], out: &mut [f64]) -> f64 {
        match self {
            Region::Box { .. } | Region::CenteredBox { .. } => {
                out.copy_from_slice(t);
                1.0
            }
            Region::Cylinder { .. } => {
                let (r, phi) = (t[0], t[1]);
                out[0] = r * phi.cos();
                out[1] = r * phi.sin();
                out[2] = t[2];
                r
            }
            Region::SphereSurface { radius } => {
                let (u, phi) = (t[0], t[1]);
                let s = (1.0 - u * u).max(0.0).sqrt();
                out[0] = radius * s * phi.cos();
                out[1] = radius * s * phi.sin();
                out[2] = radius * u;
                radius * radius
            }
            Region::MomentumBall { .. } => {
                let (r, u, phi) = (t[0], t[1], t[2]);
                let s = (1.0 - u * u).max(0.0).sqrt();
                out[0] = r * s * phi.cos();
                out[1] = r * s * phi.sin();
                out[2] = r * u;
                r * r
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub regions: Vec<Region>,
}

impl Domain {
    pub fn new(regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(invalid("domain needs at least one region"));
        }
        for r in &regions {
            r.validate()?;
        }
        Ok(Self { regions })
    }

    pub fn coord_dim(&self) -> usize {
        self.regions.iter().map(Region::coord_dim).sum()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.regions.iter().map(Region::intrinsic_dim).sum()
    }

    pub fn volume(&self) -> f64 {
        self.regions.iter().map(Region::volume).product()
    }

    /// Upper bound on the relative mass discarded by momentum truncation.
    pub fn tail_bound(&self) -> f64 {
        // (1 − t₁)(1 − t₂)… ≥ 1 − Σ tᵢ
        self.regions.iter().map(Region::tail_bound).sum()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let mut off = 0;
        self.regions.iter().all(|r| {
            let d = r.coord_dim();
            let inside = r.contains(&z[off..off + d]);
            off += d;
            inside
        })
    }

    pub fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let mut off = 0;
        for r in &self.regions {
            let d = r.coord_dim();
            r.sample(rng, &mut out[off..off + d]);
            off += d;
        }
    }
}
