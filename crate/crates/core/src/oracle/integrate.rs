use rayon::prelude::*;
use serde::Serialize;

use super::domain::Domain;
use super::rng::StreamRng;
use crate::error::{invalid, Result};

/// Samples per parallel chunk; each chunk owns one child stream.
pub const CHUNK: usize = 4096;

/// Monte-Carlo estimate of an integral or a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Estimate {
    /// `|value − target| ≤ k·stderr`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }

    /// Distance to `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.stderr
    }
}

/// Running count, mean and centred sum of squares.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Mean of a sample, as an estimate.
pub fn mean_estimate(values: impl IntoIterator<Item = f64>, seed: u64) -> Estimate {
    let m: Moments = values.into_iter().collect();
    Estimate {
        value: m.mean(),
        stderr: m.stderr(),
        n_samples: m.count(),
        seed,
    }
}

/// Runs `f(chunk_rng, chunk_len)` over `n` items split into [`CHUNK`]-sized
/// chunks with child seeds; results come back in chunk order.
pub(crate) fn chunked<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            let mut rng = StreamRng::child(seed, c as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// Plain Monte-Carlo: uniform points in `domain` times its volume.
pub fn mc_integrate<F>(domain: &Domain, integrand: F, n: usize, seed: u64) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n < 1000 {
        return Err(invalid(format!("need at least 1000 samples, got {n}")));
    }
    let volume = domain.volume();
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(invalid("domain has zero or non-finite volume"));
    }
    let dim = domain.coord_dim();
    let parts = chunked(n, seed, |rng, len| {
        let mut z = vec![0.0; dim];
        let mut m = Moments::default();
        for _ in 0..len {
            domain.sample(rng, &mut z);
            m.push(integrand(&z));
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(Estimate {
        value: volume * m.mean(),
        stderr: volume * m.stderr(),
        n_samples: n,
        seed,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor-product Gauss–Legendre quadrature over a domain of intrinsic
/// dimension at most 3.
pub fn gauss_quadrature<F>(domain: &Domain, integrand: F, nodes_per_axis: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if domain.intrinsic_dim() > 3 {
        return Err(invalid(format!(
            "quadrature supports at most 3 dimensions, got {}",
            domain.intrinsic_dim()
        )));
    }
    if !(8..=256).contains(&nodes_per_axis) {
        return Err(invalid(format!(
            "nodes per axis must lie in [8, 256], got {nodes_per_axis}"
        )));
    }
    let (x, w) = gauss_legendre(nodes_per_axis);
    // one (region, axis-bounds) list per region
    let bounds: Vec<Vec<(f64, f64)>> = domain.regions.iter().map(|r| r.param_bounds()).collect();
    let axes: Vec<(f64, f64)> = bounds.iter().flatten().copied().collect();
    let k = axes.len();
    let mut idx = vec![0usize; k];
    let mut t = vec![0.0; k];
    let mut z = vec![0.0; domain.coord_dim()];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for a in 0..k {
            let (lo, hi) = axes[a];
            let half = 0.5 * (hi - lo);
            t[a] = lo + half * (1.0 + x[idx[a]]);
            weight *= half * w[idx[a]];
        }
        let (mut toff, mut zoff) = (0, 0);
        for (r, b) in domain.regions.iter().zip(&bounds) {
            let d = r.coord_dim();
            weight *= r.param_map(&t[toff..toff + b.len()], &mut z[zoff..zoff + d]);
            toff += b.len();
            zoff += d;
        }
        total += weight * integrand(&z);
        // odometer increment
        let mut a = 0;
        loop {
            if a == k {
                return Ok(total);
            }
            idx[a] += 1;
            if idx[a] < nodes_per_axis {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::domain::Region;

    #[test]
    fn constant_over_unit_box_is_exact() {
        let d = Domain::new(vec![Region::cube(1.0)]).unwrap();
        let e = mc_integrate(&d, |_| 1.0, 10_000, 5).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn gaussian_line_integral() {
        let d = Domain::new(vec![Region::interval(-9.0, 9.0)]).unwrap();
        let f = |z: &[f64]| (-0.5 * z[0] * z[0]).exp();
        let quad = gauss_quadrature(&d, f, 128).unwrap();
        let sqrt2pi = (2.0 * std::f64::consts::PI).sqrt();
        assert!((quad - sqrt2pi).abs() < 1e-12);
        let e = mc_integrate(&d, f, 200_000, 11).unwrap();
        assert!(e.agrees_with(sqrt2pi, 3.0), "{e:?}");
    }

    #[test]
    fn too_few_samples_rejected() {
        let d = Domain::new(vec![Region::cube(1.0)]).unwrap();
        assert!(mc_integrate(&d, |_| 1.0, 999, 0).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = Domain::new(vec![Region::cube(2.0), Region::gaussian_momentum_ball(1.0, 1e-12)]).unwrap();
        let f = |z: &[f64]| (-0.5 * (z[3] * z[3] + z[4] * z[4] + z[5] * z[5])).exp();
        let a = mc_integrate(&d, f, 50_000, 77).unwrap();
        let b = mc_integrate(&d, f, 50_000, 77).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn stderr_scales_as_inverse_sqrt_n() {
        let d = Domain::new(vec![Region::cube(1.0)]).unwrap();
        let f = |z: &[f64]| (z[0] * 3.0).sin() + z[1] * z[2];
        let s: Vec<f64> = [10_000, 40_000, 160_000]
            .iter()
            .map(|&n| mc_integrate(&d, f, n, 3).unwrap().stderr)
            .collect();
        for w in s.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn polynomial_quadrature() {
        let d = Domain::new(vec![Region::interval(0.0, 1.0)]).unwrap();
        let v = gauss_quadrature(&d, |z| z[0] * z[0], 8).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn oscillator_partition_by_quadrature() {
        // ∫∫ exp(−b(p² + q²)/2) dp dq = 2π/b
        let b = 1.0;
        let d = Domain::new(vec![Region::Box {
            lo: vec![-12.0, -12.0],
            hi: vec![12.0, 12.0],
        }])
        .unwrap();
        let v = gauss_quadrature(&d, |z| (-0.5 * b * (z[0] * z[0] + z[1] * z[1])).exp(), 96).unwrap();
        assert!((v - std::f64::consts::TAU / b).abs() < 1e-10);
    }

    #[test]
    fn curved_region_volumes() {
        let one = |_: &[f64]| 1.0;
        for region in [
            Region::Cylinder {
                radius: 1.5,
                z_min: 0.0,
                z_max: 2.0,
            },
            Region::SphereSurface { radius: 2.0 },
            Region::MomentumBall {
                radius: 3.0,
                tail_bound: 0.0,
            },
        ] {
            let d = Domain::new(vec![region.clone()]).unwrap();
            let v = gauss_quadrature(&d, one, 16).unwrap();
            assert!((v / region.volume() - 1.0).abs() < 1e-13, "{region:?}");
        }
    }

    #[test]
    fn quadrature_rejects_high_dimension_and_bad_nodes() {
        let d = Domain::new(vec![Region::cube(1.0), Region::interval(0.0, 1.0)]).unwrap();
        assert!(gauss_quadrature(&d, |_| 1.0, 8).is_err());
        let d = Domain::new(vec![Region::cube(1.0)]).unwrap();
        assert!(gauss_quadrature(&d, |_| 1.0, 4).is_err());
        assert!(gauss_quadrature(&d, |_| 1.0, 257).is_err());
    }

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in [8, 17, 64, 256] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }
}
