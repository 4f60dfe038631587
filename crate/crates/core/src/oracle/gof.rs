use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::batch::{ParticleState, SampleBatch};
use super::integrate::gauss_legendre;
use crate::error::{invalid, Result};

/// Minimum expected count per bin after rebinning.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins_used: usize,
}

/// Pearson chi-square of `values` against `density` on `[lo, hi]`.
///
/// `density` need not be normalized; it is integrated numerically bin by bin.
/// Adjacent bins are merged until every expected count is at least 5.
pub fn chi_square_gof<F>(values: &[f64], density: F, lo: f64, hi: f64, bins: usize) -> Result<GofResult>
where
    F: Fn(f64) -> f64,
{
    if bins < 5 {
        return Err(invalid(format!("need at least 5 bins, got {bins}")));
    }
    if values.is_empty() {
        return Err(invalid("empty sample"));
    }
    if !(hi > lo) {
        return Err(invalid(format!("empty range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &v in values {
        if !(v >= lo && v <= hi) {
            return Err(invalid(format!("value {v} outside [{lo}, {hi}]")));
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1.0;
    }

    let (x, w) = gauss_legendre(24);
    let mass: Vec<f64> = (0..bins)
        .map(|k| {
            let a = lo + k as f64 * width;
            let half = 0.5 * width;
            x.iter()
                .zip(&w)
                .map(|(x, w)| w * density(a + half * (1.0 + x)))
                .sum::<f64>()
                * half
        })
        .collect();
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(invalid("density has no mass on the range"));
    }
    let n = values.len() as f64;

    let mut merged: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, m) in counts.iter().zip(&mass) {
        obs += c;
        exp += n * m / total;
        if exp >= MIN_EXPECTED {
            merged.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => merged.push((obs, exp)),
        }
    }
    if merged.len() < 2 {
        return Err(invalid("fewer than two bins after rebinning"));
    }

    let statistic: f64 = merged.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = merged.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| invalid(e.to_string()))?
        .sf(statistic);
    Ok(GofResult {
        statistic,
        dof,
        p_value,
        bins_used: merged.len(),
    })
}

/// Chi-square test of one particle's projected coordinate across a batch.
pub fn gof_statistic<P, F>(
    batch: &SampleBatch,
    particle: usize,
    projection: P,
    density: F,
    range: (f64, f64),
    bins: usize,
) -> Result<GofResult>
where
    P: Fn(&ParticleState) -> f64,
    F: Fn(f64) -> f64,
{
    if batch.is_empty() {
        return Err(invalid("empty batch"));
    }
    if particle >= batch.n_particles {
        return Err(invalid(format!("no particle {particle} in batch")));
    }
    let values: Vec<f64> = batch.particle(particle).map(projection).collect();
    chi_square_gof(&values, density, range.0, range.1, bins)
}
