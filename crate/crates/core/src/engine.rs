//! Gibbs and generalized Gibbs states of a model, given its coupling `⟨J, b⟩`.
//!
//! Classical models use a one-dimensional abelian parameter `b` (inverse
//! temperature) and `J = H`. Everything is expressed through the log-partition
//! `log P(b)`; derivatives fall back to finite differences when a model has no
//! analytic mean.

use serde::Serialize;

use crate::error::{GibbsError, Result};
use crate::lie::LieAlgebra;
use crate::oracle::{mc_integrate, Domain};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityResult {
    pub admissible: bool,
    pub reason: String,
}

impl AdmissibilityResult {
    pub fn ok() -> Self {
        Self {
            admissible: true,
            reason: String::new(),
        }
    }

    pub fn rejected(reason: impl Into<String>) -> Self {
        Self {
            admissible: false,
            reason: reason.into(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.admissible {
            Ok(())
        } else {
            Err(GibbsError::Inadmissible(self.reason.clone()))
        }
    }
}

/// Scalar predicate shared by the classical models.
pub fn positive_scalar(b: &[f64]) -> AdmissibilityResult {
    match b {
        [x] if *x > 0.0 && x.is_finite() => AdmissibilityResult::ok(),
        [x] => AdmissibilityResult::rejected(format!("b must be > 0, got {x}")),
        _ => AdmissibilityResult::rejected(format!("expected a scalar b, got {} components", b.len())),
    }
}

/// A phase space with a momentum map, parameterized by elements `b` of a Lie
/// algebra. Phase points are flat coordinate slices laid out per the model's
/// [`Domain`].
pub trait ThermoModel: Send + Sync {
    fn name(&self) -> &str;

    fn algebra(&self) -> &dyn LieAlgebra;

    fn dim(&self) -> usize {
        self.algebra().dim()
    }

    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult;

    fn closed_log_partition(&self, _b: &[f64]) -> Option<Result<f64>> {
        None
    }

    /// Analytic `E_J(b)` as a dual vector.
    fn closed_mean(&self, _b: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Domain carrying all but a negligible part of the mass of `ρ_b`.
    fn phase_domain(&self, b: &[f64]) -> Result<Domain>;

    /// `J(z)` as a dual vector.
    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>>;

    /// `⟨J(z), b⟩`.
    fn coupling(&self, z: &[f64], b: &[f64]) -> f64;

    /// Symplectic cocycle `Θ(x)` of the momentum map.
    fn cocycle(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

impl<M: ThermoModel + ?Sized> ThermoModel for Box<M> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn algebra(&self) -> &dyn LieAlgebra {
        (**self).algebra()
    }
    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        (**self).admissibility(b)
    }
    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        (**self).closed_log_partition(b)
    }
    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).closed_mean(b)
    }
    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        (**self).phase_domain(b)
    }
    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        (**self).momentum(z)
    }
    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        (**self).coupling(z, b)
    }
    fn cocycle(&self, x: &[f64]) -> Vec<f64> {
        (**self).cocycle(x)
    }
}

/// The same model with momentum map `J + μ` for a constant dual vector `μ`.
pub struct Shifted<M> {
    pub inner: M,
    pub mu: Vec<f64>,
    name: String,
}

impl<M: ThermoModel> Shifted<M> {
    pub fn new(inner: M, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != inner.dim() {
            return Err(crate::error::invalid(format!(
                "shift has {} components, algebra has {}",
                mu.len(),
                inner.dim()
            )));
        }
        let name = format!("{}+shift", inner.name());
        Ok(Self { inner, mu, name })
    }

    fn mu_dot(&self, b: &[f64]) -> f64 {
        self.inner.algebra().pairing(&self.mu, b)
    }
}

impl<M: ThermoModel> ThermoModel for Shifted<M> {
    fn name(&self) -> &str {
        &self.name
    }
    fn algebra(&self) -> &dyn LieAlgebra {
        self.inner.algebra()
    }
    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        self.inner.admissibility(b)
    }
    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        self.inner
            .closed_log_partition(b)
            .map(|r| r.map(|v| v - self.mu_dot(b)))
    }
    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        self.inner
            .closed_mean(b)
            .map(|r| r.map(|e| e.iter().zip(&self.mu).map(|(a, m)| a + m).collect()))
    }
    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        self.inner.phase_domain(b)
    }
    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        let j = self.inner.momentum(z)?;
        Ok(j.iter().zip(&self.mu).map(|(a, m)| a + m).collect())
    }
    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        self.inner.coupling(z, b) + self.mu_dot(b)
    }
    fn cocycle(&self, x: &[f64]) -> Vec<f64> {
        let ad = self.algebra().coadjoint(x, &self.mu);
        self.inner.cocycle(x).iter().zip(ad).map(|(t, a)| t + a).collect()
    }
}

/// Multiplies the closed-form partition function by `1 + bias`. Used to check
/// that verification catches a wrong closed form.
pub struct Biased<M> {
    pub inner: M,
    pub bias: f64,
}

impl<M: ThermoModel> ThermoModel for Biased<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn algebra(&self) -> &dyn LieAlgebra {
        self.inner.algebra()
    }
    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        self.inner.admissibility(b)
    }
    fn closed_log_partition(&self, b: &[f64]) -> Option<Result<f64>> {
        self.inner
            .closed_log_partition(b)
            .map(|r| r.map(|v| v + self.bias.ln_1p()))
    }
    fn closed_mean(&self, b: &[f64]) -> Option<Result<Vec<f64>>> {
        self.inner.closed_mean(b)
    }
    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        self.inner.phase_domain(b)
    }
    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.inner.momentum(z)
    }
    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        self.inner.coupling(z, b)
    }
    fn cocycle(&self, x: &[f64]) -> Vec<f64> {
        self.inner.cocycle(x)
    }
}

/// Hides the closed forms of a model, forcing the engine onto its oracle.
pub struct OracleOnly<M>(pub M);

impl<M: ThermoModel> ThermoModel for OracleOnly<M> {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn algebra(&self) -> &dyn LieAlgebra {
        self.0.algebra()
    }
    fn admissibility(&self, b: &[f64]) -> AdmissibilityResult {
        self.0.admissibility(b)
    }
    fn phase_domain(&self, b: &[f64]) -> Result<Domain> {
        self.0.phase_domain(b)
    }
    fn momentum(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.0.momentum(z)
    }
    fn coupling(&self, z: &[f64], b: &[f64]) -> f64 {
        self.0.coupling(z, b)
    }
    fn cocycle(&self, x: &[f64]) -> Vec<f64> {
        self.0.cocycle(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoReport {
    pub b: Vec<f64>,
    pub log_p: f64,
    pub mean: Vec<f64>,
    pub entropy: f64,
    /// Covariance of `J` under `ρ_b`, `−D² log P(b)`, in algebra coordinates.
    pub variance: Vec<Vec<f64>>,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub b: f64,
    /// Energy passed from the hotter (smaller `b`) part to the colder one.
    pub transfer: f64,
    pub iterations: usize,
}

/// Evaluation settings: oracle budget and Boltzmann constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    pub n_samples: usize,
    pub seed: u64,
    pub boltzmann: f64,
    /// Oracle estimates with a larger relative standard error are refused.
    pub max_rel_stderr: f64,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            n_samples: 200_000,
            seed: 0x5eed,
            boltzmann: 1.0,
            max_rel_stderr: 0.25,
        }
    }
}

fn fd_step(b: &[f64]) -> f64 {
    (1e-5 * norm(b)).max(1e-7)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(b: &[f64], t: f64, y: &[f64]) -> Vec<f64> {
    b.iter().zip(y).map(|(a, d)| a + t * d).collect()
}

fn check_len(model: &dyn ThermoModel, v: &[f64]) -> Result<()> {
    if v.len() == model.dim() {
        Ok(())
    } else {
        Err(crate::error::invalid(format!(
            "{}: expected {} components, got {}",
            model.name(),
            model.dim(),
            v.len()
        )))
    }
}

impl Engine {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn admissibility(&self, model: &dyn ThermoModel, b: &[f64]) -> AdmissibilityResult {
        if b.len() != model.dim() {
            return AdmissibilityResult::rejected(format!("expected {} components, got {}", model.dim(), b.len()));
        }
        model.admissibility(b)
    }

    pub fn log_partition(&self, model: &dyn ThermoModel, b: &[f64]) -> Result<f64> {
        self.admissibility(model, b).check()?;
        if let Some(v) = model.closed_log_partition(b) {
            return v;
        }
        let domain = model.phase_domain(b)?;
        let est = mc_integrate(&domain, |z| (-model.coupling(z, b)).exp(), self.n_samples, self.seed)?;
        if !(est.value > 0.0) || !est.value.is_finite() || est.stderr > self.max_rel_stderr * est.value {
            return Err(GibbsError::Estimation {
                value: est.value,
                stderr: est.stderr,
                reason: format!("oracle for `{}` did not converge", model.name()),
            });
        }
        Ok(est.value.ln())
    }

    /// Directional derivative of `log P` along `y` (4th-order central).
    fn d_log_partition(&self, model: &dyn ThermoModel, b: &[f64], y: &[f64]) -> Result<f64> {
        let ny = norm(y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let u: Vec<f64> = y.iter().map(|v| v / ny).collect();
        let h = fd_step(b);
        let f = |t: f64| self.log_partition(model, &axpy(b, t, &u));
        let d = (f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h);
        Ok(ny * d)
    }

    /// `E_J(b) = −D log P(b)`, as a dual vector.
    pub fn mean_momentum(&self, model: &dyn ThermoModel, b: &[f64]) -> Result<Vec<f64>> {
        self.admissibility(model, b).check()?;
        if let Some(v) = model.closed_mean(b) {
            return v;
        }
        let n = model.dim();
        let mut c = vec![0.0; n];
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            c[i] = -self.d_log_partition(model, b, &e)?;
            e[i] = 0.0;
        }
        Ok(model.algebra().dual_from_covector(&c))
    }

    /// `S(b) = log P(b) + ⟨E_J(b), b⟩`.
    pub fn entropy(&self, model: &dyn ThermoModel, b: &[f64]) -> Result<f64> {
        let lp = self.log_partition(model, b)?;
        let e = self.mean_momentum(model, b)?;
        Ok(lp + model.algebra().pairing(&e, b))
    }

    /// `⟨DE_J(b)(y), z⟩ = −D² log P(b)(y, z)`: minus the covariance of
    /// `⟨J, y⟩` and `⟨J, z⟩` under `ρ_b`.
    pub fn covariance_form(&self, model: &dyn ThermoModel, b: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        self.admissibility(model, b).check()?;
        check_len(model, y)?;
        check_len(model, z)?;
        let alg = model.algebra();
        if model.closed_mean(b).is_some() {
            let ny = norm(y);
            if ny == 0.0 {
                return Ok(0.0);
            }
            let u: Vec<f64> = y.iter().map(|v| v / ny).collect();
            let h = fd_step(b);
            let g = |t: f64| -> Result<f64> {
                let e = self.mean_momentum(model, &axpy(b, t, &u))?;
                Ok(alg.pairing(&e, z))
            };
            let d = (g(-2.0 * h)? - 8.0 * g(-h)? + 8.0 * g(h)? - g(2.0 * h)?) / (12.0 * h);
            return Ok(ny * d);
        }
        // polarization of the second directional derivative
        let plus: Vec<f64> = y.iter().zip(z).map(|(a, c)| a + c).collect();
        let minus: Vec<f64> = y.iter().zip(z).map(|(a, c)| a - c).collect();
        Ok(-(self.second_derivative(model, b, &plus)? - self.second_derivative(model, b, &minus)?) / 4.0)
    }

    /// `D² log P(b)(w, w)` by a 5-point stencil on a larger step.
    fn second_derivative(&self, model: &dyn ThermoModel, b: &[f64], w: &[f64]) -> Result<f64> {
        let nw = norm(w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        let u: Vec<f64> = w.iter().map(|v| v / nw).collect();
        let h = (1e-3 * norm(b)).max(1e-5);
        let f = |t: f64| self.log_partition(model, &axpy(b, t, &u));
        let f0 = f(0.0)?;
        let d2 = (-f(2.0 * h)? + 16.0 * f(h)? - 30.0 * f0 + 16.0 * f(-h)? - f(-2.0 * h)?) / (12.0 * h * h);
        Ok(nw * nw * d2)
    }

    /// Covariance matrix of `J` in algebra coordinates.
    pub fn covariance_matrix(&self, model: &dyn ThermoModel, b: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = model.dim();
        let mut m = vec![vec![0.0; n]; n];
        let basis = |i: usize| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        };
        for i in 0..n {
            for j in i..n {
                let v = -self.covariance_form(model, b, &basis(i), &basis(j))?;
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        if model.closed_mean(b).is_some() {
            // one-sided differences of the analytic mean are not exactly symmetric
            for i in 0..n {
                for j in 0..i {
                    let avg = 0.5 * (m[i][j] + m[j][i]);
                    m[i][j] = avg;
                    m[j][i] = avg;
                }
            }
        }
        Ok(m)
    }

    /// `Θ_b(x) = Θ(x) − ad*_x E_J(b)`.
    pub fn theta_b(&self, model: &dyn ThermoModel, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        check_len(model, x)?;
        let e = self.mean_momentum(model, b)?;
        let ad = model.algebra().coadjoint(x, &e);
        Ok(model.cocycle(x).iter().zip(ad).map(|(t, a)| t - a).collect())
    }

    /// `Γ_b(X, Y) = ⟨Θ_b(x₁), [y₁, b]⟩` for `X = [x₁, b]`, `Y = [y₁, b]`.
    pub fn gamma_form(&self, model: &dyn ThermoModel, b: &[f64], x1: &[f64], y1: &[f64]) -> Result<f64> {
        check_len(model, y1)?;
        let alg = model.algebra();
        let t = self.theta_b(model, b, x1)?;
        Ok(alg.pairing(&t, &alg.bracket(y1, b)))
    }

    /// Gibbs density `exp(−⟨J(z), b⟩) / P(b)`.
    pub fn density(&self, model: &dyn ThermoModel, b: &[f64], z: &[f64]) -> Result<f64> {
        let lp = self.log_partition(model, b)?;
        Ok((-model.coupling(z, b) - lp).exp())
    }

    pub fn report(&self, model: &dyn ThermoModel, b: &[f64]) -> Result<ThermoReport> {
        let log_p = self.log_partition(model, b)?;
        let mean = self.mean_momentum(model, b)?;
        let entropy = log_p + model.algebra().pairing(&mean, b);
        let variance = self.covariance_matrix(model, b)?;
        let temperature = match b {
            [x] => Some(1.0 / (self.boltzmann * x)),
            _ => None,
        };
        Ok(ThermoReport {
            b: b.to_vec(),
            log_p,
            mean,
            entropy,
            variance,
            temperature,
        })
    }

    fn scalar_energy(&self, model: &dyn ThermoModel, b: f64) -> Result<f64> {
        if model.dim() != 1 {
            return Err(GibbsError::Unsupported {
                model: model.name().to_string(),
                what: "equilibration needs a scalar parameter".into(),
            });
        }
        Ok(self.mean_momentum(model, &[b])?[0])
    }

    /// Common `b′` reached when two systems at `b_a` and `b_b` exchange energy:
    /// `E_a(b′) + E_b(b′) = E_a(b_a) + E_b(b_b)`, solved by bisection.
    pub fn equilibrate(
        &self,
        model_a: &dyn ThermoModel,
        model_b: &dyn ThermoModel,
        b_a: f64,
        b_b: f64,
    ) -> Result<Equilibrium> {
        self.admissibility(model_a, &[b_a]).check()?;
        self.admissibility(model_b, &[b_b]).check()?;
        let ea = self.scalar_energy(model_a, b_a)?;
        let eb = self.scalar_energy(model_b, b_b)?;
        let total = ea + eb;
        let residual =
            |b: f64| -> Result<f64> { Ok(self.scalar_energy(model_a, b)? + self.scalar_energy(model_b, b)? - total) };
        let (mut lo, mut hi) = (b_a.min(b_b), b_a.max(b_b));
        if lo == hi {
            return Ok(Equilibrium {
                b: lo,
                transfer: 0.0,
                iterations: 0,
            });
        }
        // total energy decreases in b: the residual is positive at lo, negative at hi
        let (r_lo, r_hi) = (residual(lo)?, residual(hi)?);
        if r_lo < 0.0 || r_hi > 0.0 {
            return Err(GibbsError::Numerical(format!(
                "energy balance does not bracket a root: residuals {r_lo:e} at {lo}, {r_hi:e} at {hi}"
            )));
        }
        let tol = 1e-10 * total.abs();
        let mut iterations = 0;
        let mut mid = 0.5 * (lo + hi);
        let mut r = residual(mid)?;
        while iterations < 200 && hi - lo > 2.0 * f64::EPSILON * hi {
            iterations += 1;
            if r > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            r = residual(mid)?;
        }
        if r.abs() >= tol && hi - lo > 4.0 * f64::EPSILON * hi {
            return Err(GibbsError::Numerical(format!(
                "bisection stalled after {iterations} iterations, residual {r:e}"
            )));
        }
        let transfer = if b_a <= b_b {
            ea - self.scalar_energy(model_a, mid)?
        } else {
            eb - self.scalar_energy(model_b, mid)?
        };
        Ok(Equilibrium {
            b: mid,
            transfer,
            iterations,
        })
    }
}

/// `Σ ρᵢ log(1/ρᵢ) · cell_volume` with `0 log 0 = 0`.
pub fn grid_entropy(density_values: &[f64], cell_volume: f64) -> Result<f64> {
    if !(cell_volume > 0.0) {
        return Err(crate::error::invalid("cell volume must be positive"));
    }
    if density_values.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(crate::error::invalid("densities must be finite and non-negative"));
    }
    let mass: f64 = density_values.iter().sum::<f64>() * cell_volume;
    if (mass - 1.0).abs() > 1e-6 {
        return Err(crate::error::invalid(format!("density integrates to {mass}, not 1")));
    }
    Ok(density_values
        .iter()
        .filter(|r| **r > 0.0)
        .map(|r| -r * r.ln())
        .sum::<f64>()
        * cell_volume)
}
