//! Lie algebra and group machinery for SO(3) and the Galilean group.
//!
//! Duals are identified with the algebras through a fixed coordinate pairing:
//! the Euclidean dot product for `so(3)`, and for the Galilean algebra the
//! pairing `ell·ω − g·β + p·δ − κ ε` between a momentum `(ell, g, p, κ)` and a
//! generator `(ω, β, δ, ε)`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::{invalid, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
/// 5×5 matrix used for the affine representation of the Galilean group.
pub type Mat5 = SMatrix<f64, 5, 5>;

/// Skew-symmetric matrix `j(ω)` with `j(ω) r = ω × r`.
pub fn hat(omega: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -omega.z, omega.y, //
        omega.z, 0.0, -omega.x, //
        -omega.y, omega.x, 0.0,
    )
}

/// Inverse of [`hat`] on skew-symmetric matrices.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

// Below this rotation angle the closed forms lose digits to cancellation.
const SERIES_ANGLE: f64 = 1e-4;

/// Coefficients `(sinθ/θ, (1−cosθ)/θ², (θ−sinθ)/θ³, (cosθ−1+θ²/2)/θ⁴)`.
fn rotation_coefficients(theta: f64) -> (f64, f64, f64, f64) {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        let t4 = t2 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0,
            0.5 - t2 / 24.0 + t4 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
            1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        (
            s / theta,
            (1.0 - c) / t2,
            (theta - s) / (t2 * theta),
            (c - 1.0 + 0.5 * t2) / (t2 * t2),
        )
    }
}

/// Rotation `exp(j(v))` by the Rodrigues formula.
pub fn rotation_exp(v: &Vec3) -> Mat3 {
    let theta = v.norm();
    let (a, b, _, _) = rotation_coefficients(theta);
    let k = hat(v);
    Mat3::identity() + k * a + k * k * b
}

/// Rotation by `angle` about the (normalized) `axis`.
pub fn rotation_about(axis: &Vec3, angle: f64) -> Mat3 {
    let n = axis.norm();
    if n == 0.0 {
        return Mat3::identity();
    }
    rotation_exp(&(axis * (angle / n)))
}

/// Element `(ω, β, δ, ε)` of the Lie algebra of the Galilean group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalileanAlgebraElement {
    pub omega: Vec3,
    pub beta: Vec3,
    pub delta: Vec3,
    pub epsilon: f64,
}

impl GalileanAlgebraElement {
    pub fn new(omega: Vec3, beta: Vec3, delta: Vec3, epsilon: f64) -> Self {
        Self {
            omega,
            beta,
            delta,
            epsilon,
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros(), Vec3::zeros(), 0.0)
    }

    /// Admissible as a generalized-Gibbs parameter for a gas in a moving vessel.
    pub fn is_admissible(&self) -> bool {
        self.epsilon < 0.0
    }

    /// Coordinates `[ω, β, δ, ε]`.
    pub fn to_array(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        out[0..3].copy_from_slice(self.omega.as_slice());
        out[3..6].copy_from_slice(self.beta.as_slice());
        out[6..9].copy_from_slice(self.delta.as_slice());
        out[9] = self.epsilon;
        out
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() != 10 {
            return Err(invalid(format!(
                "galilean algebra element needs 10 coordinates, got {}",
                x.len()
            )));
        }
        Ok(Self::new(
            Vec3::new(x[0], x[1], x[2]),
            Vec3::new(x[3], x[4], x[5]),
            Vec3::new(x[6], x[7], x[8]),
            x[9],
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.omega * s, self.beta * s, self.delta * s, self.epsilon * s)
    }

    /// Matrix form `[[j(ω), β, δ], [0, 0, ε], [0, 0, 0]]`.
    pub fn to_matrix(&self) -> Mat5 {
        let mut m = Mat5::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&self.omega));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.beta);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.delta);
        m[(3, 4)] = self.epsilon;
        m
    }

    /// Reads back an algebra matrix; the skew block is symmetrized away.
    pub fn from_matrix(m: &Mat5) -> Self {
        let block: Mat3 = m.fixed_view::<3, 3>(0, 0).into_owned();
        Self::new(
            vee(&block),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
            m.fixed_view::<3, 1>(0, 4).into_owned(),
            m[(3, 4)],
        )
    }

    /// Commutator `[self, other]` of the matrix representation.
    pub fn bracket(&self, other: &Self) -> Self {
        let a = self.to_matrix();
        let b = other.to_matrix();
        Self::from_matrix(&(a * b - b * a))
    }
}

/// Element of the Galilean group acting on space-time by
/// `(r, t) ↦ (A r + t b + d, t + e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalileanGroupElement {
    pub a: Mat3,
    pub b_vec: Vec3,
    pub d_vec: Vec3,
    pub e: f64,
}

impl GalileanGroupElement {
    pub fn identity() -> Self {
        Self {
            a: Mat3::identity(),
            b_vec: Vec3::zeros(),
            d_vec: Vec3::zeros(),
            e: 0.0,
        }
    }

    pub fn to_matrix(&self) -> Mat5 {
        let mut m = Mat5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.a);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.b_vec);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.d_vec);
        m[(3, 4)] = self.e;
        m
    }

    /// Group product `self ∘ other` (acting on the left).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a,
            b_vec: self.a * other.b_vec + self.b_vec,
            d_vec: self.a * other.d_vec + self.b_vec * other.e + self.d_vec,
            e: self.e + other.e,
        }
    }

    pub fn inverse(&self) -> Self {
        let at = self.a.transpose();
        let b_vec = -(at * self.b_vec);
        Self {
            a: at,
            b_vec,
            d_vec: -(at * self.d_vec) - b_vec * self.e,
            e: -self.e,
        }
    }

    /// Transforms a position, time and velocity of a point particle.
    pub fn act(&self, r: &Vec3, t: f64, v: &Vec3) -> (Vec3, f64, Vec3) {
        (
            self.a * r + self.b_vec * t + self.d_vec,
            t + self.e,
            self.a * v + self.b_vec,
        )
    }
}

/// `exp(τ x)` for a Galilean algebra element, in closed form.
pub fn galilean_exp(x: &GalileanAlgebraElement, tau: f64) -> GalileanGroupElement {
    let k = hat(&x.omega) * tau;
    let theta = x.omega.norm() * tau.abs();
    let (sinc, c1, c2, c3) = rotation_coefficients(theta);
    let k2 = k * k;
    let a = Mat3::identity() + k * sinc + k2 * c1;
    let phi1 = Mat3::identity() + k * c1 + k2 * c2;
    let phi2 = Mat3::identity() * 0.5 + k * c2 + k2 * c3;
    GalileanGroupElement {
        a,
        b_vec: phi1 * x.beta * tau,
        d_vec: phi1 * x.delta * tau + phi2 * x.beta * (x.epsilon * tau * tau),
        e: tau * x.epsilon,
    }
}

/// Value `(ell, g, p, κ)` of the Galilean momentum map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalileanMomentum {
    pub ell: Vec3,
    pub g: Vec3,
    pub p: Vec3,
    pub kappa: f64,
}

impl GalileanMomentum {
    pub fn zero() -> Self {
        Self {
            ell: Vec3::zeros(),
            g: Vec3::zeros(),
            p: Vec3::zeros(),
            kappa: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        out[0..3].copy_from_slice(self.ell.as_slice());
        out[3..6].copy_from_slice(self.g.as_slice());
        out[6..9].copy_from_slice(self.p.as_slice());
        out[9] = self.kappa;
        out
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() != 10 {
            return Err(invalid(format!(
                "galilean momentum needs 10 coordinates, got {}",
                x.len()
            )));
        }
        Ok(Self {
            ell: Vec3::new(x[0], x[1], x[2]),
            g: Vec3::new(x[3], x[4], x[5]),
            p: Vec3::new(x[6], x[7], x[8]),
            kappa: x[9],
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            ell: self.ell + other.ell,
            g: self.g + other.g,
            p: self.p + other.p,
            kappa: self.kappa + other.kappa,
        }
    }
}

/// `J(r, t, v, m) = m (r × v, r − t v, v, ½‖v‖²)`.
pub fn free_particle_momentum(r: &Vec3, v: &Vec3, t: f64, m: f64) -> Result<GalileanMomentum> {
    if !(m > 0.0) {
        return Err(invalid(format!("mass must be positive, got {m}")));
    }
    Ok(GalileanMomentum {
        ell: r.cross(v) * m,
        g: (r - v * t) * m,
        p: v * m,
        kappa: 0.5 * m * v.norm_squared(),
    })
}

/// `⟨J, x⟩ = ell·ω − g·β + p·δ − κ ε`.
pub fn galilean_pairing(j: &GalileanMomentum, x: &GalileanAlgebraElement) -> f64 {
    j.ell.dot(&x.omega) - j.g.dot(&x.beta) + j.p.dot(&x.delta) - j.kappa * x.epsilon
}

/// Momentum map `J(m) = −R·Om` of the rotation group acting on a sphere.
pub fn sphere_momentum(point: &Vec3, radius: f64) -> Result<Vec3> {
    if !(radius > 0.0) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let off = (point.norm() - radius).abs();
    if off > 1e-9 * radius.max(1.0) {
        return Err(invalid(format!(
            "point is off the sphere of radius {radius} by {off:e}"
        )));
    }
    Ok(-point * radius)
}

/// `ad*_X ξ` on `so(3)`: the vector `η` with `η·Y = ξ·(X × Y)` for all `Y`.
pub fn coadjoint_star(x: &Vec3, xi: &Vec3) -> Vec3 {
    xi.cross(x)
}

/// A finite-dimensional Lie algebra in coordinates, together with the pairing
/// that identifies its dual.
pub trait LieAlgebra: Send + Sync {
    fn dim(&self) -> usize;

    fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    /// Duality pairing `⟨ξ, x⟩`.
    fn pairing(&self, xi: &[f64], x: &[f64]) -> f64 {
        xi.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Dual element `ξ` with `⟨ξ, x⟩ = Σ cᵢ xᵢ`.
    fn dual_from_covector(&self, c: &[f64]) -> Vec<f64> {
        c.to_vec()
    }

    /// `ad*_X ξ`, defined by `⟨ad*_X ξ, Y⟩ = ⟨ξ, [X, Y]⟩`.
    fn coadjoint(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut e = vec![0.0; n];
        let mut c = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            c[i] = self.pairing(xi, &self.bracket(x, &e));
            e[i] = 0.0;
        }
        self.dual_from_covector(&c)
    }
}

/// Abelian algebra `Rⁿ` (the time-translation parameter of classical models).
#[derive(Debug, Clone, Copy)]
pub struct Abelian(pub usize);

impl LieAlgebra for Abelian {
    fn dim(&self) -> usize {
        self.0
    }

    fn bracket(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0; self.0]
    }

    fn coadjoint(&self, _x: &[f64], _xi: &[f64]) -> Vec<f64> {
        vec![0.0; self.0]
    }
}

/// `so(3)` identified with Euclidean 3-space, bracket = cross product.
#[derive(Debug, Clone, Copy)]
pub struct So3;

fn v3(x: &[f64]) -> Vec3 {
    Vec3::new(x[0], x[1], x[2])
}

impl LieAlgebra for So3 {
    fn dim(&self) -> usize {
        3
    }

    fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        v3(x).cross(&v3(y)).as_slice().to_vec()
    }

    fn coadjoint(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        coadjoint_star(&v3(x), &v3(xi)).as_slice().to_vec()
    }
}

/// Lie algebra of the Galilean group in coordinates `[ω, β, δ, ε]`.
#[derive(Debug, Clone, Copy)]
pub struct GalileanAlgebra;

const GALILEAN_DUAL_SIGNS: [f64; 10] = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0];

impl LieAlgebra for GalileanAlgebra {
    fn dim(&self) -> usize {
        10
    }

    fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let x = GalileanAlgebraElement::from_slice(x).expect("10 coordinates");
        let y = GalileanAlgebraElement::from_slice(y).expect("10 coordinates");
        x.bracket(&y).to_array().to_vec()
    }

    fn pairing(&self, xi: &[f64], x: &[f64]) -> f64 {
        xi.iter()
            .zip(x)
            .zip(GALILEAN_DUAL_SIGNS)
            .map(|((a, b), s)| s * a * b)
            .sum()
    }

    fn dual_from_covector(&self, c: &[f64]) -> Vec<f64> {
        c.iter().zip(GALILEAN_DUAL_SIGNS).map(|(a, s)| a * s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_vec3() -> impl Strategy<Value = Vec3> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn arb_element() -> impl Strategy<Value = GalileanAlgebraElement> {
        (arb_vec3(), arb_vec3(), arb_vec3(), -2.0..2.0f64)
            .prop_map(|(w, b, d, e)| GalileanAlgebraElement::new(w, b, d, e))
    }

    fn mat5_close(a: &Mat5, b: &Mat5, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn hat_basics() {
        let ex = Vec3::x();
        assert_eq!(hat(&Vec3::z()) * ex, Vec3::y());
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn hat_matches_cross_product() {
        let mut s = 0x1234_5678_u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..100 {
            let w = Vec3::new(next(), next(), next());
            let r = Vec3::new(next(), next(), next());
            let d = hat(&w) * r - w.cross(&r);
            assert!(d.amax() <= 1e-15, "{d:?}");
        }
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let x = GalileanAlgebraElement::new(
            Vec3::new(0.3, -1.0, 2.0),
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(-1.0, 0.5, 0.0),
            -0.7,
        );
        assert_eq!(galilean_exp(&x, 0.0), GalileanGroupElement::identity());
    }

    #[test]
    fn exp_without_rotation_truncates() {
        let beta = Vec3::new(1.0, -2.0, 0.5);
        let delta = Vec3::new(0.3, 0.1, -4.0);
        let eps = -1.5;
        let tau = 0.8;
        let g = galilean_exp(&GalileanAlgebraElement::new(Vec3::zeros(), beta, delta, eps), tau);
        assert_eq!(g.a, Mat3::identity());
        assert!((g.b_vec - beta * tau).amax() < 1e-15);
        assert!((g.d_vec - (delta * tau + beta * (0.5 * tau * tau * eps))).amax() < 1e-15);
        assert_eq!(g.e, tau * eps);
    }

    #[test]
    fn exp_derivative_at_zero_is_generator() {
        let x = GalileanAlgebraElement::new(
            Vec3::new(0.3, -1.0, 2.0),
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(-1.0, 0.5, 0.0),
            -0.7,
        );
        let h = 1e-6;
        let d = (galilean_exp(&x, h).to_matrix() - galilean_exp(&x, -h).to_matrix()) / (2.0 * h);
        assert!(mat5_close(&d, &x.to_matrix(), 1e-8));
    }

    #[test]
    fn exp_matches_matrix_series() {
        // independent route: truncated power series of the 5×5 algebra matrix
        let x = GalileanAlgebraElement::new(
            Vec3::new(0.4, -0.2, 0.9),
            Vec3::new(1.0, 0.0, -1.0),
            Vec3::new(0.2, 0.3, 0.4),
            -1.3,
        );
        for tau in [1e-6, 1e-3, 0.5, 2.0] {
            let m = x.to_matrix() * tau;
            let mut term = Mat5::identity();
            let mut sum = Mat5::identity();
            for n in 1..60 {
                term = term * m / n as f64;
                sum += term;
            }
            assert!(mat5_close(&galilean_exp(&x, tau).to_matrix(), &sum, 1e-12), "tau={tau}");
        }
    }

    #[test]
    fn momentum_of_unit_particle() {
        let j = free_particle_momentum(&Vec3::x(), &Vec3::y(), 0.0, 1.0).unwrap();
        assert_eq!(j.ell, Vec3::z());
        assert_eq!(j.g, Vec3::x());
        assert_eq!(j.p, Vec3::y());
        assert_eq!(j.kappa, 0.5);

        let r = Vec3::new(1.0, 2.0, 3.0);
        let j = free_particle_momentum(&r, &Vec3::zeros(), 4.0, 2.5).unwrap();
        assert_eq!(j.ell, Vec3::zeros());
        assert_eq!(j.g, r * 2.5);
        assert_eq!(j.kappa, 0.0);

        assert!(free_particle_momentum(&r, &r, 0.0, 0.0).is_err());
        assert!(free_particle_momentum(&r, &r, 0.0, -1.0).is_err());
    }

    #[test]
    fn pure_energy_coupling() {
        let v = Vec3::new(1.0, -2.0, 0.5);
        let m = 3.0;
        let eps = -0.8;
        let j = free_particle_momentum(&Vec3::new(0.2, 0.3, 0.4), &v, 1.7, m).unwrap();
        let x = GalileanAlgebraElement::new(Vec3::zeros(), Vec3::zeros(), Vec3::zeros(), eps);
        let want = -0.5 * m * v.norm_squared() * eps;
        assert!((galilean_pairing(&j, &x) - want).abs() < 1e-14);
        assert_eq!(galilean_pairing(&j, &GalileanAlgebraElement::zero()), 0.0);
    }

    /// 5×5 matrix `M_J` with `tr(M_J X) = ⟨J, X⟩`.
    fn momentum_matrix(j: &GalileanMomentum) -> Mat5 {
        let mut m = Mat5::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(hat(&j.ell) * -0.5));
        for i in 0..3 {
            m[(3, i)] = -j.g[i];
            m[(4, i)] = j.p[i];
        }
        m[(4, 3)] = -j.kappa;
        m
    }

    proptest! {
        #[test]
        fn pairing_matches_trace_form(
            r in arb_vec3(), v in arb_vec3(), t in -2.0..2.0f64, m in 0.1..5.0f64,
            x in arb_element(),
        ) {
            let j = free_particle_momentum(&r, &v, t, m).unwrap();
            let trace = (momentum_matrix(&j) * x.to_matrix()).trace();
            prop_assert!((trace - galilean_pairing(&j, &x)).abs() < 1e-11);
        }

        #[test]
        fn pairing_is_invariant_along_the_generated_subgroup(
            r in arb_vec3(), v in arb_vec3(), m in 0.1..5.0f64,
            x in arb_element(), tau in -2.0..2.0f64,
        ) {
            let j0 = free_particle_momentum(&r, &v, 0.0, m).unwrap();
            let (r1, t1, v1) = galilean_exp(&x, tau).act(&r, 0.0, &v);
            let j1 = free_particle_momentum(&r1, &v1, t1, m).unwrap();
            let (a, b) = (galilean_pairing(&j0, &x), galilean_pairing(&j1, &x));
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{} vs {}", a, b);
        }

        #[test]
        fn exp_is_a_one_parameter_group(x in arb_element(), t1 in -1.5..1.5f64, t2 in -1.5..1.5f64) {
            let lhs = galilean_exp(&x, t1 + t2).to_matrix();
            let rhs = galilean_exp(&x, t1).compose(&galilean_exp(&x, t2)).to_matrix();
            prop_assert!(mat5_close(&lhs, &rhs, 1e-10));
        }

        #[test]
        fn exp_rotation_block_is_orthogonal(x in arb_element(), tau in -3.0..3.0f64) {
            let a = galilean_exp(&x, tau).a;
            prop_assert!((a.transpose() * a - Mat3::identity()).amax() < 1e-12);
            prop_assert!((a.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn compose_and_inverse(x in arb_element(), tau in -2.0..2.0f64) {
            let g = galilean_exp(&x, tau);
            let id = g.compose(&g.inverse()).to_matrix();
            prop_assert!(mat5_close(&id, &Mat5::identity(), 1e-10));
        }

        #[test]
        fn hat_is_linear_and_skew(a in arb_vec3(), b in arb_vec3(), s in -3.0..3.0f64) {
            prop_assert!((hat(&(a * s + b)) - (hat(&a) * s + hat(&b))).amax() < 1e-13);
            prop_assert_eq!(hat(&a).transpose(), -hat(&a));
        }

        #[test]
        fn pairing_is_bilinear(
            r in arb_vec3(), v in arb_vec3(), m in 0.1..5.0f64,
            x in arb_element(), y in arb_element(), s in -2.0..2.0f64,
        ) {
            let j = free_particle_momentum(&r, &v, 0.3, m).unwrap();
            let xs = GalileanAlgebraElement::from_slice(
                &x.to_array().iter().zip(y.to_array()).map(|(a, b)| s * a + b).collect::<Vec<_>>(),
            ).unwrap();
            let lhs = galilean_pairing(&j, &xs);
            let rhs = s * galilean_pairing(&j, &x) + galilean_pairing(&j, &y);
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            let j2 = j.add(&j);
            prop_assert!((galilean_pairing(&j2, &x) - 2.0 * galilean_pairing(&j, &x)).abs() < 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn coadjoint_star_defining_identity(x in arb_vec3(), xi in arb_vec3(), y in arb_vec3()) {
            let eta = coadjoint_star(&x, &xi);
            prop_assert!((eta.dot(&y) - xi.dot(&x.cross(&y))).abs() < 1e-13);
        }

        #[test]
        fn generic_coadjoint_agrees_with_so3(x in arb_vec3(), xi in arb_vec3()) {
            struct Plain;
            impl LieAlgebra for Plain {
                fn dim(&self) -> usize { 3 }
                fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> { So3.bracket(x, y) }
            }
            let a = Plain.coadjoint(x.as_slice(), xi.as_slice());
            let b = So3.coadjoint(x.as_slice(), xi.as_slice());
            for i in 0..3 { prop_assert!((a[i] - b[i]).abs() < 1e-13); }
        }

        #[test]
        fn galilean_coadjoint_defining_identity(x in arb_element(), y in arb_element(), xi in prop::array::uniform10(-2.0..2.0f64)) {
            let alg = GalileanAlgebra;
            let (x, y) = (x.to_array(), y.to_array());
            let eta = alg.coadjoint(&x, &xi);
            let lhs = alg.pairing(&eta, &y);
            let rhs = alg.pairing(&xi, &alg.bracket(&x, &y));
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn coadjoint_star_examples() {
        let xi = Vec3::new(1.0, -2.0, 0.5);
        assert!(coadjoint_star(&(xi * 3.0), &xi).amax() < 1e-15);
        // X = e_x, ξ = e_y: η·Y = e_y·(e_x × Y) gives η = −e_z
        let eta = coadjoint_star(&Vec3::x(), &Vec3::y());
        assert_eq!(eta, -Vec3::z());
        for y in [Vec3::x(), Vec3::y(), Vec3::z()] {
            assert_eq!(eta.dot(&y), Vec3::y().dot(&Vec3::x().cross(&y)));
        }
    }

    #[test]
    fn sphere_momentum_cases() {
        assert_eq!(sphere_momentum(&Vec3::z(), 1.0).unwrap(), -Vec3::z());
        let p = Vec3::new(1.0, 2.0, 2.0);
        let a = sphere_momentum(&p, 3.0).unwrap();
        let b = sphere_momentum(&-p, 3.0).unwrap();
        assert_eq!(a, -b);
        let bvec = Vec3::new(0.3, -0.1, 2.0);
        assert!((a.dot(&bvec) + 3.0 * p.dot(&bvec)).abs() < 1e-14);
        assert!(sphere_momentum(&Vec3::new(1.0, 0.0, 0.1), 1.0).is_err());
    }

    #[test]
    fn galilean_bracket_of_rotations_is_cross_product() {
        let a = GalileanAlgebraElement::new(Vec3::x(), Vec3::zeros(), Vec3::zeros(), 0.0);
        let b = GalileanAlgebraElement::new(Vec3::y(), Vec3::zeros(), Vec3::zeros(), 0.0);
        let c = a.bracket(&b);
        assert!((c.omega - Vec3::z()).amax() < 1e-15);
        // time translation and boost: [ε, β] produces a translation
        let t = GalileanAlgebraElement::new(Vec3::zeros(), Vec3::zeros(), Vec3::zeros(), 1.0);
        let boost = GalileanAlgebraElement::new(Vec3::zeros(), Vec3::x(), Vec3::zeros(), 0.0);
        let c = boost.bracket(&t);
        assert_eq!(c.delta, Vec3::x());
    }
}
