//! Special functions used by the closed-form partition functions.

use crate::error::{invalid, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol * (b - a) / whole || depth >= 48 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, whole, tol, depth + 1) + adapt(f, m, b, whole, tol, depth + 1)
}

/// Adaptive Gauss–Kronrod quadrature of `f` on `[a, b]` to relative accuracy
/// `rel_tol` of the total.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let panels = 16;
    let w = (b - a) / panels as f64;
    let rough: f64 = (0..panels)
        .map(|i| gk15(&f, a + i as f64 * w, a + (i + 1) as f64 * w).0.abs())
        .sum();
    if rough == 0.0 {
        return 0.0;
    }
    let tol = rel_tol * rough;
    (0..panels)
        .map(|i| adapt(&f, a + i as f64 * w, a + (i + 1) as f64 * w, b - a, tol, 0))
        .sum()
}

/// Upper limit beyond which `exp(x − x cosh χ) < 1e-18`.
fn chi_max(x: f64) -> f64 {
    (1.0 + 18.0 * std::f64::consts::LN_10 / x).acosh()
}

const BESSEL_REL_TOL: f64 = 1e-13;

fn check_arg(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("Bessel argument must be positive, got {x}")))
    }
}

/// `eˣ K_ν(x)` from `K_ν(x) = ∫₀^∞ exp(−x cosh χ) cosh(νχ) dχ`.
pub fn bessel_k_scaled(nu: u32, x: f64) -> Result<f64> {
    check_arg(x)?;
    let nu = nu as f64;
    let f = |chi: f64| (-x * (chi.cosh() - 1.0)).exp() * (nu * chi).cosh();
    Ok(adaptive_quad(f, 0.0, chi_max(x), BESSEL_REL_TOL))
}

pub fn bessel_k(nu: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)? * (-x).exp())
}

/// `eˣ K₂(x)` from `K₂(x) = x ∫₀^∞ exp(−x cosh χ) sinh²χ cosh χ dχ`.
pub fn bessel_k2_scaled(x: f64) -> Result<f64> {
    check_arg(x)?;
    let f = |chi: f64| {
        let s = chi.sinh();
        let c = chi.cosh();
        (-x * (c - 1.0)).exp() * s * s * c
    };
    Ok(x * adaptive_quad(f, 0.0, chi_max(x), BESSEL_REL_TOL))
}

pub fn bessel_k2(x: f64) -> Result<f64> {
    Ok(bessel_k2_scaled(x)? * (-x).exp())
}

/// `log K₂(x)`, finite for arguments where `K₂` itself underflows.
pub fn log_bessel_k2(x: f64) -> Result<f64> {
    Ok(bessel_k2_scaled(x)?.ln() - x)
}

/// `(1 − e^{−x}) / x`, with its limit 1 at `x = 0`.
pub fn one_minus_exp_neg_over_x(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `log((1 − e^{−x}) / x)`.
pub fn log_one_minus_exp_neg_over_x(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        one_minus_exp_neg_over_x(x).ln()
    } else if x > 0.0 {
        (-(-x).exp_m1()).ln() - x.ln()
    } else {
        (-x).exp_m1().ln() - (-x).ln()
    }
}

/// `1/x − 1/(eˣ − 1)`, the mean of `z·x/h` for a truncated exponential.
pub fn truncated_exp_mean(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.5 - x / 12.0 + x.powi(3) / 720.0
    } else {
        1.0 / x - 1.0 / x.exp_m1()
    }
}

/// `log sinh(x)` for `x > 0` without overflow.
pub fn log_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        x.sinh().ln()
    }
}

/// `log(sinh(y)/y)` with its limit 0 at `y = 0`.
pub fn log_sinhc(y: f64) -> f64 {
    if y < 1e-4 {
        let y2 = y * y;
        y2 / 6.0 - y2 * y2 / 180.0
    } else {
        log_sinh(y) - y.ln()
    }
}

/// Langevin function `coth y − 1/y`.
pub fn langevin(y: f64) -> f64 {
    if y < 1e-3 {
        let y2 = y * y;
        y / 3.0 - y * y2 / 45.0 + 2.0 * y * y2 * y2 / 945.0
    } else if y > 20.0 {
        1.0 + 2.0 * (-2.0 * y).exp() / (1.0 - (-2.0 * y).exp()) - 1.0 / y
    } else {
        1.0 / y.tanh() - 1.0 / y
    }
}

/// Derivative of the Langevin function, `1/y² − 1/sinh²y`.
pub fn langevin_prime(y: f64) -> f64 {
    if y < 1e-3 {
        let y2 = y * y;
        1.0 / 3.0 - y2 / 15.0 + 2.0 * y2 * y2 / 189.0
    } else if y > 350.0 {
        1.0 / (y * y)
    } else {
        let s = y.sinh();
        1.0 / (y * y) - 1.0 / (s * s)
    }
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{gauss_quadrature, Domain, Region};

    #[test]
    fn small_argument_limit() {
        let x = 1e-3;
        let v = x * x * bessel_k2(x).unwrap();
        assert!((v / 2.0 - 1.0).abs() < 2e-3, "{v}");
    }

    #[test]
    fn large_argument_asymptotics() {
        let x = 50.0;
        let lead = bessel_k2_scaled(x).unwrap() * (2.0 * x / std::f64::consts::PI).sqrt();
        assert!((lead / (1.0 + 15.0 / (8.0 * x)) - 1.0).abs() < 1e-3, "{lead}");
    }

    #[test]
    fn recurrence_against_cosh_representation() {
        for x in [0.5, 1.0, 5.0] {
            let k2 = bessel_k2(x).unwrap();
            let rhs = bessel_k(0, x).unwrap() + 2.0 / x * bessel_k(1, x).unwrap();
            assert!(((k2 - rhs) / k2).abs() < 1e-9, "x={x}: {k2} vs {rhs}");
        }
    }

    #[test]
    fn reference_values() {
        // K₂(1) = 1.6248388986351774..., K₀(1) = 0.42102443824070834, K₁(1) = 0.6019072301972346
        assert!((bessel_k2(1.0).unwrap() / 1.624_838_898_635_177_4 - 1.0).abs() < 1e-10);
        assert!((bessel_k(0, 1.0).unwrap() / 0.421_024_438_240_708_34 - 1.0).abs() < 1e-10);
        assert!((bessel_k(1, 1.0).unwrap() / 0.601_907_230_197_234_6 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn k2_self_convergence_under_fixed_quadrature() {
        let x = 1.0;
        let hi = chi_max(x);
        let d = Domain::new(vec![Region::interval(0.0, hi)]).unwrap();
        let f = |z: &[f64]| {
            let (s, c) = (z[0].sinh(), z[0].cosh());
            x * (-x * c).exp() * s * s * c
        };
        let a = gauss_quadrature(&d, f, 64).unwrap();
        let b = gauss_quadrature(&d, f, 128).unwrap();
        assert!(((a - b) / b).abs() < 1e-10);
        assert!(((b - bessel_k2(x).unwrap()) / b).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(bessel_k2(0.0).is_err());
        assert!(bessel_k2(-1.0).is_err());
        assert!(bessel_k_scaled(1, f64::NAN).is_err());
    }

    #[test]
    fn log_k2_survives_underflow() {
        let v = log_bessel_k2(2000.0).unwrap();
        assert!(v.is_finite());
        // leading asymptotics: log √(π/2x) − x
        let lead = (std::f64::consts::PI / 4000.0).sqrt().ln() - 2000.0;
        assert!((v - lead).abs() < 1e-2);
    }

    #[test]
    fn cancellation_safe_helpers() {
        for x in [1e-9, 1e-6, 1e-5, 2e-5, 0.1, 3.0, 50.0] {
            let direct = (1.0 - (-x as f64).exp()) / x;
            let v = one_minus_exp_neg_over_x(x);
            if x > 1e-3 {
                assert!((v / direct - 1.0).abs() < 1e-12);
            }
            assert!((log_one_minus_exp_neg_over_x(x) - v.ln()).abs() < 1e-12);
        }
        assert_eq!(one_minus_exp_neg_over_x(0.0), 1.0);
        assert!((log_sinh(30.0) - 30f64.sinh().ln()).abs() < 1e-12);
        assert!(log_sinh(1000.0).is_finite());
        assert!((log_sinhc(1e-5) - (1e-5f64.sinh() / 1e-5).ln()).abs() < 1e-15);
        assert!((langevin(0.5) - (1.0 / 0.5f64.tanh() - 2.0)).abs() < 1e-15);
        assert!((langevin(9.9e-4) - (1.0 / 9.9e-4f64.tanh() - 1.0 / 9.9e-4)).abs() < 1e-10);
        assert!((truncated_exp_mean(1.0) - (1.0 - 1.0 / (1f64.exp() - 1.0))).abs() < 1e-15);
        assert!((truncated_exp_mean(9e-5) - (1.0 / 9e-5 - 1.0 / 9e-5f64.exp_m1())).abs() < 1e-8);
    }

    #[test]
    fn langevin_prime_matches_difference() {
        for y in [1e-4f64, 0.3, 2.0, 15.0, 40.0] {
            let h = 1e-6 * y.max(1e-2);
            let fd = (langevin(y + h) - langevin(y - h)) / (2.0 * h);
            assert!((fd - langevin_prime(y)).abs() < 1e-7, "y={y}");
        }
    }
}
