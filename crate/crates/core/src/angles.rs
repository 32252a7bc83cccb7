//! External angles of regular cross-polytopes and simplexes, and the
//! integrals `I_{n,l}` that carry them into the Steiner coefficients.
//!
//! Every inner Gaussian integral is rewritten through `erf`, so each quantity
//! is a single smooth one-dimensional integral of the form
//! `∫ e^{-x²} g(x/s)^k dx`. Large powers are taken in log-space.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
pub use crate::quadrature::IntegralValue;
use crate::specfun::{erf, log_gamma_unchecked, log_half_erfc_neg};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Initial equal splits of the integration range.
const INITIAL_PIECES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Target absolute error of each integral.
    pub abs_tol: f64,
    /// Target error relative to the integral's magnitude.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Upper integration limit `X`; the Gaussian tail beyond it is dropped.
    pub truncation_radius: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
            truncation_radius: 10.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if !(self.truncation_radius >= 6.0) {
            return Err(Error::Domain(format!(
                "truncation radius must be at least 6, got {}",
                self.truncation_radius
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    /// Halves both tolerances.
    pub fn tightened(&self) -> Self {
        Self {
            abs_tol: self.abs_tol / 2.0,
            rel_tol: self.rel_tol / 2.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Quantity {
    GammaCross,
    GammaSimplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    quantity: Quantity,
    n: usize,
    l: usize,
    cfg: [u64; 4],
}

impl CacheKey {
    fn new(quantity: Quantity, n: usize, l: usize, cfg: &QuadratureConfig) -> Self {
        Self {
            quantity,
            n,
            l,
            cfg: [
                cfg.abs_tol.to_bits(),
                cfg.rel_tol.to_bits(),
                cfg.max_subdivisions as u64,
                cfg.truncation_radius.to_bits(),
            ],
        }
    }
}

fn cache() -> &'static Mutex<HashMap<CacheKey, IntegralValue>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, IntegralValue>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Looks up `key`, computing it outside the lock on a miss. The computation is
/// deterministic, so concurrent misses on one key insert identical values.
fn cached(key: CacheKey, compute: impl FnOnce() -> Result<IntegralValue>) -> Result<IntegralValue> {
    if let Some(v) = cache().lock().expect("angle cache poisoned").get(&key) {
        return Ok(*v);
    }
    let v = compute()?;
    cache()
        .lock()
        .expect("angle cache poisoned")
        .entry(key)
        .or_insert(v);
    Ok(v)
}

/// `prefactor · ∫_0^X e^{-x²} erf(x/s)^k dx`.
fn half_line_erf_power(
    prefactor: f64,
    scale: f64,
    power: usize,
    cfg: &QuadratureConfig,
) -> Result<IntegralValue> {
    let k = power as f64;
    let f = |x: f64| {
        if power == 0 {
            return prefactor * (-x * x).exp();
        }
        let e = erf(x / scale);
        if e <= 0.0 {
            return 0.0;
        }
        prefactor * (-x * x + k * e.ln()).exp()
    };
    integrate(
        f,
        0.0,
        cfg.truncation_radius,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
        INITIAL_PIECES,
    )
}

/// `(1/√π) ∫_{-X}^{X} e^{-x²} ((1 + erf(x/s))/2)^k dx`.
fn full_line_cdf_power(scale: f64, power: usize, cfg: &QuadratureConfig) -> Result<IntegralValue> {
    let k = power as f64;
    let f = |x: f64| {
        let log_inner = if power == 0 {
            0.0
        } else {
            k * log_half_erfc_neg(x / scale)
        };
        FRAC_1_SQRT_PI * (-x * x + log_inner).exp()
    };
    let x = cfg.truncation_radius;
    integrate(
        f,
        -x,
        x,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
        2 * INITIAL_PIECES,
    )
}

/// External angle `γ_l(C^n)` of the regular cross-polytope at an `l`-face,
/// `(1/√π) ∫_0^∞ e^{-x²} erf(x/√(l+1))^{n-l-1} dx`.
pub fn gamma_cross(n: usize, l: usize, cfg: &QuadratureConfig) -> Result<IntegralValue> {
    cfg.validate()?;
    if n == 0 || l >= n {
        return Err(Error::Domain(format!(
            "cross-polytope angle needs 0 <= l <= n-1, got n={n} l={l}"
        )));
    }
    cached(CacheKey::new(Quantity::GammaCross, n, l, cfg), || {
        half_line_erf_power(FRAC_1_SQRT_PI, ((l + 1) as f64).sqrt(), n - l - 1, cfg)
    })
}

/// External angle `γ_l(S^n)` of the regular simplex at an `l`-face,
/// `(1/√π) ∫ e^{-x²} ((1+erf(x/√(l+1)))/2)^{n-l} dx`.
pub fn gamma_simplex(n: usize, l: usize, cfg: &QuadratureConfig) -> Result<IntegralValue> {
    cfg.validate()?;
    if n == 0 || l > n {
        return Err(Error::Domain(format!(
            "simplex angle needs 0 <= l <= n, got n={n} l={l}"
        )));
    }
    cached(CacheKey::new(Quantity::GammaSimplex, n, l, cfg), || {
        full_line_cdf_power(((l + 1) as f64).sqrt(), n - l, cfg)
    })
}

/// `I_{n,l} = (2/√π) ∫_0^∞ e^{-x²} erf(x/√(n-l+1))^{l-1} dx` for `1 <= l <= n`.
pub fn i_cross(n: usize, l: usize, cfg: &QuadratureConfig) -> Result<IntegralValue> {
    cfg.validate()?;
    if l < 1 || l > n {
        return Err(Error::Domain(format!(
            "cross-polytope I needs 1 <= l <= n, got n={n} l={l}"
        )));
    }
    half_line_erf_power(FRAC_2_SQRT_PI, ((n - l + 1) as f64).sqrt(), l - 1, cfg)
}

/// `I_{n,l} = (1/√π) ∫ e^{-x²} ((1+erf(x/√(n-l+1)))/2)^l dx` for `0 <= l <= n`.
pub fn i_simplex(n: usize, l: usize, cfg: &QuadratureConfig) -> Result<IntegralValue> {
    cfg.validate()?;
    if n == 0 || l > n {
        return Err(Error::Domain(format!(
            "simplex I needs 0 <= l <= n, got n={n} l={l}"
        )));
    }
    full_line_cdf_power(((n - l + 1) as f64).sqrt(), l, cfg)
}

/// Leading term `(1/2)(2/√π)^l n^{-(l-1)/2} Γ(l/2)` of `I_{n,l}` for cross-polytopes.
pub fn i_cross_asymptotic(n: usize, l: usize) -> Result<f64> {
    if l < 1 || n == 0 {
        return Err(Error::Domain(format!(
            "asymptotic I needs l >= 1 and n >= 1, got n={n} l={l}"
        )));
    }
    let lf = l as f64;
    let ln = 0.5f64.ln() + lf * (2.0 / PI.sqrt()).ln() - 0.5 * (lf - 1.0) * (n as f64).ln()
        + log_gamma_unchecked(0.5 * lf);
    Ok(ln.exp())
}

/// Leading term `2^{-l}` of `I_{n,l}` for simplexes.
pub fn i_simplex_asymptotic(l: usize) -> f64 {
    0.5f64.powi(l as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Composite Simpson on the raw nested form: an outer rule over x with the
    /// inner Gaussian integral done by its own Simpson rule, no erf involved.
    fn nested_simpson_cross(n: usize, l: usize) -> f64 {
        let inner = |u: f64| {
            let m = 400;
            let h = u / m as f64;
            let mut s = 1.0 + (-u * u).exp();
            for i in 1..m {
                let y = h * i as f64;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * (-y * y).exp();
            }
            s * h / 3.0
        };
        let k = n - l - 1;
        let s = ((l + 1) as f64).sqrt();
        let m = 2000;
        let top = 9.0;
        let h = top / m as f64;
        let g = |x: f64| (-x * x).exp() * inner(x / s).powi(k as i32);
        let mut acc = g(0.0) + g(top);
        for i in 1..m {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(h * i as f64);
        }
        let integral = acc * h / 3.0;
        2f64.powi(k as i32) / PI.powf((n - l) as f64 / 2.0) * integral
    }

    #[test]
    fn gamma_cross_top_face_is_half() {
        for n in 1..40 {
            let v = gamma_cross(n, n - 1, &cfg()).unwrap();
            assert!((v.value - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_cross_square_vertex() {
        let v = gamma_cross(2, 0, &cfg()).unwrap().value;
        assert!((v - 0.25).abs() < 1e-12);
        assert!((nested_simpson_cross(2, 0) - 0.25).abs() < 1e-8);
    }

    #[test]
    fn gamma_cross_octahedron_vertex_below_quarter() {
        let v = gamma_cross(3, 0, &cfg()).unwrap().value;
        assert!(v > 0.0 && v < 0.25);
        assert!((v - nested_simpson_cross(3, 0)).abs() < 1e-8);
        // Six vertices of the octahedron with equal angles; V_0 = 1.
        assert!((6.0 * v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_cross_matches_nested_form() {
        for (n, l) in [(4, 1), (5, 0), (6, 3), (7, 2)] {
            let v = gamma_cross(n, l, &cfg()).unwrap().value;
            assert!((v - nested_simpson_cross(n, l)).abs() < 1e-8, "n={n} l={l}");
        }
    }

    #[test]
    fn gamma_cross_rejects_body_index() {
        assert!(gamma_cross(3, 3, &cfg()).is_err());
        assert!(gamma_cross(0, 0, &cfg()).is_err());
    }

    #[test]
    fn gamma_simplex_exact_values() {
        let c = cfg();
        assert!((gamma_simplex(7, 7, &c).unwrap().value - 1.0).abs() < 1e-12);
        assert!((gamma_simplex(7, 6, &c).unwrap().value - 0.5).abs() < 1e-12);
        assert!((gamma_simplex(7, 0, &c).unwrap().value - 0.125).abs() < 1e-12);
        assert!(gamma_simplex(7, 8, &c).is_err());
    }

    #[test]
    fn i_cross_first_index_is_one() {
        for n in [1, 5, 50] {
            assert!((i_cross(n, 1, &cfg()).unwrap().value - 1.0).abs() < 1e-12);
        }
        assert!(i_cross(5, 0, &cfg()).is_err());
        assert!(i_cross(5, 6, &cfg()).is_err());
    }

    #[test]
    fn i_cross_large_n_matches_asymptotic() {
        let q = i_cross(10_000, 2, &cfg()).unwrap().value;
        let a = i_cross_asymptotic(10_000, 2).unwrap();
        assert!((a - 2.0 / PI / 100.0).abs() < 1e-15);
        assert!((q - 0.006_366).abs() / 0.006_366 < 0.02);
        assert!((q / a - 1.0).abs() < 0.02);
    }

    #[test]
    fn index_substitution_identities() {
        let c = cfg();
        for n in 1..=40 {
            for l in 1..=n {
                let i = i_cross(n, l, &c).unwrap().value;
                let g = gamma_cross(n, n - l, &c).unwrap().value;
                assert!((i - 2.0 * g).abs() < 1e-10, "cross n={n} l={l}");
            }
            for l in 0..=n {
                let i = i_simplex(n, l, &c).unwrap().value;
                let g = gamma_simplex(n, n - l, &c).unwrap().value;
                assert!((i - g).abs() < 1e-10, "simplex n={n} l={l}");
            }
        }
    }

    #[test]
    fn i_simplex_exact_values() {
        let c = cfg();
        for n in [1, 4, 9, 33] {
            assert!((i_simplex(n, 0, &c).unwrap().value - 1.0).abs() < 1e-12);
            assert!((i_simplex(n, 1, &c).unwrap().value - 0.5).abs() < 1e-12);
        }
        assert!((i_simplex(9, 9, &c).unwrap().value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_examples() {
        assert!((i_cross_asymptotic(7, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((i_cross_asymptotic(100, 2).unwrap() - 0.063_662).abs() < 1e-6);
        // (1/2)(2/√π)^3 Γ(3/2) / n with n = 10^6
        let direct = 0.5 * (2.0 / PI.sqrt()).powi(3) * (0.5 * PI.sqrt()) / 1e6;
        let got = i_cross_asymptotic(1_000_000, 3).unwrap();
        assert!((got - direct).abs() < 1e-18);
        assert!((got - 6.3662e-7).abs() < 1e-10);
        assert_eq!(i_simplex_asymptotic(0), 1.0);
        assert_eq!(i_simplex_asymptotic(1), 0.5);
        assert_eq!(i_simplex_asymptotic(4), 0.0625);
    }

    #[test]
    fn values_strictly_inside_unit_interval() {
        let c = cfg();
        for n in (1..=200).step_by(13) {
            for l in 1..=n {
                let v = i_cross(n, l, &c).unwrap();
                assert!(v.value > 0.0 && v.value <= 1.0 + 1e-12, "cross n={n} l={l}");
                assert!(l == 1 || v.value < 1.0);
            }
            for l in 1..=n {
                let v = i_simplex(n, l, &c).unwrap();
                assert!(v.value > 0.0 && v.value < 1.0, "simplex n={n} l={l}");
            }
        }
    }

    #[test]
    fn error_estimates_honor_tolerance() {
        let c = cfg();
        for n in [3, 17, 60, 150] {
            for l in [0, n / 3, n / 2, n - 1] {
                let g = gamma_cross(n, l, &c).unwrap();
                assert!(g.error_estimate <= c.abs_tol);
                let s = gamma_simplex(n, l, &c).unwrap();
                assert!(s.error_estimate <= c.abs_tol);
            }
        }
    }

    #[test]
    fn tightening_moves_value_less_than_previous_estimate() {
        let loose = QuadratureConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            ..cfg()
        };
        let tight = loose.tightened();
        for (n, l) in [(10, 2), (40, 20), (60, 5)] {
            let a = i_cross(n, l, &loose).unwrap();
            let b = i_cross(n, l, &tight).unwrap();
            assert!((a.value - b.value).abs() <= a.error_estimate.max(f64::EPSILON));
            let a = i_simplex(n, l, &loose).unwrap();
            let b = i_simplex(n, l, &tight).unwrap();
            assert!((a.value - b.value).abs() <= a.error_estimate.max(f64::EPSILON));
        }
    }

    #[test]
    fn convergence_toward_asymptotics() {
        let c = cfg();
        for l in [2, 3] {
            let mut prev_s = f64::INFINITY;
            let mut prev_c = f64::INFINITY;
            for n in [10, 40, 160, 640] {
                let ds = (i_simplex(n, l, &c).unwrap().value - i_simplex_asymptotic(l)).abs();
                assert!(ds < prev_s, "simplex l={l} n={n}");
                prev_s = ds;
                let ratio = i_cross(n, l, &c).unwrap().value / i_cross_asymptotic(n, l).unwrap();
                let dc = (ratio - 1.0).abs();
                assert!(dc < prev_c, "cross l={l} n={n}");
                prev_c = dc;
            }
        }
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig {
            truncation_radius: 4.0,
            ..cfg()
        };
        assert!(gamma_cross(3, 1, &bad).is_err());
        let bad = QuadratureConfig {
            abs_tol: 0.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }
}
