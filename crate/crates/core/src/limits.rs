//! The limiting entire functions of the renormalized families as `n → ∞` and
//! the sup-distance of `𝓜_{K^n}` to its limit on a circle `|τ| = r`.
//!
//! Balls and cross-polytopes tend to `E1(τ) = e^τ`; cubes and simplexes tend to
//! `E2(τ) = Σ (√π/2)^l τ^l / (Γ(l/2+1) l!)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::QuadratureConfig;
use crate::error::{Error, Result};
use crate::families::{FamilyInstance, Kind};
use crate::numfmt;
use crate::polynomials::{evaluate, renormalized};
use crate::specfun::{log_factorial, log_gamma_unchecked};

/// Fewest grid points accepted on the circle.
pub const MIN_SAMPLES: usize = 64;
pub const DEFAULT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitFunction {
    E1,
    E2,
}

impl LimitFunction {
    /// Taylor coefficient of `τ^l`.
    pub fn coefficient(self, l: usize) -> f64 {
        self.ln_coefficient(l).exp()
    }

    pub fn ln_coefficient(self, l: usize) -> f64 {
        match self {
            LimitFunction::E1 => -log_factorial(l),
            LimitFunction::E2 => {
                let lf = l as f64;
                lf * (0.5 * PI.ln() - 2f64.ln()) - log_gamma_unchecked(0.5 * lf + 1.0) - log_factorial(l)
            }
        }
    }
}

pub fn limit_for(kind: Kind) -> LimitFunction {
    match kind {
        Kind::Ball | Kind::CrossPolytope => LimitFunction::E1,
        Kind::Cube | Kind::Simplex => LimitFunction::E2,
    }
}

/// `E1` through the complex exponential; `E2` by its series, stopped once
/// `Σ_{l>L} |τ|^l / l!`, which dominates the remaining tail, is below `tol`.
pub fn eval_limit(f: LimitFunction, tau: Complex64, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(tau.re.is_finite() && tau.im.is_finite()) {
        return Err(Error::Domain("tau must be finite".into()));
    }
    match f {
        LimitFunction::E1 => Ok(tau.exp()),
        LimitFunction::E2 => {
            let r = tau.norm();
            let mut sum = Complex64::new(0.0, 0.0);
            let mut power = Complex64::new(1.0, 0.0);
            // r^{l+1}/(l+1)! tracked alongside the partial sums
            let mut next_majorant = r;
            let mut l = 0usize;
            loop {
                sum += power * f.coefficient(l);
                power *= tau;
                let tail_ratio = r / (l as f64 + 2.0);
                if tail_ratio < 1.0 && next_majorant / (1.0 - tail_ratio) < tol {
                    return Ok(sum);
                }
                l += 1;
                next_majorant *= r / (l as f64 + 1.0);
                if l > 100_000 {
                    return Err(Error::Domain(format!("series did not reach {tol} at |tau| = {r}")));
                }
            }
        }
    }
}

/// `d_n = max_k |𝓜_{K^n}(τ_k) − limit(τ_k)|` over `τ_k = r e^{2πik/samples}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceProfile {
    pub kind: Kind,
    pub limit: LimitFunction,
    #[serde(with = "numfmt::scalar")]
    pub radius: f64,
    pub samples: usize,
    pub dims: Vec<usize>,
    #[serde(with = "numfmt::vector")]
    pub distances: Vec<f64>,
}

impl ConvergenceProfile {
    /// Columns `n,d_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d_n\n");
        for (n, d) in self.dims.iter().zip(&self.distances) {
            let _ = writeln!(out, "{n},{}", numfmt::fmt17(*d));
        }
        out
    }
}

const LIMIT_TOL: f64 = 1e-17;

pub fn convergence_profile(
    kind: Kind,
    dims: &[usize],
    r: f64,
    samples: usize,
    cfg: &QuadratureConfig,
) -> Result<ConvergenceProfile> {
    if dims.is_empty() {
        return Err(Error::Domain("at least one dimension is required".into()));
    }
    if dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("dimensions must be positive and strictly increasing".into()));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be finite and nonnegative, got {r}")));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let limit = limit_for(kind);
    let grid: Vec<Complex64> = (0..samples)
        .map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / samples as f64))
        .collect();
    let targets: Vec<Complex64> = grid
        .par_iter()
        .map(|&t| eval_limit(limit, t, LIMIT_TOL))
        .collect::<Result<_>>()?;
    let distances = dims
        .iter()
        .map(|&n| {
            let poly = renormalized(&FamilyInstance::unit(kind, n)?, cfg)?;
            Ok(grid
                .par_iter()
                .zip(&targets)
                .map(|(&t, &e)| (evaluate(&poly, t) - e).norm())
                .reduce(|| 0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConvergenceProfile {
        kind,
        limit,
        radius: r,
        samples,
        dims: dims.to_vec(),
        distances,
    })
}

/// `|c_l(n) − limit_l|` for `l = 0..=l_max` (clamped to `n`).
pub fn coefficient_deviations(kind: Kind, n: usize, l_max: usize, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let poly = renormalized(&FamilyInstance::unit(kind, n)?, cfg)?;
    let limit = limit_for(kind);
    Ok((0..=l_max.min(n))
        .map(|l| (poly.coefficients()[l] - limit.coefficient(l)).abs())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Thirty terms of the E2 series with Γ(l/2+1) from Γ(1) = 1, Γ(3/2) = √π/2.
    fn e2_oracle(tau: Complex64) -> Complex64 {
        let mut gamma = [1.0f64, PI.sqrt() / 2.0];
        let mut fact = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..30 {
            if l > 0 {
                fact *= l as f64;
            }
            let g = gamma[l % 2];
            sum += (PI.sqrt() / 2.0).powi(l as i32) * tau.powi(l as i32) / (g * fact);
            // advance Γ(l/2 + 1) to Γ(l/2 + 2)
            gamma[l % 2] = g * (l as f64 / 2.0 + 1.0);
        }
        sum
    }

    #[test]
    fn family_limits() {
        assert_eq!(limit_for(Kind::Ball), LimitFunction::E1);
        assert_eq!(limit_for(Kind::CrossPolytope), LimitFunction::E1);
        assert_eq!(limit_for(Kind::Cube), LimitFunction::E2);
        assert_eq!(limit_for(Kind::Simplex), LimitFunction::E2);
    }

    #[test]
    fn limit_values() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(eval_limit(LimitFunction::E2, Complex64::new(0.0, 0.0), 1e-15).unwrap(), one);
        let e2 = eval_limit(LimitFunction::E2, one, 1e-15).unwrap();
        assert!((e2.re - 2.494_307_252_161_882).abs() < 1e-12 && e2.im == 0.0);
        assert!((e2 - e2_oracle(one)).norm() < 1e-14);
        let z = eval_limit(LimitFunction::E1, Complex64::new(0.0, PI), 1e-15).unwrap();
        assert!((z + one).norm() < 1e-15);
        assert!((LimitFunction::E2.coefficient(1) - 1.0).abs() < 1e-15);
        assert!(eval_limit(LimitFunction::E2, one, 0.0).is_err());
    }

    #[test]
    fn e2_series_matches_oracle_on_disk() {
        for k in 0..40 {
            let t = Complex64::from_polar(0.1 * k as f64, 0.37 * k as f64);
            let got = eval_limit(LimitFunction::E2, t, 1e-16).unwrap();
            let want = e2_oracle(t);
            assert!((got - want).norm() <= 1e-13 * want.norm().max(1.0), "{t}");
        }
    }

    #[test]
    fn e2_coefficients_positive_and_dominated() {
        for l in 0..150 {
            let c = LimitFunction::E2.coefficient(l);
            assert!(c > 0.0 || l > 100);
            assert!(LimitFunction::E2.ln_coefficient(l) <= -log_factorial(l) + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn limits_bounded_by_exponential_of_modulus(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let t = Complex64::new(re, im);
            prop_assume!(t.norm() <= 5.0);
            for f in [LimitFunction::E1, LimitFunction::E2] {
                let v = eval_limit(f, t, 1e-15).unwrap();
                prop_assert!(v.norm() <= t.norm().exp() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn ball_distance_matches_direct_evaluation() {
        let p = convergence_profile(Kind::Ball, &[100], 1.0, DEFAULT_SAMPLES, &cfg()).unwrap();
        let d = p.distances[0];
        assert!((d - 0.0136).abs() <= 0.2 * 0.0136, "{d}");
        // (1 + τ/n)^n evaluated directly
        let direct = (0..DEFAULT_SAMPLES)
            .map(|k| {
                let t = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / DEFAULT_SAMPLES as f64);
                ((1.0 + t / 100.0).powi(100) - t.exp()).norm()
            })
            .fold(0.0, f64::max);
        assert!((d - direct).abs() < 1e-12);
    }

    #[test]
    fn ball_rate_is_inverse_dimension() {
        let p = convergence_profile(Kind::Ball, &[10, 100, 1000], 1.0, DEFAULT_SAMPLES, &cfg()).unwrap();
        let d = &p.distances;
        assert!(d[0] > d[1] && d[1] > d[2]);
        let ratio = d[2] / d[1];
        assert!((0.08..=0.12).contains(&ratio), "{ratio}");
    }

    #[test]
    fn cube_converges() {
        let p = convergence_profile(Kind::Cube, &[10, 100], 1.0, DEFAULT_SAMPLES, &cfg()).unwrap();
        assert!(p.distances[1] < p.distances[0]);
    }

    #[test]
    fn every_family_decreases_along_doublings() {
        for kind in Kind::ALL {
            let p = convergence_profile(kind, &[8, 16, 32, 64, 128], 1.0, DEFAULT_SAMPLES, &cfg()).unwrap();
            assert!(p.distances.iter().all(|d| *d >= 0.0));
            assert!(p.distances.windows(2).all(|w| w[1] < w[0]), "{kind}: {:?}", p.distances);
        }
    }

    #[test]
    fn zero_radius_gives_zero_distance() {
        let p = convergence_profile(Kind::Cube, &[10], 0.0, DEFAULT_SAMPLES, &cfg()).unwrap();
        assert_eq!(p.distances, vec![0.0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(convergence_profile(Kind::Ball, &[10, 10], 1.0, 256, &cfg()).is_err());
        assert!(convergence_profile(Kind::Ball, &[10], -1.0, 256, &cfg()).is_err());
        assert!(convergence_profile(Kind::Ball, &[10], 1.0, 63, &cfg()).is_err());
        assert!(convergence_profile(Kind::Ball, &[], 1.0, 256, &cfg()).is_err());
    }

    #[test]
    fn coefficientwise_convergence() {
        for kind in Kind::ALL {
            let a = coefficient_deviations(kind, 10, 5, &cfg()).unwrap();
            let b = coefficient_deviations(kind, 80, 5, &cfg()).unwrap();
            assert!(a[0] < 1e-15 && a[1] < 1e-12);
            for l in 2..=5 {
                assert!(b[l] < a[l], "{kind} l={l}");
            }
        }
    }

    #[test]
    fn profile_serializes() {
        let p = convergence_profile(Kind::Ball, &[4, 8], 1.0, 64, &cfg()).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("n,d_n\n4,"));
        assert_eq!(csv.lines().count(), 3);
        let json = serde_json::to_string(&p).unwrap();
        let back: ConvergenceProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
