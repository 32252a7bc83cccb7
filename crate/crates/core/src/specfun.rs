//! Scalar special functions and the combinatorial multipliers shared by the
//! rest of the crate.
//!
//! Magnitudes that overflow a double for moderate dimension (factorials,
//! binomials, unit-ball volumes) are produced in log-space first.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `ln(2π)/2`
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Below this the argument is shifted upward before the asymptotic series is used.
const STIRLING_CUTOFF: f64 = 10.0;

/// Coefficients `B_{2k} / (2k(2k-1))` of the Stirling correction, k = 1..7.
const STIRLING_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// Natural logarithm of the gamma function for positive real arguments.
///
/// Small arguments are shifted past [`STIRLING_CUTOFF`] with the recurrence
/// `Γ(x+1) = xΓ(x)` and then evaluated with a seven-term Stirling series.
/// Absolute error stays below `1e-13` for `0 < x <= 200`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires a finite x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 1.0;
    while z < STIRLING_CUTOFF {
        shift *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    series *= inv;

    // (z - 1/2) ln z - z carried in double-double: the log is split as
    // e·ln2 + ln(f) with f in [1, 2) so its rounding is not amplified by z.
    let (ln_hi, ln_lo) = split_ln(z);
    let a = z - 0.5;
    let p = a * ln_hi;
    let p_err = a.mul_add(ln_hi, -p);
    let (hi, lo) = two_sum(p, -z);
    let (hi, lo2) = two_sum(hi, HALF_LN_TWO_PI);
    hi + (lo + lo2 + p_err + a * ln_lo + series - shift.ln())
}

#[allow(clippy::excessive_precision)]
const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
#[allow(clippy::excessive_precision)]
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

/// `ln z` for `z >= 1` as an unevaluated sum `hi + lo`.
fn split_ln(z: f64) -> (f64, f64) {
    let bits = z.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let frac = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);
    let e = exp as f64;
    // e·LN2_HI is exact: LN2_HI carries only 32 significant bits.
    two_sum(e * LN2_HI, e * LN2_LO + frac.ln())
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `ln(k!)` for a nonnegative integer `k`.
pub fn log_factorial(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    log_gamma_unchecked(k as f64 + 1.0)
}

/// `ln binomial(n, k)`; `-inf` when `k > n`.
pub fn log_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

/// Exact binomial coefficient; `None` on `u128` overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Error function `(2/√π) ∫₀ˣ e^{-y²} dy`.
///
/// Odd by construction: the magnitude is evaluated at `|x|` and the sign is
/// reattached, so `erf(-x) == -erf(x)` bit for bit.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let v = libm::erf(x.abs());
    if x.is_sign_negative() {
        -v
    } else {
        v
    }
}

/// Complementary error function `1 - erf(x)` without cancellation for large `x`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln((1 + erf(z)) / 2)`, the log of the standard normal CDF at `z√2`.
///
/// Uses `erfc(-z)` so the left tail keeps full relative accuracy.
pub fn log_half_erfc_neg(z: f64) -> f64 {
    if z > 0.0 {
        // 1 - erfc(z)/2, small correction near 0
        (-0.5 * libm::erfc(z)).ln_1p()
    } else {
        (0.5 * libm::erfc(-z)).ln()
    }
}

/// Volume κ_l of the unit ball in `R^l`, via `ln κ_l = (l/2) ln π − ln Γ(l/2 + 1)`.
pub fn unit_ball_volume(l: usize) -> f64 {
    match l {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        _ => log_unit_ball_volume(l).exp(),
    }
}

/// `ln κ_l`.
pub fn log_unit_ball_volume(l: usize) -> f64 {
    match l {
        0 => 0.0,
        1 => std::f64::consts::LN_2,
        2 => PI.ln(),
        _ => 0.5 * l as f64 * PI.ln() - log_gamma_unchecked(0.5 * l as f64 + 1.0),
    }
}

/// Jensen multipliers `j_{n,l} = ∏_{r<l} (1 - r/n)` for `l = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenTable {
    n: usize,
    values: Vec<f64>,
}

impl JensenTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `j_{n,l}`; zero beyond the dimension.
    pub fn get(&self, l: usize) -> f64 {
        self.values.get(l).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `ln j_{n,l}` computed as a sum of logs, finite for every `l <= n`.
    pub fn ln(&self, l: usize) -> f64 {
        log_jensen(self.n, l)
    }
}

/// Builds the Jensen multiplier table for dimension `n >= 1`.
pub fn jensen_multipliers(n: usize) -> Result<JensenTable> {
    if n == 0 {
        return Err(Error::Domain("jensen_multipliers requires n >= 1".into()));
    }
    let nf = n as f64;
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    values.push(acc);
    for r in 0..n {
        acc *= 1.0 - r as f64 / nf;
        values.push(acc);
    }
    Ok(JensenTable { n, values })
}

/// `ln j_{n,l}`; `-inf` for `l > n`.
pub fn log_jensen(n: usize, l: usize) -> f64 {
    if l > n {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    (1..l).map(|r| (-(r as f64) / nf).ln_1p()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Kahan-compensated `Σ ln k` over `2..=m`: `ln(m!)` independent of the Stirling path.
    fn ln_factorial_oracle(m: u32) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 2..=m {
            let y = f64::from(k).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    /// The references are themselves rounded doubles, so one ulp of slack is
    /// added on top of the stated bound.
    fn close(got: f64, want: f64, tol: f64) -> bool {
        let ulp = f64::from_bits(want.abs().to_bits() + 1) - want.abs();
        (got - want).abs() <= tol + ulp
    }

    /// Alternating Maclaurin series for erf; fine for |x| <= 3.
    fn erf_taylor(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -x * x / k;
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / PI.sqrt()
    }

    #[test]
    fn log_gamma_examples() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_9).abs() < 1e-10);
        let ln10f = ln_factorial_oracle(10);
        assert!((ln10f - 15.104_412_573_1).abs() < 1e-10);
        assert!((log_gamma(11.0).unwrap() - ln10f).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_matches_factorial_oracle_up_to_200() {
        for m in 1..200u32 {
            let got = log_gamma(f64::from(m) + 1.0).unwrap();
            let want = ln_factorial_oracle(m);
            assert!(close(got, want, 1e-13), "m={m} got={got} want={want}");
        }
    }

    #[test]
    fn log_gamma_half_integers() {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        for k in 0..90u32 {
            let want = ln_factorial_oracle(2 * k) + 0.5 * PI.ln()
                - f64::from(k) * 4f64.ln()
                - ln_factorial_oracle(k);
            let got = log_gamma(f64::from(k) + 0.5).unwrap();
            assert!(close(got, want, 1e-13), "k={k}");
        }
    }

    #[test]
    fn log_gamma_reference_points() {
        // 40-digit reference values rounded to double
        let refs = [
            (0.1, 2.252_712_651_734_206),
            (3.7, 1.428_072_326_665_387_9),
            (57.3, 173.563_868_279_691_43),
            (123.45, 469.576_676_300_381_9),
            (199.9, 857.404_113_364_328_2),
        ];
        for (x, want) in refs {
            assert!(close(log_gamma(x).unwrap(), want, 1e-13), "x={x}");
        }
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn erf_examples() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(8.0) - 1.0).abs() <= 1e-14);
        assert_eq!(erf(f64::INFINITY), 1.0);
        let oracle = erf_taylor(1.0);
        assert!((oracle - 0.842_700_792_9).abs() < 1e-10);
        assert!((erf(1.0) - oracle).abs() <= 1e-14);
    }

    #[test]
    fn erf_agrees_with_series_on_grid() {
        for i in 0..=250 {
            let x = -2.5 + 0.02 * f64::from(i);
            assert!((erf(x) - erf_taylor(x)).abs() <= 1e-14, "x={x}");
        }
    }

    #[test]
    fn erf_is_odd() {
        for i in 0..500 {
            let x = 0.013 * f64::from(i);
            assert_eq!(erf(-x), -erf(x));
        }
    }

    #[test]
    fn log_half_erfc_tails() {
        assert!((log_half_erfc_neg(0.0) - 0.5f64.ln()).abs() < 1e-15);
        // far left tail stays finite: erfc(20) ~ 5.4e-176
        let v = log_half_erfc_neg(-20.0);
        assert!(v.is_finite() && v < -400.0);
        assert!(log_half_erfc_neg(10.0).abs() < 1e-40);
    }

    #[test]
    fn unit_ball_volume_examples() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        // κ_3 = (2π/3) κ_1
        let rec = 2.0 * PI / 3.0 * 2.0;
        assert!((unit_ball_volume(3) - rec).abs() < 1e-13);
        assert!((unit_ball_volume(3) - 4.188_790_204_8).abs() < 1e-10);
    }

    #[test]
    fn unit_ball_recurrence() {
        for l in 2..400 {
            let lhs = unit_ball_volume(l) * l as f64;
            let rhs = 2.0 * PI * unit_ball_volume(l - 2);
            if rhs > 1e-300 {
                assert!(((lhs - rhs) / rhs).abs() < 1e-12, "l={l}");
            } else {
                let d = (l as f64).ln() + log_unit_ball_volume(l)
                    - (2.0 * PI).ln()
                    - log_unit_ball_volume(l - 2);
                assert!(d.abs() < 1e-12, "l={l}");
            }
        }
    }

    #[test]
    fn jensen_examples() {
        let t = jensen_multipliers(4).unwrap();
        assert_eq!(t.get(2), 0.75);
        assert_eq!(t.get(0), 1.0);
        assert_eq!(jensen_multipliers(3).unwrap().get(5), 0.0);
        assert!(jensen_multipliers(0).is_err());
    }

    #[test]
    fn jensen_table_invariants() {
        for n in 1..80 {
            let t = jensen_multipliers(n).unwrap();
            assert_eq!(t.values().len(), n + 1);
            for w in t.values().windows(2) {
                assert!(w[1] <= w[0] && w[1] >= 0.0);
            }
            assert!(t.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn jensen_matches_binomial() {
        for n in 1..=60u64 {
            let t = jensen_multipliers(n as usize).unwrap();
            for l in 0..=n {
                let exact = binomial_exact(n, l).unwrap() as f64;
                let via = t.get(l as usize) * (n as f64).powi(l as i32)
                    / log_factorial(l as usize).exp();
                assert!(((via - exact) / exact).abs() < 1e-12, "n={n} l={l}");
                let log_via = t.ln(l as usize);
                assert!((log_via.exp() - t.get(l as usize)).abs() <= 1e-12 * t.get(l as usize));
            }
        }
    }

    #[test]
    fn jensen_increases_toward_one() {
        for l in 1..=3 {
            let mut prev = 0.0;
            let mut n = 10;
            while n <= 10_240 {
                let v = jensen_multipliers(n).unwrap().get(l);
                assert!(v >= prev && v <= 1.0);
                prev = v;
                n *= 2;
            }
            assert!(1.0 - prev < 1e-3);
        }
    }

    #[test]
    fn log_binomial_agrees_with_exact() {
        for n in 0..=100u64 {
            for k in 0..=n {
                let e = binomial_exact(n, k).unwrap() as f64;
                assert!((log_binomial(n as usize, k as usize) - e.ln()).abs() < 1e-12);
            }
        }
        assert_eq!(log_binomial(3, 4), f64::NEG_INFINITY);
    }
}
