//! Scalar types for the root finder's precision ladder: `f64`, double-double
//! (an unevaluated sum `hi + lo`, about 106 bits) and binary multiprecision
//! floats, plus a complex type generic over them.

use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use num_complex::Complex64;

/// Unit roundoff of double-double arithmetic, `2^-104`.
pub const DD_EPSILON: f64 = 4.930_380_657_631_324e-32;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        // one Newton step from the double estimate
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, r);
        Dd { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Binary multiprecision float. Arithmetic rounds to the larger operand precision.
pub type Mp = FBig<HalfEven, 2>;

/// Real arithmetic at some working precision.
pub trait Real:
    Clone
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `x` at `bits` of precision (ignored by the fixed-precision types).
    fn lift(x: f64, bits: usize) -> Self;
    fn to_f64(&self) -> f64;
    /// Rounds a multiprecision value into this type.
    fn from_mp(x: &Mp, bits: usize) -> Self;
}

impl Real for f64 {
    fn lift(x: f64, _: usize) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_mp(x: &Mp, _: usize) -> Self {
        x.to_f64().value()
    }
}

impl Real for Dd {
    fn lift(x: f64, _: usize) -> Self {
        Dd::new(x)
    }
    fn to_f64(&self) -> f64 {
        Dd::to_f64(*self)
    }
    fn from_mp(x: &Mp, _: usize) -> Self {
        let hi = x.to_f64().value();
        if !hi.is_finite() {
            return Dd::new(hi);
        }
        let lo = (x.clone() - mp(hi, x.precision().max(128))).to_f64().value();
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }
}

impl Real for Mp {
    fn lift(x: f64, bits: usize) -> Self {
        mp(x, bits)
    }
    fn to_f64(&self) -> f64 {
        FBig::to_f64(self).value()
    }
    fn from_mp(x: &Mp, bits: usize) -> Self {
        x.clone().with_precision(bits).value()
    }
}

/// `x` as a multiprecision float carrying `bits` of precision.
pub fn mp(x: f64, bits: usize) -> Mp {
    Mp::try_from(x)
        .expect("finite f64")
        .with_precision(bits)
        .value()
}

/// Unsigned integer as a multiprecision float carrying `bits` of precision.
pub fn mp_int(k: u64, bits: usize) -> Mp {
    Mp::from(k).with_precision(bits).value()
}

/// π to `bits` of precision by Machin's formula.
pub fn mp_pi(bits: usize) -> Mp {
    let work = bits + 32;
    let arctan_inv = |x: u64| {
        let x = mp_int(x, work);
        let x2 = x.clone() * x.clone();
        let mut power = mp_int(1, work) / x;
        let mut sum = power.clone();
        let mut k = 1u64;
        loop {
            power /= x2.clone();
            let term = power.clone() / mp_int(2 * k + 1, work);
            if term.to_f64().value() < 2f64.powi(-(work as i32) - 4) {
                break;
            }
            sum = if k % 2 == 1 { sum - term } else { sum + term };
            k += 1;
        }
        sum
    };
    let pi = mp_int(16, work) * arctan_inv(5) - mp_int(4, work) * arctan_inv(239);
    pi.with_precision(bits).value()
}

/// Complex number over a [`Real`] type.
#[derive(Debug, Clone, PartialEq)]
pub struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Cx { re, im }
    }

    pub fn real(re: T, bits: usize) -> Self {
        Cx { re, im: T::lift(0.0, bits) }
    }

    pub fn lift(z: Complex64, bits: usize) -> Self {
        Cx { re: T::lift(z.re, bits), im: T::lift(z.im, bits) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Modulus, rounded to `f64`.
    pub fn norm(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    pub fn conj(&self) -> Self {
        Cx { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, k: &T) -> Self {
        Cx { re: self.re.clone() * k.clone(), im: self.im.clone() * k.clone() }
    }

    pub fn add_real(&self, k: &T) -> Self {
        Cx { re: self.re.clone() + k.clone(), im: self.im.clone() }
    }

    pub fn recip(&self) -> Self {
        // rescale by a power of two so the squared modulus stays in range
        let m = self.re.to_f64().abs().max(self.im.to_f64().abs());
        let s = if m > 0.0 && m.is_finite() { 2f64.powi(-m.log2().round() as i32) } else { 1.0 };
        let s = T::lift(s, 0);
        let (re, im) = (self.re.clone() * s.clone(), self.im.clone() * s.clone());
        let d = re.clone() * re.clone() + im.clone() * im.clone();
        Cx { re: re / d.clone() * s.clone(), im: -(im / d) * s }
    }
}

impl<T: Real> Add for Cx<T> {
    type Output = Cx<T>;
    fn add(self, o: Cx<T>) -> Cx<T> {
        Cx { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<T: Real> Sub for Cx<T> {
    type Output = Cx<T>;
    fn sub(self, o: Cx<T>) -> Cx<T> {
        Cx { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<T: Real> Mul for Cx<T> {
    type Output = Cx<T>;
    fn mul(self, o: Cx<T>) -> Cx<T> {
        Cx {
            re: self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone(),
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl<T: Real> Div for Cx<T> {
    type Output = Cx<T>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Cx<T>) -> Cx<T> {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn captures_bits_lost_by_double() {
        let third = Dd::ONE / Dd::new(3.0);
        let back = third * Dd::new(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let tiny = Dd::new(1.0) + Dd::new(1e-20);
        assert_eq!(tiny.hi, 1.0);
        assert_eq!(tiny.lo, 1e-20);
        assert!(((tiny - Dd::ONE).to_f64() - 1e-20).abs() < 1e-36);
    }

    #[test]
    fn sqrt_of_two() {
        let r = Dd::new(2.0).sqrt();
        let err = r * r - Dd::new(2.0);
        assert!(err.to_f64().abs() < 1e-30);
    }

    #[test]
    fn complex_division_inverts_multiplication() {
        let a: Cx<Dd> = Cx::lift(Complex64::new(1.5, -2.25), 0);
        let b: Cx<Dd> = Cx::lift(Complex64::new(-0.3, 7.0), 0);
        let q = (a.clone() * b.clone()) / b - a;
        assert!(q.norm() < 1e-30);
        let a: Cx<Mp> = Cx::lift(Complex64::new(1.5, -2.25), 300);
        let b: Cx<Mp> = Cx::lift(Complex64::new(-0.3e200, 7.0e200), 300);
        let q = (a.clone() * b.clone()) / b - a;
        assert!(q.norm() < 1e-85);
    }

    #[test]
    fn multiprecision_pi() {
        // π - 3.141592653589793 = 1.2246467991473532e-16 (rounded)
        let pi = mp_pi(256);
        let tail = (pi.clone() - mp(std::f64::consts::PI, 256)).to_f64().value();
        assert!((tail - 1.2246467991473532e-16).abs() < 1e-31);
        let as_dd = Dd::from_mp(&pi, 256);
        assert_eq!(as_dd.hi, std::f64::consts::PI);
        assert!((as_dd.lo - 1.2246467991473532e-16).abs() < 1e-31);
        // agreement of successive precisions
        let d = (mp_pi(512) - pi).to_f64().value();
        assert!(d.abs() < 2f64.powi(-250));
    }

    #[test]
    fn multiprecision_keeps_bits() {
        let third = mp(1.0, 400) / mp_int(3, 400);
        let back = third * mp_int(3, 400) - mp(1.0, 400);
        assert!(back.to_f64().value().abs() < 1e-118);
    }

    proptest! {
        #[test]
        fn sum_is_exact_for_two_doubles(a in -1e10f64..1e10, b in -1e10f64..1e10) {
            let s = Dd::new(a) + Dd::new(b);
            // hi + lo reproduces a + b exactly: check against the error-free transform
            let (hi, lo) = two_sum(a, b);
            prop_assert_eq!(s.hi, hi);
            prop_assert_eq!(s.lo, lo);
        }

        #[test]
        fn product_error_term_is_exact(a in -1e5f64..1e5, b in -1e5f64..1e5) {
            let p = Dd::new(a) * Dd::new(b);
            // with 26-bit inputs the double product is already exact
            let a26 = (a * 64.0).round() / 64.0;
            let b26 = (b * 64.0).round() / 64.0;
            let q = Dd::new(a26) * Dd::new(b26);
            prop_assert_eq!(q.lo, 0.0);
            prop_assert!((p.hi - a * b).abs() <= (a * b).abs() * f64::EPSILON);
        }
    }
}
