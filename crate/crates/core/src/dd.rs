//! Double-double arithmetic and compensated summation.
//!
//! A `DoubleDouble` stores an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of mantissa. Only the operations needed by the
//! closed-form series are provided.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
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

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DoubleDouble = DoubleDouble {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};
/// Third word of ln 2, used in argument reduction.
const LN2_TAIL: f64 = 5.707_708_438_416_212e-34;

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
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

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// e^x via reduction x = k·ln2 + r, |r| <= ln2/2, r scaled by 2^-10,
    /// Taylor series, then ten squarings.
    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        // x − k·ln2 with each product formed exactly.
        let (p1, e1) = two_prod(k, LN2.hi);
        let (p2, e2) = two_prod(k, LN2.lo);
        let r = self
            - Self { hi: p1, lo: 0.0 }
            - Self::from_f64(e1)
            - Self::from_f64(p2)
            - Self::from_f64(e2 + k * LN2_TAIL);
        let r = r.ldexp(-10);
        // e^r − 1 by Taylor to degree 14; |r| < 3.4e-4 so the remainder is below 1e-50.
        let mut term = r;
        let mut sum = r;
        for i in 2..=14 {
            term = term * r / Self::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)² − 1 = 2s + s² keeps the small part at full relative precision.
        for _ in 0..10 {
            sum = sum.ldexp(1) + sum * sum;
        }
        let sum = Self::ONE + sum;
        // Split the scaling so subnormal results survive.
        let k = k as i32;
        if k < -1000 {
            sum.ldexp(-1000).ldexp(k + 1000)
        } else {
            sum.ldexp(k)
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

/// The arithmetic the closed-form series evaluator needs, implemented for
/// plain `f64` and for `DoubleDouble`.
pub(crate) trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn of(x: f64) -> Self;
    fn from_dd(x: DoubleDouble) -> Self;
    fn exp(self) -> Self;
    fn powi(self, n: u32) -> Self;
    /// Compensated Σt together with Σ|t|.
    fn sum_with_magnitude(terms: impl Iterator<Item = Self>) -> (f64, f64);
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn from_dd(x: DoubleDouble) -> Self {
        x.to_f64()
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
    fn sum_with_magnitude(terms: impl Iterator<Item = Self>) -> (f64, f64) {
        let mut acc = Neumaier::default();
        terms.for_each(|t| acc.push(t));
        (acc.total(), acc.mag)
    }
}

impl Real for DoubleDouble {
    fn of(x: f64) -> Self {
        Self::from_f64(x)
    }
    fn from_dd(x: DoubleDouble) -> Self {
        x
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn powi(self, n: u32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn sum_with_magnitude(terms: impl Iterator<Item = Self>) -> (f64, f64) {
        let (sum, mag) = terms.fold((DoubleDouble::ZERO, 0.0), |(s, m), t| {
            (s + t, m + t.hi.abs())
        });
        (sum.to_f64(), mag)
    }
}

/// Neumaier-compensated f64 sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
    mag: f64,
}

impl Neumaier {
    pub(crate) fn push(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.mag += x.abs();
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_f64() {
        let big = DoubleDouble::from_f64(1e16);
        let one = DoubleDouble::ONE;
        let r = (big + one) - big;
        assert_eq!(r.to_f64(), 1.0);
        assert_eq!((1e16 + 1.0) - 1e16, 0.0);
    }

    #[test]
    fn division_round_trips() {
        let a = DoubleDouble::from_f64(1.0) / DoubleDouble::from_f64(3.0);
        let back = a * DoubleDouble::from_f64(3.0) - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_identities() {
        // e^x · e^{-x} = 1 to double-double accuracy
        // results below ~1e-292 lose the low word to underflow
        for &x in &[-600.0, -37.25, -1.0, -1e-8, 0.3, 2.0, 55.5, 600.0] {
            let p = DoubleDouble::from_f64(x).exp() * DoubleDouble::from_f64(-x).exp();
            assert!((p - DoubleDouble::ONE).to_f64().abs() < 1e-28, "x={x}");
        }
        // e^1 against the known 32-digit constant
        let e = DoubleDouble::ONE.exp();
        let ref_hi = std::f64::consts::E;
        let ref_lo = 1.445_646_891_729_250_2e-16;
        assert!(
            (e - DoubleDouble {
                hi: ref_hi,
                lo: ref_lo
            })
            .to_f64()
            .abs()
                < 1e-28
        );
    }

    #[test]
    fn exp_matches_high_precision_reference() {
        // (x, hi, lo) with hi + lo = e^x from a 60-digit evaluation
        let cases = [
            (-240.125, 5.188448770620652e-105, 2.5798839902728774e-121),
            (-37.25, 6.64554417291507e-17, -5.891784267265031e-34),
            (-3.5, 0.0301973834223185, -1.2760102183793106e-19),
            (-1e-08, 0.9999999900000001, -1.077471008511377e-17),
            (0.3, 1.3498588075760032, -9.447314673432387e-17),
            (2.0, 7.38905609893065, -1.7971139497839148e-16),
            (17.0, 24154952.7535753, -7.203995068362157e-10),
            (55.5, 1.2686556140109568e+24, 124648300.62644248),
            (300.75, 4.1121167109946366e+130, 1.1390271245889806e+113),
        ];
        for (x, hi, lo) in cases {
            let reference = DoubleDouble { hi, lo };
            let rel = ((DoubleDouble::from_f64(x).exp() - reference) / reference)
                .to_f64()
                .abs();
            assert!(rel < 1e-32, "x={x} rel={rel:e}");
        }
    }

    #[test]
    fn exp_agrees_with_f64() {
        for i in -200..200 {
            let x = i as f64 * 0.37;
            let dd = DoubleDouble::from_f64(x).exp().to_f64();
            assert!(((dd - x.exp()) / x.exp()).abs() < 4e-16, "x={x}");
        }
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut acc = Neumaier::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.push(x);
        }
        assert_eq!(acc.total(), 2.0);
    }
}
