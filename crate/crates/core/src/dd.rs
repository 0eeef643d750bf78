//! Double-double real arithmetic and the complex scalar built on it.
//!
//! A [`Dd`] is an unevaluated sum `hi + lo` of two `f64` with `|lo| <= ulp(hi)/2`,
//! giving roughly 32 significant digits. Operator matrices whose entries span
//! `e^{±ηS}` need this: identities such as `Z·Z = 1` cancel terms of size
//! `e^{2ηS}` that would swamp a plain `f64` result.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};

/// Complex scalar used for every operator matrix entry.
pub type Scalar = Complex<Dd>;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
const SPLIT_THRESHOLD: f64 = 6.696_928_794_914_17e299; // 2^996

/// ln 2 to double-double precision.
const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

const EXP_SCALE_BITS: i32 = 10;

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
fn split(a: f64) -> (f64, f64) {
    if a.abs() > SPLIT_THRESHOLD {
        let a = a * 3.725_290_298_461_914e-9; // 2^-28
        let t = SPLITTER * a;
        let hi = t - (t - a);
        let lo = a - hi;
        (hi * 268_435_456.0, lo * 268_435_456.0)
    } else {
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Builds a value from a high/low pair, renormalizing.
    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Exact multiplication by a power of two.
    #[inline]
    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 || !self.is_finite() {
            return Dd::new(f64::NAN);
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let diff = (self - Dd { hi: p, lo: e }).hi;
        Dd::new(x) + Dd::new(diff / (2.0 * x))
    }

    pub fn exp(self) -> Self {
        if self.hi.is_nan() {
            return self;
        }
        if self.hi > 709.78 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-EXP_SCALE_BITS);

        // expm1(r) by Taylor series; |r| <= ln2/2^11 keeps 12 terms below 1e-40.
        let mut term = r;
        let mut sum = r;
        for n in 2..=12 {
            term = (term * r) / Dd::new(n as f64);
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // Undo the scaling: expm1(2r) = 2 expm1(r) + expm1(r)^2.
        for _ in 0..EXP_SCALE_BITS {
            sum = sum.ldexp(1) + sum.sqr();
        }
        let k = k as i32;
        let e = sum + Dd::ONE;
        if k > 1023 {
            e.ldexp(k - 1).ldexp(1)
        } else if k < -1021 {
            e.ldexp(k + 60).ldexp(-60)
        } else {
            e.ldexp(k)
        }
    }

    pub fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).ldexp(-1)
    }

    pub fn sinh(self) -> Self {
        if self.hi.abs() < 0.05 {
            // Odd Taylor series avoids the cancellation in (e - 1/e)/2.
            let x2 = self.sqr();
            let mut term = self;
            let mut sum = self;
            let mut k = 1.0;
            loop {
                term = term * x2 / Dd::new((k + 1.0) * (k + 2.0));
                sum += term;
                k += 2.0;
                if term.hi.abs() <= sum.hi.abs() * 1e-35 || k > 40.0 {
                    break;
                }
            }
            return sum;
        }
        let e = self.exp();
        (e - e.recip()).ldexp(-1)
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl From<i32> for Dd {
    #[inline]
    fn from(x: i32) -> Self {
        Dd::new(x as f64)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p1, p2 + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::new(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::new(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = (self / b).to_f64().trunc();
        self - b.mul_f64(q)
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    #[inline]
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Dd::new)
    }
}

/// Complex scalar from two `f64` parts.
#[inline]
pub fn cx(re: f64, im: f64) -> Scalar {
    Complex::new(Dd::new(re), Dd::new(im))
}

#[inline]
pub fn real(x: Dd) -> Scalar {
    Complex::new(x, Dd::ZERO)
}

#[inline]
pub fn to_c64(z: Scalar) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn from_c64(z: Complex64) -> Scalar {
    cx(z.re, z.im)
}

#[inline]
pub fn is_zero(z: &Scalar) -> bool {
    z.re.hi == 0.0 && z.im.hi == 0.0
}

#[inline]
pub fn is_finite(z: &Scalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Modulus, evaluated in double-double before rounding.
pub fn abs(z: &Scalar) -> f64 {
    (z.re.sqr() + z.im.sqr()).sqrt().to_f64()
}
