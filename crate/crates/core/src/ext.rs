//! Extended-exponent floating point.
//!
//! `Ext` stores `m · 2^e` with an `f64` mantissa in `[0.5, 1)` and an `i64`
//! exponent. Precision is that of `f64`; only the range grows. This is what
//! the cutoff `e^{-1/sin²u}` needs close to the bad set, where its value
//! drops below `f64::MIN_POSITIVE` long before it is numerically zero in
//! any meaningful sense. Transcendental functions go through `f64` when the
//! argument fits and use the exponent explicitly for `exp`, `ln`, `sqrt`
//! and powers.

use std::cmp::Ordering;
use std::num::FpCategory;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct Ext {
    m: f64,
    e: i64,
}

/// Splits a finite non-zero `x` into `(m, e)` with `x = m·2^e`, `0.5 ≤ |m| < 1`.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    if exp == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, exp - 1022)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Ext {
    pub fn from_f64(x: f64) -> Self {
        let (m, e) = frexp(x);
        Self { m, e }
    }

    fn norm(m: f64, e: i64) -> Self {
        if m == 0.0 || !m.is_finite() {
            return Self { m, e: 0 };
        }
        let (mm, de) = frexp(m);
        Self { m: mm, e: e + de }
    }

    /// Value as `f64`, underflowing to zero or overflowing to infinity.
    pub fn value(self) -> f64 {
        ldexp(self.m, self.e)
    }

    /// Natural logarithm of `|self|`, finite for every non-zero value.
    pub fn ln_abs(self) -> f64 {
        self.m.abs().ln() + self.e as f64 * std::f64::consts::LN_2
    }

    pub fn mantissa(self) -> f64 {
        self.m
    }

    pub fn exponent(self) -> i64 {
        self.e
    }

    fn is_special(self) -> bool {
        self.m == 0.0 || !self.m.is_finite()
    }

    /// `exp(y·ln 2)` split into mantissa and exponent.
    fn exp2_split(y: f64) -> Self {
        if !y.is_finite() {
            return Self::from_f64(y.exp2());
        }
        let n = y.floor();
        Self::norm((y - n).exp2(), n as i64)
    }
}

impl PartialEq for Ext {
    fn eq(&self, o: &Self) -> bool {
        self.partial_cmp(o) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        if self.m.is_nan() || o.m.is_nan() {
            return None;
        }
        if self.is_special() || o.is_special() || self.m.signum() != o.m.signum() {
            if self.is_special() && o.is_special() {
                return self.m.partial_cmp(&o.m);
            }
            // Compare by sign, then by finite-vs-infinite.
            let s = |x: &Ext| {
                if x.m == 0.0 {
                    0.0
                } else {
                    x.m.signum() * if x.m.is_infinite() { 2.0 } else { 1.0 }
                }
            };
            return s(self).partial_cmp(&s(o));
        }
        let pos = self.m > 0.0;
        let ord = self.e.cmp(&o.e).then(self.m.abs().partial_cmp(&o.m.abs())?);
        Some(if pos { ord } else { ord.reverse() })
    }
}

impl Add for Ext {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        if !self.m.is_finite() || !o.m.is_finite() {
            return Self::from_f64(self.m + o.m);
        }
        let e = self.e.max(o.e);
        let (d1, d2) = (self.e - e, o.e - e);
        if d1 < -80 {
            return o;
        }
        if d2 < -80 {
            return self;
        }
        Self::norm(ldexp(self.m, d1) + ldexp(o.m, d2), e)
    }
}

impl Neg for Ext {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            m: -self.m,
            e: self.e,
        }
    }
}

impl Sub for Ext {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for Ext {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::norm(self.m * o.m, self.e + o.e)
    }
}

impl Div for Ext {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self::norm(self.m / o.m, self.e - o.e)
    }
}

impl Rem for Ext {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        self - o * (self / o).trunc()
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Ext {
            fn $m(&mut self, o: Self) {
                *self = *self $op o;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for Ext {
    fn zero() -> Self {
        Self { m: 0.0, e: 0 }
    }
    fn is_zero(&self) -> bool {
        self.m == 0.0
    }
}

impl One for Ext {
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Num for Ext {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Self::from_f64)
    }
}

impl ToPrimitive for Ext {
    fn to_i64(&self) -> Option<i64> {
        self.value().to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.value().to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.value())
    }
}

impl NumCast for Ext {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(Self::from_f64)
    }
}

impl FromPrimitive for Ext {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::from_f64(n as f64))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::from_f64(n as f64))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Ext::from_f64(n))
    }
}

macro_rules! float_const {
    ($($name:ident),*) => {
        impl FloatConst for Ext {
            $(fn $name() -> Self { Ext::from_f64(f64::$name()) })*
        }
    };
}
float_const!(
    E,
    FRAC_1_PI,
    FRAC_1_SQRT_2,
    FRAC_2_PI,
    FRAC_2_SQRT_PI,
    FRAC_PI_2,
    FRAC_PI_3,
    FRAC_PI_4,
    FRAC_PI_6,
    FRAC_PI_8,
    LN_10,
    LN_2,
    LOG10_E,
    LOG2_E,
    PI,
    SQRT_2
);

macro_rules! via_f64 {
    ($($name:ident),*) => {
        $(fn $name(self) -> Self { Ext::from_f64(self.value().$name()) })*
    };
}

impl Float for Ext {
    fn nan() -> Self {
        Self::from_f64(f64::NAN)
    }
    fn infinity() -> Self {
        Self::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self { m: -0.0, e: 0 }
    }
    fn min_value() -> Self {
        Self {
            m: -0.5,
            e: i64::MAX / 4,
        }
    }
    fn min_positive_value() -> Self {
        Self {
            m: 0.5,
            e: i64::MIN / 4,
        }
    }
    fn epsilon() -> Self {
        Self::from_f64(f64::EPSILON)
    }
    fn max_value() -> Self {
        Self {
            m: 0.5,
            e: i64::MAX / 4,
        }
    }
    fn is_nan(self) -> bool {
        self.m.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.m.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.m.is_finite()
    }
    fn is_normal(self) -> bool {
        self.m.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.m.classify()
    }
    fn floor(self) -> Self {
        if self.e >= 53 {
            self
        } else {
            Self::from_f64(self.value().floor())
        }
    }
    fn ceil(self) -> Self {
        if self.e >= 53 {
            self
        } else {
            Self::from_f64(self.value().ceil())
        }
    }
    fn round(self) -> Self {
        if self.e >= 53 {
            self
        } else {
            Self::from_f64(self.value().round())
        }
    }
    fn trunc(self) -> Self {
        if self.e >= 53 {
            self
        } else {
            Self::from_f64(self.value().trunc())
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        Self {
            m: self.m.abs(),
            e: self.e,
        }
    }
    fn signum(self) -> Self {
        Self::from_f64(self.m.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.m.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.m.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        if self.m < 0.0 {
            return Self::nan();
        }
        if self.m == 0.0 {
            return Self::from_f64(0f64.powf(n.value()));
        }
        Self::exp2_split(n.value() * self.ln_abs() * std::f64::consts::LOG2_E)
    }
    fn sqrt(self) -> Self {
        if self.m < 0.0 {
            return Self::nan();
        }
        if self.is_special() {
            return Self::from_f64(self.m.sqrt());
        }
        if self.e % 2 == 0 {
            Self::norm(self.m.sqrt(), self.e / 2)
        } else {
            Self::norm((2.0 * self.m).sqrt(), (self.e - 1) / 2)
        }
    }
    fn exp(self) -> Self {
        Self::exp2_split(self.value() * std::f64::consts::LOG2_E)
    }
    fn exp2(self) -> Self {
        Self::exp2_split(self.value())
    }
    fn ln(self) -> Self {
        if self.m < 0.0 {
            return Self::nan();
        }
        if self.m == 0.0 {
            return Self::neg_infinity();
        }
        Self::from_f64(self.ln_abs())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / Self::LN_2()
    }
    fn log10(self) -> Self {
        self.ln() / Self::LN_10()
    }
    fn max(self, o: Self) -> Self {
        if self >= o || o.is_nan() {
            self
        } else {
            o
        }
    }
    fn min(self, o: Self) -> Self {
        if self <= o || o.is_nan() {
            self
        } else {
            o
        }
    }
    fn abs_sub(self, o: Self) -> Self {
        if self > o {
            self - o
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        if self.m < 0.0 {
            return -(-self).cbrt();
        }
        self.powf(Self::from_f64(1.0 / 3.0))
    }
    fn hypot(self, o: Self) -> Self {
        (self * self + o * o).sqrt()
    }
    fn atan2(self, o: Self) -> Self {
        Self::from_f64(self.value().atan2(o.value()))
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.value().sin_cos();
        (Self::from_f64(s), Self::from_f64(c))
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.value().integer_decode()
    }
    via_f64!(sin, cos, tan, asin, acos, atan, exp_m1, ln_1p, sinh, cosh, tanh, asinh, acosh, atanh);
}

impl Scalar for Ext {
    fn lit(v: f64) -> Self {
        Ext::from_f64(v)
    }

    fn re(&self) -> f64 {
        self.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_arithmetic() {
        for &x in &[1.0, -3.5, 1e-300, 7e300, 0.1] {
            assert_eq!(Ext::from_f64(x).value(), x);
        }
        let a = Ext::from_f64(1.5);
        let b = Ext::from_f64(-0.25);
        assert_eq!((a + b).value(), 1.25);
        assert_eq!((a * b).value(), -0.375);
        assert_eq!((a / b).value(), -6.0);
        assert!(b < a && -a < b);
    }

    #[test]
    fn exp_far_below_f64_range() {
        let x = Ext::from_f64(-10_000.0).exp();
        assert_eq!(x.value(), 0.0);
        assert!((x.ln_abs() + 10_000.0).abs() < 1e-9);
        let y = x * x;
        assert!((y.ln_abs() + 20_000.0).abs() < 1e-9);
        assert!(y < x && y > Ext::zero());
        assert!(((x.sqrt()).ln_abs() + 5_000.0).abs() < 1e-9);
    }

    #[test]
    fn addition_of_disparate_scales() {
        let tiny = Ext::from_f64(-5000.0).exp();
        let one = Ext::one();
        assert_eq!((one + tiny).value(), 1.0);
        let d = (tiny + tiny) - tiny;
        assert!((d.ln_abs() + 5000.0).abs() < 1e-9);
    }
}
