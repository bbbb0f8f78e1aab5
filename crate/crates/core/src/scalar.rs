//! Configurable-precision scalar arithmetic.
//!
//! Every numerical routine in this crate is generic over [`Scalar`]. Two
//! implementations are provided: plain `f64` (the default) and [`Df64`], an
//! unevaluated double-double pair giving roughly 32 significant decimal
//! digits. The extended type exists to separate formula errors from round-off
//! in the commutation and eigenvector checks, where the operators of interest
//! can sit within 1e-10 of the identity.
//!
//! The trait is deliberately small: the closed forms in this crate only ever
//! need field operations, square roots and integer powers (all Γ-function
//! ratios reduce to half-integer products), so no transcendental functions
//! are required of the extended type.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// Short name used in serialized metadata ("standard" / "extended").
    const PRECISION_NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn pi() -> Self;
    /// Unit round-off of the representation.
    fn epsilon() -> Self;
    fn is_finite(self) -> bool;

    /// Jacobi eigensolver off-diagonal convergence factor (relative to ‖A‖_F).
    fn eigen_tol() -> Self;
    /// Quadrature order-doubling convergence threshold.
    fn quad_tol() -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_i64(v as i64)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn max_val(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_val(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Integer power by repeated squaring; negative exponents via reciprocal.
    fn powi(self, exp: i32) -> Self {
        if exp < 0 {
            return Self::one() / self.powi(-exp);
        }
        let mut result = Self::one();
        let mut base = self;
        let mut e = exp as u32;
        while e > 0 {
            if e & 1 == 1 {
                result *= base;
            }
            base *= base;
            e >>= 1;
        }
        result
    }

    /// `base^(num/2)` for half-integer exponents, valid for `base >= 0`.
    fn pow_half(self, num: i32) -> Self {
        if num % 2 == 0 {
            self.powi(num / 2)
        } else {
            self.powi(num).sqrt()
        }
    }
}

impl Scalar for f64 {
    const PRECISION_NAME: &'static str = "standard";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn eigen_tol() -> Self {
        1e-14
    }
    fn quad_tol() -> Self {
        1e-12
    }
}

/// Double-double scalar: the value is the exact sum `hi + lo` of two
/// non-overlapping doubles, for ~106 bits of significand.
#[derive(Clone, Copy, Default)]
pub struct Df64 {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires |a| >= |b|.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Df64 {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Df64 { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Df64 { hi: s, lo: e }
    }
}

impl From<f64> for Df64 {
    fn from(v: f64) -> Self {
        Df64 { hi: v, lo: 0.0 }
    }
}

impl Add for Df64 {
    type Output = Df64;
    fn add(self, rhs: Df64) -> Df64 {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, te) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Df64::renorm(s, e + te)
    }
}

impl Sub for Df64 {
    type Output = Df64;
    fn sub(self, rhs: Df64) -> Df64 {
        self + (-rhs)
    }
}

impl Mul for Df64 {
    type Output = Df64;
    fn mul(self, rhs: Df64) -> Df64 {
        let (p, e) = two_prod(self.hi, rhs.hi);
        Df64::renorm(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Div for Df64 {
    type Output = Df64;
    fn div(self, rhs: Df64) -> Df64 {
        // Long division: three f64 quotient digits, each with an exact
        // double-double remainder update.
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Df64::from(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Df64::from(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Df64::renorm(s, e + q3)
    }
}

impl Neg for Df64 {
    type Output = Df64;
    fn neg(self) -> Df64 {
        Df64 {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl AddAssign for Df64 {
    fn add_assign(&mut self, rhs: Df64) {
        *self = *self + rhs;
    }
}
impl SubAssign for Df64 {
    fn sub_assign(&mut self, rhs: Df64) {
        *self = *self - rhs;
    }
}
impl MulAssign for Df64 {
    fn mul_assign(&mut self, rhs: Df64) {
        *self = *self * rhs;
    }
}
impl DivAssign for Df64 {
    fn div_assign(&mut self, rhs: Df64) {
        *self = *self / rhs;
    }
}

impl PartialEq for Df64 {
    fn eq(&self, other: &Df64) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Df64 {
    fn partial_cmp(&self, other: &Df64) -> Option<std::cmp::Ordering> {
        // The pair is kept normalized (|lo| <= ulp(hi)/2), so lexicographic
        // comparison on (hi, lo) orders values correctly.
        match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Debug for Df64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Df64({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Df64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi + self.lo)
    }
}

impl Scalar for Df64 {
    const PRECISION_NAME: &'static str = "extended";

    fn zero() -> Self {
        Df64 { hi: 0.0, lo: 0.0 }
    }

    fn one() -> Self {
        Df64 { hi: 1.0, lo: 0.0 }
    }

    fn from_i64(v: i64) -> Self {
        let hi = v as f64;
        // Exact residue; |v| < 2^63 and hi is within 2^10 of v, so the
        // difference is exactly representable.
        let lo = if hi as i128 == v as i128 {
            0.0
        } else {
            (v as i128 - hi as i128) as f64
        };
        Df64::renorm(hi, lo)
    }

    fn from_f64(v: f64) -> Self {
        Df64 { hi: v, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Df64::zero();
        }
        // One dd Newton step on the f64 seed doubles the correct digits.
        let s0 = Df64::from(self.hi.sqrt());
        let half = Df64::from(0.5);
        (s0 + self / s0) * half
    }

    fn pi() -> Self {
        Df64 {
            hi: 3.141592653589793,
            lo: 1.2246467991473532e-16,
        }
    }

    fn epsilon() -> Self {
        Df64::from(4.93e-32) // 2^-104
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    fn eigen_tol() -> Self {
        Df64::from(1e-30)
    }

    fn quad_tol() -> Self {
        Df64::from(1e-24)
    }
}
