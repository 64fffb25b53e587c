//! Interval arithmetic on binary64 with outward rounding.
//!
//! Design notes
//! ------------
//! The usual way to get directed rounding is to flip the FPU rounding mode.
//! That is global process state: it is hostile to threads, to inlining, and
//! to any library code that runs in between.  Instead, every endpoint
//! operation here computes the round-to-nearest result *plus* the exact sign
//! of its rounding error using error-free transformations:
//!
//! * addition/subtraction: the two-sum trick (the error of `a + b` is exactly
//!   representable and computable in six flops);
//! * multiplication: `fma(a, b, -a*b)` yields the exact error whenever the
//!   product does not underflow;
//! * division and square root: the residuals `fma(q, b, -a)` and
//!   `fma(s, s, -a)` are exactly representable under the same conditions, and
//!   their sign tells on which side of the true result the rounded one lies.
//!
//! The endpoint is then nudged one ulp outward only when the error sign
//! demands it.  Consequences worth relying on:
//!
//! * results are *tight*: each endpoint is the correctly rounded directed
//!   result (1 ulp wide at most), and an operation whose exact result is
//!   representable is exact — `[1,2] + [3,4]` is `[4,6]`, not something a
//!   few ulps wider;
//! * no global state, so the arithmetic is thread-safe and deterministic.
//!
//! Where a precondition of an error-free transformation fails (underflow to
//! subnormal range), the code falls back to a crude-but-sound one-ulp
//! widening of the nearest result; nearest rounding is always within half an
//! ulp, so the widened enclosure is still valid.
//!
//! Overflow to infinity in an endpoint operation is treated as a hard error
//! (panic): this library works on bounded quantities and an infinite
//! endpoint always indicates a logic error, never a legitimate enclosure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from interval construction and partial operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    /// Construction from endpoints that are not finite or not ordered.
    #[error("invalid interval endpoints: lo={lo}, hi={hi}")]
    InvalidEndpoints { lo: String, hi: String },
    /// Division by an interval containing zero.
    #[error("division by an interval containing zero")]
    DivisionByZero,
    /// Square root of an interval whose lower endpoint is negative.
    #[error("square root of an interval extending below zero (lo={lo})")]
    SqrtOfNegative { lo: String },
    /// Intersection of disjoint intervals.
    #[error("intersection of disjoint intervals")]
    EmptyIntersection,
    /// A decimal literal that could not be parsed.
    #[error("cannot parse decimal literal {literal:?}")]
    BadDecimal { literal: String },
}

/// A closed interval `[lo, hi]` of finite binary64 numbers.
///
/// Invariants (enforced at construction, after every operation, and on
/// deserialization): `lo <= hi`, both endpoints finite, never NaN.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Unvalidated mirror used to funnel deserialization through `try_new`.
#[derive(Deserialize)]
struct RawInterval {
    lo: f64,
    hi: f64,
}

impl TryFrom<RawInterval> for Interval {
    type Error = IntervalError;
    fn try_from(raw: RawInterval) -> Result<Interval, IntervalError> {
        Interval::try_new(raw.lo, raw.hi)
    }
}

// ---------------------------------------------------------------------------
// Error-free transformations and directed endpoint primitives
// ---------------------------------------------------------------------------

/// Knuth's two-sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`
/// exactly (valid for all finite inputs whose sum does not overflow).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Two-product via fused multiply-add: `(p, e)` with `p = fl(a * b)` and
/// `a * b = p + e` exactly, provided `p` is normal (no underflow).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[inline]
fn assert_finite(x: f64) -> f64 {
    assert!(x.is_finite(), "interval endpoint operation overflowed or produced NaN");
    x
}

/// Lower bound of `a + b`.
#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    assert_finite(s);
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

/// Upper bound of `a + b`.
#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    assert_finite(s);
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// Lower bound of `a - b`.
#[inline]
pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

/// Upper bound of `a - b`.
#[inline]
pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Lower bound of `a * b`.
#[inline]
pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0; // exact, even when the other operand is huge
    }
    let (p, e) = two_prod(a, b);
    assert_finite(p);
    if p == 0.0 || p.is_subnormal() {
        // The fma residual may be inexact here; nearest is within half an
        // ulp, so one ulp down is sound.
        return p.next_down();
    }
    if e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

/// Upper bound of `a * b`.
#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (p, e) = two_prod(a, b);
    assert_finite(p);
    if p == 0.0 || p.is_subnormal() {
        return p.next_up();
    }
    if e > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Lower bound of `a / b` (`b != 0`).
#[inline]
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    assert_finite(q);
    if q == 0.0 || q.is_subnormal() || a.is_subnormal() {
        if a == 0.0 {
            return 0.0;
        }
        return q.next_down();
    }
    // r = fl(q*b - a) is exact, and (a/b - q) has the sign of -r/b.
    let r = q.mul_add(b, -a);
    let q_above_true = if b > 0.0 { r > 0.0 } else { r < 0.0 };
    let q_below_true = if b > 0.0 { r < 0.0 } else { r > 0.0 };
    debug_assert!(!(q_above_true && q_below_true));
    let _ = q_below_true;
    if q_above_true {
        q.next_down()
    } else {
        q
    }
}

/// Upper bound of `a / b` (`b != 0`).
#[inline]
pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    assert_finite(q);
    if q == 0.0 || q.is_subnormal() || a.is_subnormal() {
        if a == 0.0 {
            return 0.0;
        }
        return q.next_up();
    }
    let r = q.mul_add(b, -a);
    let q_below_true = if b > 0.0 { r < 0.0 } else { r > 0.0 };
    if q_below_true {
        q.next_up()
    } else {
        q
    }
}

/// Lower bound of `sqrt(a)` (`a >= 0`).
#[inline]
pub(crate) fn sqrt_down(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    if s.is_subnormal() || a.is_subnormal() {
        return s.next_down().max(0.0);
    }
    // r = fl(s*s - a) is exact; r > 0 means s > sqrt(a).
    let r = s.mul_add(s, -a);
    if r > 0.0 {
        s.next_down()
    } else {
        s
    }
}

/// Upper bound of `sqrt(a)` (`a >= 0`).
#[inline]
pub(crate) fn sqrt_up(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    if s.is_subnormal() || a.is_subnormal() {
        return s.next_up();
    }
    let r = s.mul_add(s, -a);
    if r < 0.0 {
        s.next_up()
    } else {
        s
    }
}

// ---------------------------------------------------------------------------
// Interval API
// ---------------------------------------------------------------------------

impl Interval {
    /// The degenerate interval `[0, 0]`.
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    /// The degenerate interval `[1, 1]`.
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Creates `[lo, hi]`, panicking on invalid endpoints.
    ///
    /// Use [`Interval::try_new`] when the endpoints are not known-good.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval::try_new(lo, hi).expect("Interval::new called with invalid endpoints")
    }

    /// Creates `[lo, hi]` after validating `lo <= hi` and finiteness.
    #[inline]
    pub fn try_new(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            // Normalise -0.0 endpoints so that equality and formatting are
            // unsurprising.
            let lo = if lo == 0.0 { 0.0 } else { lo };
            let hi = if hi == 0.0 { 0.0 } else { hi };
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::InvalidEndpoints {
                lo: format!("{lo:?}"),
                hi: format!("{hi:?}"),
            })
        }
    }

    /// The degenerate interval `[x, x]`.
    #[inline]
    pub fn point(x: f64) -> Interval {
        Interval::new(x, x)
    }

    /// Lower endpoint.
    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Upper endpoint.
    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    /// Midpoint (rounded to nearest; always contained in the interval).
    #[inline]
    pub fn mid(self) -> f64 {
        let m = 0.5 * (self.lo + self.hi);
        if m.is_finite() {
            m.clamp(self.lo, self.hi)
        } else {
            // Endpoint sum overflowed; split the halves first.
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    /// An upper bound for the radius `max(hi - mid, mid - lo)`.
    #[inline]
    pub fn rad(self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    /// An upper bound for the width `hi - lo`.
    #[inline]
    pub fn width(self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// An upper bound for `max(|lo|, |hi|)`.
    #[inline]
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// A lower bound for `min{|x| : x in self}` (0 if the interval contains 0).
    #[inline]
    pub fn mig(self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    /// Does the interval contain the point `x`?
    #[inline]
    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Does the interval contain `other` entirely?
    #[inline]
    pub fn contains_interval(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Is `self` contained in `other`?
    #[inline]
    pub fn is_subset_of(self, other: Interval) -> bool {
        other.contains_interval(self)
    }

    /// Is `self` contained in the *interior* of `other`?
    #[inline]
    pub fn is_interior_to(self, other: Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    /// Smallest interval containing both operands.
    #[inline]
    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Intersection, or an error if the operands are disjoint.
    #[inline]
    pub fn intersect(self, other: Interval) -> Result<Interval, IntervalError> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::EmptyIntersection)
        }
    }

    /// Negation (exact).
    #[inline]
    pub fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    /// Sum enclosure.
    #[inline]
    pub fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }

    /// Difference enclosure.
    #[inline]
    pub fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: sub_down(self.lo, rhs.hi),
            hi: sub_up(self.hi, rhs.lo),
        }
    }

    /// Product enclosure (endpoint analysis by sign class, tight).
    pub fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (rhs.lo, rhs.hi);
        // Sign-class analysis keeps this to two directed products in every
        // case except when both operands straddle zero.
        let (lo, hi) = if a >= 0.0 {
            if c >= 0.0 {
                (mul_down(a, c), mul_up(b, d))
            } else if d <= 0.0 {
                (mul_down(b, c), mul_up(a, d))
            } else {
                (mul_down(b, c), mul_up(b, d))
            }
        } else if b <= 0.0 {
            if c >= 0.0 {
                (mul_down(a, d), mul_up(b, c))
            } else if d <= 0.0 {
                (mul_down(b, d), mul_up(a, c))
            } else {
                (mul_down(a, d), mul_up(a, c))
            }
        } else if c >= 0.0 {
            (mul_down(a, d), mul_up(b, d))
        } else if d <= 0.0 {
            (mul_down(b, c), mul_up(a, c))
        } else {
            (
                mul_down(a, d).min(mul_down(b, c)),
                mul_up(a, c).max(mul_up(b, d)),
            )
        };
        Interval { lo, hi }
    }

    /// Quotient enclosure; fails if `rhs` contains zero.
    pub fn div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains(0.0) {
            return Err(IntervalError::DivisionByZero);
        }
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (rhs.lo, rhs.hi);
        let (lo, hi) = if c > 0.0 {
            if a >= 0.0 {
                (div_down(a, d), div_up(b, c))
            } else if b <= 0.0 {
                (div_down(a, c), div_up(b, d))
            } else {
                (div_down(a, c), div_up(b, c))
            }
        } else {
            // d < 0
            if a >= 0.0 {
                (div_down(b, d), div_up(a, c))
            } else if b <= 0.0 {
                (div_down(b, c), div_up(a, d))
            } else {
                (div_down(b, d), div_up(a, d))
            }
        };
        Ok(Interval { lo, hi })
    }

    /// Enclosure of `{ sqrt(x) : x in self }`; fails if `lo < 0`.
    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::SqrtOfNegative {
                lo: format!("{}", self.lo),
            });
        }
        Ok(Interval {
            lo: sqrt_down(self.lo),
            hi: sqrt_up(self.hi),
        })
    }

    /// Enclosure of `{ |x| : x in self }`.
    #[inline]
    pub fn abs(self) -> Interval {
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    /// Enclosure of `{ x^k : x in self }` for integer `k >= 0`.
    ///
    /// Even powers account for sign cancellation: `[-2, 1]^2 = [0, 4]`.
    pub fn pow_int(self, k: u32) -> Interval {
        match k {
            0 => Interval::ONE,
            1 => self,
            _ => {
                let plo = point_pow(self.lo, k);
                let phi = point_pow(self.hi, k);
                if k % 2 == 1 {
                    // Odd powers are monotone increasing.
                    Interval {
                        lo: plo.lo,
                        hi: phi.hi,
                    }
                } else if self.lo >= 0.0 {
                    Interval {
                        lo: plo.lo,
                        hi: phi.hi,
                    }
                } else if self.hi <= 0.0 {
                    Interval {
                        lo: phi.lo,
                        hi: plo.hi,
                    }
                } else {
                    Interval {
                        lo: 0.0,
                        hi: plo.hi.max(phi.hi),
                    }
                }
            }
        }
    }

    /// Enclosure of `{ x |x|^(k-1) : x in self }` (sign-preserving power),
    /// for integer `k >= 1`.  Monotone increasing for every `k`.
    pub fn signed_pow(self, k: u32) -> Interval {
        debug_assert!(k >= 1);
        if k % 2 == 1 {
            // t|t|^{k-1} = t^k for odd k.
            return self.pow_int(k);
        }
        let lo_end = signed_point_pow(self.lo, k);
        let hi_end = signed_point_pow(self.hi, k);
        Interval {
            lo: lo_end.lo,
            hi: hi_end.hi,
        }
    }

    /// Enclosure of `max(0, x)` applied pointwise.
    #[inline]
    pub fn max_zero(self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    /// Intersects with `[0, inf)`, clamping a slightly-negative lower bound
    /// of a provably nonnegative quantity.  Fails if `hi < 0`.
    #[inline]
    pub fn clamp_nonnegative(self) -> Result<Interval, IntervalError> {
        if self.hi < 0.0 {
            return Err(IntervalError::EmptyIntersection);
        }
        Ok(Interval {
            lo: self.lo.max(0.0),
            hi: self.hi,
        })
    }

    /// A tight enclosure of π (one ulp wide).
    ///
    /// The binary64 value `core::f64::consts::PI` is below π (the next float
    /// up is above it); the unit test validates this enclosure against a
    /// Machin-series computation carried out in interval arithmetic.
    #[inline]
    pub fn pi() -> Interval {
        Interval {
            lo: core::f64::consts::PI,
            hi: core::f64::consts::PI.next_up(),
        }
    }

    /// Parses a decimal literal into the tightest enclosing interval.
    ///
    /// Exactly representable literals (e.g. `"2"`, `"0.5"`, `"1e3"`) yield
    /// degenerate intervals; anything else is at most one ulp wide.
    pub fn from_decimal(s: &str) -> Result<Interval, IntervalError> {
        decimal::parse(s)
    }

    /// Formats an upper bound for `x` with `sig` significant decimal digits:
    /// the returned literal's exact decimal value is `>= x`.
    pub fn to_decimal_upper(x: f64, sig: usize) -> String {
        decimal::format_directed(x, sig, decimal::Direction::Up)
    }

    /// Formats a lower bound for `x` with `sig` significant decimal digits:
    /// the returned literal's exact decimal value is `<= x`.
    pub fn to_decimal_lower(x: f64, sig: usize) -> String {
        decimal::format_directed(x, sig, decimal::Direction::Down)
    }
}

/// Enclosure of `x^k` for a point `x` via binary exponentiation on the
/// degenerate interval (each multiply is outward-rounded, so the result is a
/// true enclosure a few ulps wide; exact when all intermediates are exact).
fn point_pow(x: f64, k: u32) -> Interval {
    let mut result = Interval::ONE;
    let mut base = Interval::point(x);
    let mut n = k;
    while n > 0 {
        if n & 1 == 1 {
            result = result.mul(base);
        }
        n >>= 1;
        if n > 0 {
            base = base.mul(base);
        }
    }
    result
}

/// Enclosure of `x |x|^{k-1}` for a point `x`.
fn signed_point_pow(x: f64, k: u32) -> Interval {
    let p = point_pow(x.abs(), k);
    if x < 0.0 {
        p.neg()
    } else {
        p
    }
}

// Operator sugar.  All four binary operators delegate to the inherent
// methods; division panics on a zero-containing divisor (use `div` to
// handle that case as a value).
impl core::ops::Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(self, rhs)
    }
}
impl core::ops::Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(self, rhs)
    }
}
impl core::ops::Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        Interval::mul(self, rhs)
    }
}
impl core::ops::Div for Interval {
    type Output = Interval;
    #[inline]
    fn div(self, rhs: Interval) -> Interval {
        Interval::div(self, rhs).expect("interval division by zero-containing divisor")
    }
}
impl core::ops::Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval::neg(self)
    }
}
impl core::ops::Add<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}
impl core::ops::Sub<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}
impl core::ops::Mul<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}
impl core::ops::Mul<Interval> for f64 {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        Interval::point(self) * rhs
    }
}
impl core::ops::Div<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn div(self, rhs: f64) -> Interval {
        self / Interval::point(rhs)
    }
}

impl core::fmt::Display for Interval {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "[{}, {}]",
            Interval::to_decimal_lower(self.lo, 17),
            Interval::to_decimal_upper(self.hi, 17)
        )
    }
}

/// Sums a slice of intervals left to right (deterministic order).
pub fn sum(xs: &[Interval]) -> Interval {
    let mut acc = Interval::ZERO;
    for &x in xs {
        acc = acc + x;
    }
    acc
}

/// Dot product of two interval slices (deterministic order).
pub fn dot(a: &[Interval], b: &[Interval]) -> Interval {
    assert_eq!(a.len(), b.len());
    let mut acc = Interval::ZERO;
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc = acc + x * y;
    }
    acc
}

// ---------------------------------------------------------------------------
// Exact decimal conversions
// ---------------------------------------------------------------------------

mod decimal {
    use super::{Interval, IntervalError};
    use num_bigint::BigInt;
    use num_traits::{One, Signed, Zero};
    use std::cmp::Ordering;

    #[derive(Copy, Clone, PartialEq, Eq)]
    pub enum Direction {
        Up,
        Down,
    }

    /// A decimal number `sign * digits * 10^exp10` with exact integer digits.
    struct Decimal {
        /// Signed integer mantissa (all digits, no precision cap).
        mantissa: BigInt,
        /// Power-of-ten scale.
        exp10: i64,
    }

    fn parse_exact(s: &str) -> Option<Decimal> {
        let bytes = s.as_bytes();
        let mut i = 0;
        let mut negative = false;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            negative = bytes[i] == b'-';
            i += 1;
        }
        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        let mut seen_digit = false;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            seen_digit = true;
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                digits.push(bytes[i] as char);
                frac_len += 1;
                seen_digit = true;
                i += 1;
            }
        }
        if !seen_digit {
            return None;
        }
        let mut exp: i64 = 0;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            i += 1;
            let mut exp_neg = false;
            if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                exp_neg = bytes[i] == b'-';
                i += 1;
            }
            let start = i;
            let mut val: i64 = 0;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                val = val.checked_mul(10)?.checked_add((bytes[i] - b'0') as i64)?;
                i += 1;
            }
            if i == start {
                return None;
            }
            exp = if exp_neg { -val } else { val };
        }
        if i != bytes.len() {
            return None;
        }
        let mut mantissa: BigInt = digits.parse().ok()?;
        if negative {
            mantissa = -mantissa;
        }
        Some(Decimal {
            mantissa,
            exp10: exp - frac_len,
        })
    }

    /// Compares the exact value of `d` with the exact value of the finite
    /// float `x`.
    fn cmp_decimal_f64(d: &Decimal, x: f64) -> Ordering {
        // Decompose x = m2 * 2^e2 exactly.
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m2_abs, e2) = if biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let m2 = BigInt::from(sign) * BigInt::from(m2_abs);

        // Compare d.mantissa * 10^exp10 with m2 * 2^e2 by clearing
        // denominators with nonnegative powers only.
        let ten = BigInt::from(10u32);
        let two = BigInt::from(2u32);
        let mut lhs = d.mantissa.clone();
        let mut rhs = m2;
        if d.exp10 >= 0 {
            lhs *= ten.pow(d.exp10 as u32);
        } else {
            rhs *= ten.pow((-d.exp10) as u32);
        }
        if e2 >= 0 {
            rhs *= two.pow(e2 as u32);
        } else {
            lhs *= two.pow((-e2) as u32);
        }
        lhs.cmp(&rhs)
    }

    pub fn parse(s: &str) -> Result<Interval, IntervalError> {
        let bad = || IntervalError::BadDecimal {
            literal: s.to_string(),
        };
        let d = parse_exact(s).ok_or_else(bad)?;
        // Rust's float parser is correctly rounded (nearest).
        let v: f64 = s.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        match cmp_decimal_f64(&d, v) {
            Ordering::Equal => Ok(Interval::new(v, v)),
            Ordering::Less => {
                if v == f64::MIN {
                    return Err(bad()); // exact value below the float range
                }
                Ok(Interval::new(v.next_down(), v))
            }
            Ordering::Greater => {
                if v == f64::MAX {
                    return Err(bad()); // exact value above the float range
                }
                Ok(Interval::new(v, v.next_up()))
            }
        }
    }

    /// Formats `x` to `sig` significant digits such that the exact decimal
    /// value of the output bounds `x` from the requested direction.  The
    /// output always re-parses to a finite float; if directed rounding at
    /// the requested precision would overflow the float range (near
    /// `±f64::MAX`), the exact decimal expansion of `x` is returned instead.
    pub fn format_directed(x: f64, sig: usize, dir: Direction) -> String {
        assert!(x.is_finite());
        let sig = sig.max(1);
        if x == 0.0 {
            return "0".to_string();
        }
        // Round-to-nearest decimal rendering with `sig` significant digits,
        // then bump by one unit in the last digit if it landed on the wrong
        // side (nearest is within half a unit, so one bump suffices).
        let mut s = format!("{:.*e}", sig - 1, x);
        for _ in 0..2 {
            if !s.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false) {
                break;
            }
            let d = parse_exact(&s).expect("formatter output must reparse");
            // The literal's exact value must stay inside the finite float
            // range, or `parse` (from_decimal) could not re-enclose it.
            if cmp_decimal_f64(&d, f64::MAX) == Ordering::Greater
                || cmp_decimal_f64(&d, f64::MIN) == Ordering::Less
            {
                break;
            }
            let cmp = cmp_decimal_f64(&d, x);
            let ok = match dir {
                Direction::Up => cmp != Ordering::Less,
                Direction::Down => cmp != Ordering::Greater,
            };
            if ok {
                return s;
            }
            s = bump(&s, dir);
        }
        exact_decimal(x)
    }

    /// The exact decimal expansion of a finite float, as integer-mantissa
    /// scientific notation (`m * 2^e = m * 5^{-e} * 10^{e}` for `e < 0`).
    fn exact_decimal(x: f64) -> String {
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m2, e2) = if biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut mantissa = BigInt::from(m2);
        let mut exp10 = 0i64;
        if e2 >= 0 {
            mantissa <<= e2 as u32;
        } else {
            mantissa *= BigInt::from(5u32).pow((-e2) as u32);
            exp10 = e2;
        }
        let sign = if negative { "-" } else { "" };
        if exp10 == 0 {
            format!("{sign}{mantissa}")
        } else {
            format!("{sign}{mantissa}e{exp10}")
        }
    }

    /// Adds (`Up`) or subtracts (`Down`) one unit in the last significant
    /// digit of a literal in scientific notation, moving its *value* in the
    /// requested direction.
    fn bump(s: &str, dir: Direction) -> String {
        let d = parse_exact(s).expect("bump input must be parseable");
        // Count significant digits to reconstruct the same width after the
        // carry (mantissa may gain a digit: 9.99 -> 10.00 -> 1.000e+1).
        let digits = d.mantissa.abs().to_string();
        let ndigits = digits.len();
        let step = match dir {
            Direction::Up => BigInt::one(),
            Direction::Down => -BigInt::one(),
        };
        let mut mantissa = d.mantissa + step;
        let mut exp10 = d.exp10;
        let new_digits = mantissa.abs().to_string().len();
        if new_digits > ndigits {
            // 999 + 1 = 1000: drop the trailing zero to keep `sig` digits.
            mantissa /= 10;
            exp10 += 1;
        }
        if mantissa.is_zero() {
            return "0".to_string();
        }
        // Re-render in scientific notation with the same digit count.
        let neg = mantissa.is_negative();
        let digits = mantissa.abs().to_string();
        let e = exp10 + digits.len() as i64 - 1;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('e');
        out.push_str(&e.to_string());
        out
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn exact_integer_arithmetic_stays_exact() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
        assert_eq!(iv(1.0, 2.0) - iv(3.0, 4.0), iv(-3.0, -1.0));
        assert_eq!(iv(2.0, 3.0) * iv(5.0, 7.0), iv(10.0, 21.0));
        assert_eq!(iv(1.0, 2.0) / iv(4.0, 8.0), iv(0.125, 0.5));
        assert_eq!(iv(4.0, 9.0).sqrt().unwrap(), iv(2.0, 3.0));
        assert_eq!(iv(2.0, 3.0).pow_int(3), iv(8.0, 27.0));
    }

    #[test]
    fn outward_rounding_encloses_and_is_tight() {
        // 0.1 + 0.2 is inexact; the enclosure must contain the true sum and
        // be at most one ulp wide per endpoint.
        let x = iv(0.1, 0.1) + iv(0.2, 0.2);
        assert!(x.lo() <= 0.1 + 0.2 && 0.1 + 0.2 <= x.hi());
        assert!(x.width() <= 2.0 * (0.3f64).next_up().next_up() * f64::EPSILON);
        // Tightness: endpoints are within 1 ulp of the nearest result.
        let nearest = 0.1 + 0.2;
        assert!(x.lo() == nearest || x.lo() == nearest.next_down());
        assert!(x.hi() == nearest || x.hi() == nearest.next_up());
    }

    #[test]
    fn multiplication_matches_endpoint_product_hull() {
        // Deterministic pseudo-random sample of sign combinations.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let v = ((state >> 11) as f64) / ((1u64 << 53) as f64);
            (v - 0.5) * 200.0
        };
        for _ in 0..10_000 {
            let (a, b) = {
                let (x, y) = (rnd(), rnd());
                (x.min(y), x.max(y))
            };
            let (c, d) = {
                let (x, y) = (rnd(), rnd());
                (x.min(y), x.max(y))
            };
            let r = iv(a, b) * iv(c, d);
            let products = [a * c, a * d, b * c, b * d];
            let pmin = products.iter().cloned().fold(f64::INFINITY, f64::min);
            let pmax = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // Containment of the (nearest-rounded) endpoint products...
            assert!(r.lo() <= pmin && pmax <= r.hi());
            // ...and tightness to one ulp.
            assert!(r.lo() >= pmin.next_down());
            assert!(r.hi() <= pmax.next_up());
        }
    }

    #[test]
    fn division_by_zero_interval_is_rejected() {
        assert_eq!(
            iv(1.0, 2.0).div(iv(-1.0, 1.0)),
            Err(IntervalError::DivisionByZero)
        );
        assert_eq!(
            iv(1.0, 2.0).div(iv(0.0, 1.0)),
            Err(IntervalError::DivisionByZero)
        );
    }

    #[test]
    fn sqrt_of_negative_is_rejected() {
        assert!(matches!(
            iv(-1.0, 4.0).sqrt(),
            Err(IntervalError::SqrtOfNegative { .. })
        ));
    }

    #[test]
    fn division_and_sqrt_enclose_true_values() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for _ in 0..10_000 {
            let a = rnd() * 100.0 + 1e-3;
            let b = rnd() * 100.0 + 1e-3;
            let q = iv(a, a).div(iv(b, b)).unwrap();
            let nearest = a / b;
            assert!(q.contains(nearest) || q.lo() == nearest.next_down() || q.hi() == nearest.next_up());
            assert!(q.lo() <= nearest && nearest <= q.hi() || q.width() == 0.0);
            // Exact check: lo <= a/b <= hi must hold for the *true* quotient.
            // Multiply back through (rounded, so allow one ulp of slack on
            // each side).
            assert!(q.lo() * b <= a * (1.0 + 4.0 * f64::EPSILON));
            assert!(q.hi() * b >= a * (1.0 - 4.0 * f64::EPSILON));

            let s = iv(a, a).sqrt().unwrap();
            assert!(s.lo() * s.lo() <= a && a <= s.hi() * s.hi() * (1.0 + 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn even_power_handles_sign_straddle() {
        assert_eq!(iv(-2.0, 1.0).pow_int(2), iv(0.0, 4.0));
        assert_eq!(iv(-2.0, 1.0).pow_int(3), iv(-8.0, 1.0));
        assert_eq!(iv(-3.0, -2.0).pow_int(2), iv(4.0, 9.0));
        assert_eq!(iv(-3.0, -2.0).pow_int(4), iv(16.0, 81.0));
    }

    #[test]
    fn signed_power_is_monotone_and_matches_odd_powers() {
        assert_eq!(iv(-2.0, 3.0).signed_pow(3), iv(-8.0, 27.0));
        // t|t| on [-2, 3] is [-4, 9].
        assert_eq!(iv(-2.0, 3.0).signed_pow(2), iv(-4.0, 9.0));
        assert_eq!(iv(-2.0, -1.0).signed_pow(2), iv(-4.0, -1.0));
    }

    /// Machin's formula: pi = 16 atan(1/5) - 4 atan(1/239), with the
    /// arctangent series summed in interval arithmetic and the alternating
    /// tail enclosed by its first omitted term.  This validates the pinned
    /// one-ulp enclosure `Interval::pi()` from an independent route.
    #[test]
    fn pi_enclosure_validated_by_machin_series() {
        fn atan_inv(q: f64, terms: u32) -> Interval {
            let x = Interval::ONE / Interval::point(q);
            let x2 = x * x;
            let mut sum = Interval::ZERO;
            let mut power = x;
            for k in 0..terms {
                let term = power / Interval::point((2 * k + 1) as f64);
                if k % 2 == 0 {
                    sum = sum + term;
                } else {
                    sum = sum - term;
                }
                power = power * x2;
            }
            // Alternating series with decreasing terms: the remainder lies
            // between 0 and the next term (with its sign).
            let next = power / Interval::point((2 * terms + 1) as f64);
            let tail = if terms % 2 == 0 {
                Interval::new(0.0, next.hi())
            } else {
                Interval::new(-next.hi(), 0.0)
            };
            sum + tail
        }
        let pi = 16.0 * atan_inv(5.0, 15) - 4.0 * atan_inv(239.0, 8);
        let pinned = Interval::pi();
        // The independent enclosure must intersect the pinned one and must
        // certify that PI (the f64 constant) is below the true pi.
        assert!(pi.lo() > 0.0);
        assert!(pinned.lo() >= pi.lo().next_down().next_down());
        assert!(pinned.hi() <= pi.hi().next_up().next_up());
        assert!(pi.contains(core::f64::consts::PI) || pi.lo() > core::f64::consts::PI);
        // Width of the Machin enclosure: a few ulps.
        assert!(pi.width() < 1e-14);
        // And the pinned enclosure is exactly one ulp wide.
        assert_eq!(pinned.hi(), pinned.lo().next_up());
    }

    #[test]
    fn from_decimal_exact_cases() {
        assert_eq!(Interval::from_decimal("2").unwrap(), iv(2.0, 2.0));
        assert_eq!(Interval::from_decimal("-0.5").unwrap(), iv(-0.5, -0.5));
        assert_eq!(Interval::from_decimal("1e3").unwrap(), iv(1000.0, 1000.0));
        assert_eq!(Interval::from_decimal("0.25").unwrap(), iv(0.25, 0.25));
        assert_eq!(
            Interval::from_decimal("123456789").unwrap(),
            iv(123456789.0, 123456789.0)
        );
    }

    #[test]
    fn from_decimal_inexact_is_one_ulp_and_contains_value() {
        for s in ["0.1", "0.2", "0.3", "1e-5", "3.14159", "-0.7", "2.2250738585072011e-308"] {
            let x = Interval::from_decimal(s).unwrap();
            assert!(x.width() > 0.0, "{s} should be inexact");
            assert_eq!(x.hi(), x.lo().next_up(), "{s} enclosure wider than 1 ulp");
            // The nearest float must be one of the endpoints.
            let v: f64 = s.parse().unwrap();
            assert!(x.lo() == v || x.hi() == v);
        }
    }

    #[test]
    fn from_decimal_rejects_garbage() {
        for s in ["", "abc", "1.2.3", "1e", "--5", "0x12", "1 2", "nan", "inf"] {
            assert!(Interval::from_decimal(s).is_err(), "{s:?} should fail");
        }
    }

    #[test]
    fn decimal_directed_formatting_round_trips() {
        let cases = [
            4.63295216e-8,
            -1.2345678901234567,
            0.1,
            6.62315,
            1.0,
            -0.0,
            9.999999999e99,
            5e-324,
            -5e-324,
            1.7976931348623157e308,
        ];
        for &x in &cases {
            for sig in [3, 9, 17] {
                let up = Interval::to_decimal_upper(x, sig);
                let dn = Interval::to_decimal_lower(x, sig);
                let up_iv = Interval::from_decimal(&up).unwrap();
                let dn_iv = Interval::from_decimal(&dn).unwrap();
                // Round-trip safety: re-parsing the upper literal gives an
                // interval whose hi is >= x, and symmetrically below.
                assert!(up_iv.hi() >= x, "upper {up} < {x}");
                assert!(dn_iv.lo() <= x, "lower {dn} > {x}");
            }
        }
        // 17 significant digits reproduce the float exactly.
        for &x in &cases {
            let up = Interval::to_decimal_upper(x, 17);
            let v: f64 = up.parse().unwrap();
            assert_eq!(v, x, "17-digit upper literal must reparse to x");
        }
    }

    #[test]
    fn decimal_carry_chain_bumps_exponent() {
        // 0.9999999999 to 3 digits rounds to 1.00e0 already; force a carry
        // with a value just above a representable 9.99 rendering.
        let s = Interval::to_decimal_upper(9.995001, 3);
        let v = Interval::from_decimal(&s).unwrap();
        assert!(v.hi() >= 9.995001);
        // Lower bound of a negative number must move away from zero.
        let s = Interval::to_decimal_lower(-9.995001, 3);
        let v = Interval::from_decimal(&s).unwrap();
        assert!(v.lo() <= -9.995001);
    }

    #[test]
    fn hull_intersect_contains() {
        let a = iv(0.0, 2.0);
        let b = iv(1.0, 3.0);
        assert_eq!(a.hull(b), iv(0.0, 3.0));
        assert_eq!(a.intersect(b).unwrap(), iv(1.0, 2.0));
        assert_eq!(
            iv(0.0, 1.0).intersect(iv(2.0, 3.0)),
            Err(IntervalError::EmptyIntersection)
        );
        assert!(a.contains(2.0));
        assert!(!a.contains(2.0f64.next_up()));
        assert!(iv(1.0, 2.0).is_subset_of(iv(0.0, 3.0)));
        assert!(iv(1.0, 2.0).is_interior_to(iv(0.0, 3.0)));
        assert!(!iv(0.0, 2.0).is_interior_to(iv(0.0, 3.0)));
    }

    #[test]
    fn width_mid_rad_are_sound() {
        let x = iv(1.0, 1.0 + 3.0 * f64::EPSILON);
        assert!(x.width() >= 3.0 * f64::EPSILON);
        assert!(x.contains(x.mid()));
        let m = x.mid();
        assert!(m - x.rad() <= x.lo() && x.hi() <= m + x.rad());
    }

    #[test]
    fn abs_and_mig_mag() {
        assert_eq!(iv(-3.0, 2.0).abs(), iv(0.0, 3.0));
        assert_eq!(iv(-3.0, -2.0).abs(), iv(2.0, 3.0));
        assert_eq!(iv(2.0, 3.0).abs(), iv(2.0, 3.0));
        assert_eq!(iv(-3.0, 2.0).mig(), 0.0);
        assert_eq!(iv(-3.0, -2.0).mig(), 2.0);
        assert_eq!(iv(-3.0, 2.0).mag(), 3.0);
    }

    #[test]
    fn invalid_endpoints_rejected() {
        assert!(Interval::try_new(2.0, 1.0).is_err());
        assert!(Interval::try_new(f64::NAN, 1.0).is_err());
        assert!(Interval::try_new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn subnormal_fallbacks_still_enclose() {
        let tiny = 2.0 * f64::MIN_POSITIVE;
        let x = iv(tiny, tiny) * iv(0.25, 0.25);
        assert!(x.lo() <= tiny * 0.25 && tiny * 0.25 <= x.hi());
        let y = iv(5e-324, 5e-324) * iv(0.5, 0.5);
        assert!(y.lo() <= 0.0 && y.hi() >= 5e-324 * 0.5);
        let q = iv(5e-324, 5e-324).div(iv(3.0, 3.0)).unwrap();
        assert!(q.lo() <= 5e-324 / 3.0 && 5e-324 / 3.0 <= q.hi());
    }
}
