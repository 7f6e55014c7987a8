//! Interval arithmetic with per-operation directed rounding.
//!
//! Every operation computes the round-to-nearest result together with its
//! exact rounding error (two-sum, fma) and moves the endpoint one ulp
//! outward only when the error points that way. No global floating-point
//! state is touched, so values are safe to use from any thread.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("inverted interval: lo {lo} > hi {hi}")]
    Inverted { lo: f64, hi: f64 },
    #[error("division by an interval containing zero: [{lo}, {hi}]")]
    DivisionByZero { lo: f64, hi: f64 },
    #[error("non-finite endpoint")]
    NonFinite,
    #[error("argument outside the domain of {0}")]
    Domain(&'static str),
}

/// Relative slack applied to `ln` / `exp` enclosures.
pub const TRANSCENDENTAL_SLACK: f64 = 1e-14;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Lower bound for `s + err` where `s` is the rounded value.
#[inline]
fn down(s: f64, err: f64) -> f64 {
    if err < 0.0 || err.is_nan() || s.is_subnormal() || s == 0.0 && err != 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn up(s: f64, err: f64) -> f64 {
    if err > 0.0 || err.is_nan() || s.is_subnormal() || s == 0.0 && err != 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    down(s, e)
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    up(s, e)
}

#[inline]
fn mul_parts(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    // fma error is exact unless the product is tiny
    if p != 0.0 && p.abs() < 1e-290 {
        (p, f64::NAN)
    } else {
        (p, e)
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (p, e) = mul_parts(a, b);
    down(p, e)
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (p, e) = mul_parts(a, b);
    up(p, e)
}

#[inline]
fn div_parts(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    // a - q*b, exact when q*b is representable to within an fma
    let r = (-q).mul_add(b, a);
    let e = if b > 0.0 { r } else { -r };
    if q != 0.0 && q.abs() < 1e-290 {
        (q, f64::NAN)
    } else {
        (q, e)
    }
}

#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let (q, e) = div_parts(a, b);
    down(q, e)
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let (q, e) = div_parts(a, b);
    up(q, e)
}

/// Closed real interval `[lo, hi]` with outward-rounded arithmetic.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::NonFinite);
        }
        if lo > hi {
            return Err(IntervalError::Inverted { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Point interval. Panics on a non-finite input.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval from non-finite value");
        Interval { lo: x, hi: x }
    }

    /// `[c - r, c + r]`, rounded outward.
    pub fn centered(c: f64, r: f64) -> Self {
        let r = r.abs();
        Interval {
            lo: add_down(c, -r),
            hi: add_up(c, r),
        }
    }

    /// `[-r, r]`
    pub fn symmetric(r: f64) -> Self {
        Interval { lo: -r.abs(), hi: r.abs() }
    }

    /// Smallest interval containing both endpoints, in either order.
    pub fn spanning(a: f64, b: f64) -> Self {
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }
    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on the width.
    pub fn width(&self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    /// Upper bound on the radius around `mid()`.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        add_up(self.hi, -m).max(add_up(m, -self.lo))
    }

    /// Magnitude: `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: `min |x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `self ⊆ other`
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self` lies in the interior of `other`.
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Grow by `r` on both sides.
    pub fn inflate(&self, r: f64) -> Interval {
        let r = r.abs();
        Interval {
            lo: add_down(self.lo, -r),
            hi: add_up(self.hi, r),
        }
    }

    /// Split at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: mul_down(a.lo, a.lo),
            hi: mul_up(a.hi, a.hi),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZero { lo: rhs.lo, hi: rhs.hi });
        }
        let cands_lo = [
            div_down(self.lo, rhs.lo),
            div_down(self.lo, rhs.hi),
            div_down(self.hi, rhs.lo),
            div_down(self.hi, rhs.hi),
        ];
        let cands_hi = [
            div_up(self.lo, rhs.lo),
            div_up(self.lo, rhs.hi),
            div_up(self.hi, rhs.lo),
            div_up(self.hi, rhs.hi),
        ];
        let lo = cands_lo.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cands_hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        Interval::ONE.checked_div(self)
    }

    pub fn checked_add(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        let r = *self + *rhs;
        r.finite()
    }

    pub fn checked_mul(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        let r = *self * *rhs;
        r.finite()
    }

    fn finite(self) -> Result<Interval, IntervalError> {
        if self.lo.is_finite() && self.hi.is_finite() {
            Ok(self)
        } else {
            Err(IntervalError::NonFinite)
        }
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.hi < 0.0 {
            return Err(IntervalError::Domain("sqrt"));
        }
        let lo = if self.lo <= 0.0 { 0.0 } else { sqrt_down(self.lo) };
        Ok(Interval { lo, hi: sqrt_up(self.hi) })
    }

    pub fn ln(&self) -> Result<Interval, IntervalError> {
        if self.lo <= 0.0 {
            return Err(IntervalError::Domain("ln"));
        }
        let a = self.lo.ln();
        let b = self.hi.ln();
        Interval::new(slack_down(a), slack_up(b))
    }

    pub fn exp(&self) -> Result<Interval, IntervalError> {
        let a = self.lo.exp();
        let b = self.hi.exp();
        Interval::new(slack_down(a).max(0.0), slack_up(b))
    }

    /// Integer power by repeated squaring; even powers are nonnegative.
    pub fn powi(&self, n: u32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        if n % 2 == 0 {
            let half = self.sqr().powi(n / 2);
            return half;
        }
        *self * self.powi(n - 1)
    }
}

fn sqrt_down(x: f64) -> f64 {
    let s = x.sqrt();
    let r = (-s).mul_add(s, x);
    down(s, r)
}

fn sqrt_up(x: f64) -> f64 {
    let s = x.sqrt();
    let r = (-s).mul_add(s, x);
    up(s, r)
}

fn slack_down(v: f64) -> f64 {
    (v - v.abs() * TRANSCENDENTAL_SLACK - f64::MIN_POSITIVE).next_down()
}

fn slack_up(v: f64) -> f64 {
    (v + v.abs() * TRANSCENDENTAL_SLACK + f64::MIN_POSITIVE).next_up()
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        if a >= 0.0 && c >= 0.0 {
            return Interval { lo: mul_down(a, c), hi: mul_up(b, d) };
        }
        if b <= 0.0 && d <= 0.0 {
            return Interval { lo: mul_down(b, d), hi: mul_up(a, c) };
        }
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval { lo, hi }
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

/// Panics when the divisor contains zero; use [`Interval::checked_div`] on
/// untrusted data.
impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        self.checked_div(&rhs).expect("interval division by zero-containing interval")
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // Rust's float Display is the shortest round-trip representation.
        let mut st = serializer.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &format!("{}", self.lo))?;
        st.serialize_field("hi", &format!("{}", self.hi))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lo: String,
            hi: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let lo: f64 = raw.lo.parse().map_err(de::Error::custom)?;
        let hi: f64 = raw.hi.parse().map_err(de::Error::custom)?;
        Interval::new(lo, hi).map_err(de::Error::custom)
    }
}

/// Interval-valued point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IVec2 {
    pub x: Interval,
    pub y: Interval,
}

impl IVec2 {
    pub fn new(x: Interval, y: Interval) -> Self {
        IVec2 { x, y }
    }

    pub fn point(x: f64, y: f64) -> Self {
        IVec2 { x: Interval::point(x), y: Interval::point(y) }
    }

    pub fn from_bounds(x: (f64, f64), y: (f64, f64)) -> Result<Self, IntervalError> {
        Ok(IVec2 { x: Interval::new(x.0, x.1)?, y: Interval::new(y.0, y.1)? })
    }

    pub fn mid(&self) -> [f64; 2] {
        [self.x.mid(), self.y.mid()]
    }

    pub fn midpoint(&self) -> IVec2 {
        IVec2::point(self.x.mid(), self.y.mid())
    }

    pub fn hull(&self, other: &IVec2) -> IVec2 {
        IVec2 { x: self.x.hull(&other.x), y: self.y.hull(&other.y) }
    }

    pub fn subset_of(&self, other: &IVec2) -> bool {
        self.x.subset_of(&other.x) && self.y.subset_of(&other.y)
    }

    pub fn interior_of(&self, other: &IVec2) -> bool {
        self.x.interior_of(&other.x) && self.y.interior_of(&other.y)
    }

    pub fn overlaps(&self, other: &IVec2) -> bool {
        self.x.overlaps(&other.x) && self.y.overlaps(&other.y)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.x.contains(p[0]) && self.y.contains(p[1])
    }

    pub fn max_width(&self) -> f64 {
        self.x.width().max(self.y.width())
    }

    /// Upper bound on the diameter (diagonal length).
    pub fn diameter(&self) -> f64 {
        let wx = Interval::point(self.x.width());
        let wy = Interval::point(self.y.width());
        (wx.sqr() + wy.sqr()).sqrt().map(|r| r.hi()).unwrap_or(f64::INFINITY)
    }

    pub fn inflate(&self, r: f64) -> IVec2 {
        IVec2 { x: self.x.inflate(r), y: self.y.inflate(r) }
    }

    /// Four quadrants.
    pub fn quarter(&self) -> [IVec2; 4] {
        let (x0, x1) = self.x.bisect();
        let (y0, y1) = self.y.bisect();
        [
            IVec2::new(x0, y0),
            IVec2::new(x1, y0),
            IVec2::new(x0, y1),
            IVec2::new(x1, y1),
        ]
    }

    /// Reflection `T(x, u) = (x, -u)`.
    pub fn flip(&self) -> IVec2 {
        IVec2 { x: self.x, y: -self.y }
    }

    pub fn sub(&self, other: &IVec2) -> IVec2 {
        IVec2 { x: self.x - other.x, y: self.y - other.y }
    }

    pub fn add(&self, other: &IVec2) -> IVec2 {
        IVec2 { x: self.x + other.x, y: self.y + other.y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.lo.is_finite() && self.x.hi.is_finite() && self.y.lo.is_finite() && self.y.hi.is_finite()
    }
}

/// Enclosure of the Euclidean norm of every member of `v`.
pub fn norm2_bound(v: &IVec2) -> Interval {
    (v.x.sqr() + v.y.sqr()).sqrt().expect("sum of squares is nonnegative")
}

/// Interval-valued 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IMat2 {
    pub m: [[Interval; 2]; 2],
}

impl IMat2 {
    pub fn new(a: Interval, b: Interval, c: Interval, d: Interval) -> Self {
        IMat2 { m: [[a, b], [c, d]] }
    }

    pub fn from_f64(a: [[f64; 2]; 2]) -> Self {
        IMat2::new(
            Interval::point(a[0][0]),
            Interval::point(a[0][1]),
            Interval::point(a[1][0]),
            Interval::point(a[1][1]),
        )
    }

    pub fn identity() -> Self {
        IMat2::new(Interval::ONE, Interval::ZERO, Interval::ZERO, Interval::ONE)
    }

    pub fn diag(a: Interval, d: Interval) -> Self {
        IMat2::new(a, Interval::ZERO, Interval::ZERO, d)
    }

    pub fn mul_vec(&self, v: &IVec2) -> IVec2 {
        IVec2 {
            x: self.m[0][0] * v.x + self.m[0][1] * v.y,
            y: self.m[1][0] * v.x + self.m[1][1] * v.y,
        }
    }

    pub fn mul(&self, o: &IMat2) -> IMat2 {
        let a = &self.m;
        let b = &o.m;
        IMat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn det(&self) -> Interval {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Interval {
        self.m[0][0] + self.m[1][1]
    }

    pub fn mid(&self) -> [[f64; 2]; 2] {
        [
            [self.m[0][0].mid(), self.m[0][1].mid()],
            [self.m[1][0].mid(), self.m[1][1].mid()],
        ]
    }

    /// Enclosures `(e_big, e_small)` of the real eigenvalues, ordered by
    /// the sign of the square root: `(t ± sqrt(t² − 4d)) / 2` with the
    /// larger modulus first when `t < 0`. `None` if the discriminant may
    /// be negative.
    pub fn real_eigenvalues(&self) -> Option<(Interval, Interval)> {
        let t = self.trace();
        let disc = t.sqr() - self.det() * 4.0;
        if disc.lo <= 0.0 {
            return None;
        }
        let r = disc.sqrt().ok()?;
        let plus = (t + r) * 0.5;
        let minus = (t - r) * 0.5;
        Some(if t.hi < 0.0 { (minus, plus) } else { (plus, minus) })
    }

    pub fn frobenius_sq(&self) -> Interval {
        self.m[0][0].sqr() + self.m[0][1].sqr() + self.m[1][0].sqr() + self.m[1][1].sqr()
    }

    /// Enclosures of the two singular values `(σ_max, σ_min)`.
    ///
    /// Uses `σ_max² = (f + sqrt(f² - 4 det²)) / 2` with `f` the squared
    /// Frobenius norm, and `σ_min = |det| / σ_max`.
    pub fn singular_values(&self) -> (Interval, Interval) {
        let f = self.frobenius_sq();
        let d = self.det();
        let disc = f.sqr() - d.sqr() * 4.0;
        let disc = Interval { lo: disc.lo.max(0.0), hi: disc.hi.max(0.0) };
        let root = disc.sqrt().expect("clamped nonnegative");
        let smax2 = (f + root) * 0.5;
        let smax2 = Interval { lo: smax2.lo.max(0.0), hi: smax2.hi.max(0.0) };
        let smax = smax2.sqrt().expect("clamped nonnegative");
        // a tighter upper bound: σ_max ≤ Frobenius norm
        let fro = f.sqrt().expect("sum of squares");
        let smax = Interval { lo: smax.lo, hi: smax.hi.min(fro.hi) };
        let smin = if smax.lo > 0.0 {
            let q = d.abs().checked_div(&smax).expect("positive divisor");
            // σ_min ≤ σ_max always
            Interval { lo: q.lo.min(smax.hi), hi: q.hi.min(smax.hi) }
        } else {
            Interval { lo: 0.0, hi: smax.hi }
        };
        (smax, smin)
    }
}

/// Enclosure of the spectral norm of every member of `m`.
pub fn opnorm_bound(m: &IMat2) -> Interval {
    m.singular_values().0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sums_are_not_widened() {
        let a = Interval::new(1.0, 2.0).unwrap();
        let b = Interval::new(3.0, 4.0).unwrap();
        assert_eq!(a + b, Interval::new(4.0, 6.0).unwrap());
    }

    #[test]
    fn unit_square() {
        let a = Interval::new(-1.0, 1.0).unwrap();
        assert_eq!(a * a, a);
        assert_eq!(a.sqr(), Interval::new(0.0, 1.0).unwrap());
    }

    #[test]
    fn inverted_construction_fails() {
        assert!(matches!(Interval::new(2.0, 1.0), Err(IntervalError::Inverted { .. })));
        assert!(matches!(Interval::new(f64::NAN, 1.0), Err(IntervalError::NonFinite)));
    }

    #[test]
    fn division_by_zero_interval() {
        let a = Interval::point(1.0);
        let b = Interval::new(-1.0, 2.0).unwrap();
        assert!(matches!(a.checked_div(&b), Err(IntervalError::DivisionByZero { .. })));
    }

    #[test]
    fn third_is_enclosed_within_two_ulp() {
        let q = Interval::point(1.0).checked_div(&Interval::point(3.0)).unwrap();
        // 1/3 in double-double: hi word plus correction
        let t = twofloat::TwoFloat::from(1.0) / twofloat::TwoFloat::from(3.0);
        let (h, l) = (t.hi(), t.lo());
        assert!(q.lo() < h || (q.lo() == h && l >= 0.0));
        assert!(q.hi() > h || (q.hi() == h && l <= 0.0));
        let ulp = (1.0f64 / 3.0).next_up() - 1.0 / 3.0;
        assert!(q.width() <= 2.0 * ulp);
    }

    #[test]
    fn overflow_is_reported() {
        let a = Interval::point(f64::MAX);
        assert!(matches!(a.checked_mul(&Interval::point(2.0)), Err(IntervalError::NonFinite)));
    }

    #[test]
    fn norms() {
        let v = IVec2::point(3.0, 4.0);
        assert!(norm2_bound(&v).contains(5.0));
        assert!(opnorm_bound(&IMat2::identity()).contains(1.0));
        let d = IMat2::diag(Interval::point(2.0), Interval::point(0.5));
        let (smax, smin) = d.singular_values();
        assert!(smax.contains(2.0) && smax.width() < 1e-14);
        assert!(smin.contains(0.5) && smin.width() < 1e-14);
    }

    #[test]
    fn sqrt_and_ln_enclose() {
        let two = Interval::point(2.0);
        let r = two.sqrt().unwrap();
        assert!(r.contains(std::f64::consts::SQRT_2));
        let l = two.ln().unwrap();
        assert!(l.contains(std::f64::consts::LN_2));
        assert!(l.width() < 1e-13);
        let e = Interval::point(1.0).exp().unwrap();
        assert!(e.contains(std::f64::consts::E));
    }

    #[test]
    fn serializes_endpoints_as_round_trip_strings() {
        let a = Interval::new(0.1, 0.30000000000000004).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"lo":"0.1","hi":"0.30000000000000004"}"#);
        let b: Interval = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
