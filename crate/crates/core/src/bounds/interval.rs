//! Closed intervals with outward rounding.
//!
//! Endpoints are rounded outward exactly as hardware directed rounding would:
//! each primitive result is computed in round-to-nearest and its rounding
//! error is recovered with an error-free transformation (TwoSum for sums, an
//! FMA residual for products, quotients and square roots). The endpoint is
//! moved one ulp only when the error points outward, so exact operations
//! stay exact.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::model::State;

/// Name of the rounding strategy, recorded in every bound report.
pub const ROUNDING_STRATEGY: &str = "directed rounding (error-free transformations)";

// Below this magnitude FMA residuals may underflow; fall back to widening.
const TINY: f64 = 1e-290;

/// Rounds a round-to-nearest result `r` whose exact value is `r + err`.
#[inline]
fn down(r: f64, err: f64) -> f64 {
    if !err.is_finite() || !r.is_finite() || r.abs() < TINY || err < 0.0 {
        r.next_down()
    } else {
        r
    }
}

#[inline]
fn up(r: f64, err: f64) -> f64 {
    if !err.is_finite() || !r.is_finite() || r.abs() < TINY || err > 0.0 {
        r.next_up()
    } else {
        r
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn add_dn(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if s == 0.0 && e == 0.0 {
        0.0
    } else {
        down(s, e)
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if s == 0.0 && e == 0.0 {
        0.0
    } else {
        up(s, e)
    }
}

#[inline]
fn mul_err(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn mul_dn(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (p, e) = mul_err(a, b);
    down(p, e)
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (p, e) = mul_err(a, b);
    up(p, e)
}

#[inline]
fn div_err(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    // a - q b is exact; the true quotient exceeds q when (a - q b) / b > 0
    let r = (-q).mul_add(b, a);
    (q, if b > 0.0 { r } else { -r })
}

#[inline]
fn div_dn(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let (q, e) = div_err(a, b);
    down(q, e)
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let (q, e) = div_err(a, b);
    up(q, e)
}

#[inline]
fn sqrt_err(x: f64) -> (f64, f64) {
    let s = x.sqrt();
    (s, (-s).mul_add(s, x))
}

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn is_zero(self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn subset_of(self, o: Interval) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn intersects(self, o: Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn intersect(self, o: Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    pub fn bisect(self) -> (Interval, Interval) {
        let m = self.mid();
        (
            Interval { lo: self.lo, hi: m },
            Interval { lo: m, hi: self.hi },
        )
    }

    pub fn sqr(self) -> Interval {
        if self.lo >= 0.0 {
            Interval {
                lo: mul_dn(self.lo, self.lo),
                hi: mul_up(self.hi, self.hi),
            }
        } else if self.hi <= 0.0 {
            Interval {
                lo: mul_dn(self.hi, self.hi),
                hi: mul_up(self.lo, self.lo),
            }
        } else {
            let m = self.lo.abs().max(self.hi);
            Interval {
                lo: 0.0,
                hi: mul_up(m, m),
            }
        }
    }

    /// Square root; `None` when the interval reaches below zero.
    pub fn sqrt(self) -> Option<Interval> {
        if self.lo < 0.0 {
            return None;
        }
        let (sl, el) = sqrt_err(self.lo);
        let (sh, eh) = sqrt_err(self.hi);
        Some(Interval {
            lo: if self.lo == 0.0 {
                0.0
            } else {
                down(sl, el).max(0.0)
            },
            hi: if self.hi == 0.0 { 0.0 } else { up(sh, eh) },
        })
    }

    /// Division; `None` unless the divisor is bounded away from zero.
    pub fn checked_div(self, d: Interval) -> Option<Interval> {
        if d.lo <= 0.0 && d.hi >= 0.0 {
            return None;
        }
        let pairs = [
            (self.lo, d.lo),
            (self.lo, d.hi),
            (self.hi, d.lo),
            (self.hi, d.hi),
        ];
        Some(Interval {
            lo: pairs
                .iter()
                .map(|&(a, b)| div_dn(a, b))
                .fold(f64::INFINITY, f64::min),
            hi: pairs
                .iter()
                .map(|&(a, b)| div_up(a, b))
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Exact scaling by a power of two (no overflow or underflow expected).
    pub fn scale_pow2(self, k: f64) -> Interval {
        debug_assert!(k > 0.0 && (k.log2().fract() == 0.0));
        Interval {
            lo: self.lo * k,
            hi: self.hi * k,
        }
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Self {
        Interval::point(v)
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval::new(v[0], v[1])
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        Interval {
            lo: add_dn(self.lo, o.lo),
            hi: add_up(self.hi, o.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        if o.is_zero() {
            return self;
        }
        Interval {
            lo: add_dn(self.lo, -o.hi),
            hi: add_up(self.hi, -o.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        if self.is_zero() || o.is_zero() {
            return Interval::point(0.0);
        }
        let pairs = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        Interval {
            lo: pairs
                .iter()
                .map(|&(a, b)| mul_dn(a, b))
                .fold(f64::INFINITY, f64::min),
            hi: pairs
                .iter()
                .map(|&(a, b)| mul_up(a, b))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, o: f64) -> Interval {
        self + Interval::point(o)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, o: f64) -> Interval {
        self - Interval::point(o)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, o: f64) -> Interval {
        self * Interval::point(o)
    }
}

impl Div<f64> for Interval {
    type Output = Interval;
    /// Panics on a zero divisor; use [`Interval::checked_div`] for interval
    /// divisors.
    fn div(self, o: f64) -> Interval {
        self.checked_div(Interval::point(o))
            .expect("division by zero")
    }
}

/// Axis-aligned box of intervals, one per state coordinate.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    pub ix: Interval,
    pub iy: Interval,
    pub iz: Interval,
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} x {:?} x {:?}", self.ix, self.iy, self.iz)
    }
}

impl IntervalBox {
    pub fn new(ix: Interval, iy: Interval, iz: Interval) -> Self {
        Self { ix, iy, iz }
    }

    pub fn point(s: State) -> Self {
        Self::new(s.x.into(), s.y.into(), s.z.into())
    }

    pub fn axes(&self) -> [Interval; 3] {
        [self.ix, self.iy, self.iz]
    }

    pub fn from_axes(a: [Interval; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn axis(&self, i: usize) -> Interval {
        self.axes()[i]
    }

    pub fn with_axis(&self, i: usize, v: Interval) -> Self {
        let mut a = self.axes();
        a[i] = v;
        Self::from_axes(a)
    }

    pub fn width(&self) -> f64 {
        self.ix.width().max(self.iy.width()).max(self.iz.width())
    }

    /// Widest coordinate; ties go to the lowest index (x, then y, then z).
    pub fn widest_axis(&self) -> usize {
        let w = self.axes().map(Interval::width);
        let mut best = 0;
        for i in 1..3 {
            if w[i] > w[best] {
                best = i;
            }
        }
        best
    }

    pub fn bisect(&self, axis: usize) -> (Self, Self) {
        let (a, b) = self.axis(axis).bisect();
        (self.with_axis(axis, a), self.with_axis(axis, b))
    }

    pub fn midpoint(&self) -> State {
        State::new(self.ix.mid(), self.iy.mid(), self.iz.mid())
    }

    pub fn is_point(&self) -> bool {
        self.axes().iter().all(|i| i.is_point())
    }

    pub fn contains(&self, s: State) -> bool {
        self.ix.contains(s.x) && self.iy.contains(s.y) && self.iz.contains(s.z)
    }

    pub fn intersects(&self, o: &IntervalBox) -> bool {
        self.ix.intersects(o.ix) && self.iy.intersects(o.iy) && self.iz.intersects(o.iz)
    }

    pub fn subset_of(&self, o: &IntervalBox) -> bool {
        self.ix.subset_of(o.ix) && self.iy.subset_of(o.iy) && self.iz.subset_of(o.iz)
    }

    pub fn intersect(&self, o: &IntervalBox) -> Option<IntervalBox> {
        Some(IntervalBox::new(
            self.ix.intersect(o.ix)?,
            self.iy.intersect(o.iy)?,
            self.iz.intersect(o.iz)?,
        ))
    }

    pub fn hull(&self, o: &IntervalBox) -> IntervalBox {
        IntervalBox::new(self.ix.hull(o.ix), self.iy.hull(o.iy), self.iz.hull(o.iz))
    }
}
