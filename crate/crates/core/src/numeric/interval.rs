//! Closed intervals of `f64` with outward rounding.
//!
//! Every arithmetic result is widened by one ulp on each side after the
//! hardware operation, which encloses the exact result for the correctly
//! rounded operations (`+ - * / sqrt`). The transcendental functions come
//! from the platform libm, which is not correctly rounded, so `exp` and `ln`
//! are widened by [`LIBM_ULPS`] instead.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Outward widening applied to libm results.
pub const LIBM_ULPS: u32 = 4;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn down(x: f64, ulps: u32) -> f64 {
    let mut y = x;
    for _ in 0..ulps {
        y = y.next_down();
    }
    y
}

fn up(x: f64, ulps: u32) -> f64 {
    let mut y = x;
    for _ in 0..ulps {
        y = y.next_up();
    }
    y
}

impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Panics if `lo > hi`.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Encloses a quantity known only to within `ulps` units in the last
    /// place of `x` (for instance a parsed decimal literal, `ulps = 1`).
    pub fn around(x: f64, ulps: u32) -> Self {
        Interval {
            lo: down(x, ulps),
            hi: up(x, ulps),
        }
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    /// Smallest interval containing both operands.
    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn exp(self) -> Interval {
        Interval {
            lo: down(self.lo.exp(), LIBM_ULPS).max(0.0),
            hi: up(self.hi.exp(), LIBM_ULPS),
        }
    }

    /// Natural logarithm. Nonpositive lower ends map to `-inf`.
    pub fn ln(self) -> Interval {
        if self.hi <= 0.0 {
            return Interval {
                lo: f64::NAN,
                hi: f64::NAN,
            };
        }
        let lo = if self.lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            down(self.lo.ln(), LIBM_ULPS)
        };
        Interval {
            lo,
            hi: up(self.hi.ln(), LIBM_ULPS),
        }
    }

    pub fn sqrt(self) -> Interval {
        Interval {
            lo: down(self.lo.max(0.0).sqrt(), 1).max(0.0),
            hi: up(self.hi.sqrt(), 1),
        }
    }

    pub fn square(self) -> Interval {
        if self.lo >= 0.0 {
            Interval {
                lo: down(self.lo * self.lo, 1).max(0.0),
                hi: up(self.hi * self.hi, 1),
            }
        } else if self.hi <= 0.0 {
            (-self).square()
        } else {
            let m = self.lo.abs().max(self.hi);
            Interval {
                lo: 0.0,
                hi: up(m * m, 1),
            }
        }
    }

    pub fn powi(self, n: u32) -> Interval {
        let mut base = self;
        let mut acc = Interval::point(1.0);
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: down(self.lo + rhs.lo, 1),
            hi: up(self.hi + rhs.hi, 1),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: down(self.lo - rhs.hi, 1),
            hi: up(self.hi - rhs.lo, 1),
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
    fn mul(self, rhs: Interval) -> Interval {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        if p.iter().any(|v| v.is_nan()) {
            return Interval::ENTIRE;
        }
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: down(lo, 1),
            hi: up(hi, 1),
        }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        if rhs.contains_zero() {
            return Interval::ENTIRE;
        }
        let q = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: down(lo, 1),
            hi: up(hi, 1),
        }
    }
}
