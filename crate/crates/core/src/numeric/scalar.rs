use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::interval::Interval;
use super::sum::neumaier;

/// Which number system a computation ran in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    Float,
    Interval,
}

impl std::str::FromStr for ArithmeticMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(ArithmeticMode::Float),
            "interval" => Ok(ArithmeticMode::Interval),
            other => Err(format!("unknown arithmetic mode `{other}` (expected float|interval)")),
        }
    }
}

impl std::fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ArithmeticMode::Float => "float",
            ArithmeticMode::Interval => "interval",
        })
    }
}

/// Numbers the analytic pipeline can run over.
///
/// `f64` gives plain floating point with compensated sums; [`Interval`]
/// gives rigorous enclosures. Code generic over `Scalar` is written once and
/// evaluated in either mode.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: ArithmeticMode;

    /// `x` is exactly the intended value.
    fn exact(x: f64) -> Self;
    /// `x` is within `ulps` units in the last place of the intended value.
    fn approx(x: f64, ulps: u32) -> Self;
    /// A decimal literal parsed to the nearest double.
    fn decimal(x: f64) -> Self {
        Self::approx(x, 1)
    }
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: u32) -> Self;
    /// Pointwise maximum; for intervals an enclosure of `max(a, b)`.
    fn max(self, other: Self) -> Self;
    fn min(self, other: Self) -> Self;
    /// Enclosure of both operands; in float mode the first one stands in.
    fn hull(self, other: Self) -> Self;
    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self;
    /// Largest value the quantity may take.
    fn upper(self) -> f64;
    /// Smallest value the quantity may take.
    fn lower(self) -> f64;
    fn central(self) -> f64;

    fn ln2() -> Self {
        Self::approx(std::f64::consts::LN_2, 1)
    }

    fn e() -> Self {
        Self::approx(std::f64::consts::E, 1)
    }

    fn pow(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }

    fn is_positive(self) -> bool {
        self.lower() > 0.0
    }

    fn is_negative(self) -> bool {
        self.upper() < 0.0
    }
}

impl Scalar for f64 {
    const MODE: ArithmeticMode = ArithmeticMode::Float;

    fn exact(x: f64) -> Self {
        x
    }
    fn approx(x: f64, _ulps: u32) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
    fn max(self, other: Self) -> Self {
        f64::max(self, other)
    }
    fn min(self, other: Self) -> Self {
        f64::min(self, other)
    }
    fn hull(self, _other: Self) -> Self {
        self
    }
    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        neumaier(terms)
    }
    fn upper(self) -> f64 {
        self
    }
    fn lower(self) -> f64 {
        self
    }
    fn central(self) -> f64 {
        self
    }
}

impl Scalar for Interval {
    const MODE: ArithmeticMode = ArithmeticMode::Interval;

    fn exact(x: f64) -> Self {
        Interval::point(x)
    }
    fn approx(x: f64, ulps: u32) -> Self {
        Interval::around(x, ulps)
    }
    fn exp(self) -> Self {
        Interval::exp(self)
    }
    fn ln(self) -> Self {
        Interval::ln(self)
    }
    fn sqrt(self) -> Self {
        Interval::sqrt(self)
    }
    fn powi(self, n: u32) -> Self {
        Interval::powi(self, n)
    }
    fn max(self, other: Self) -> Self {
        Interval::max(self, other)
    }
    fn min(self, other: Self) -> Self {
        Interval::min(self, other)
    }
    fn hull(self, other: Self) -> Self {
        Interval::hull(self, other)
    }
    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms
            .into_iter()
            .fold(Interval::point(0.0), |acc, t| acc + t)
    }
    fn upper(self) -> f64 {
        self.hi()
    }
    fn lower(self) -> f64 {
        self.lo()
    }
    fn central(self) -> f64 {
        self.mid()
    }
}
