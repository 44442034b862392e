//! Model configuration: clause density, truncation degree, accuracy radius and
//! the a-priori box for the stationarity variables.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Closed real range `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    #[serde(with = "crate::numeric::sig17")]
    pub lo: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_range(&self, other: &Range) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn lerp(&self, t: f64) -> f64 {
        self.lo + t * (self.hi - self.lo)
    }
}

/// Bounds on the type-1, type-2 and type-3 clause fractions and the
/// nonzero spread, within which every relevant solution falls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriBox {
    pub beta1: Range,
    pub beta2: Range,
    pub beta3: Range,
    pub phi: Range,
}

impl AprioriBox {
    /// Box valid for clause densities in `[3, 5]`, before widening by the
    /// finite-size accuracy terms.
    pub const GENERAL: AprioriBox = AprioriBox {
        beta1: Range::new(0.21, 0.65),
        beta2: Range::new(0.21, 0.65),
        beta3: Range::new(0.017, 0.32),
        phi: Range::new(0.47, 0.68),
    };

    /// Tightened box at density 4.506.
    pub const CERTIFICATION: AprioriBox = AprioriBox {
        beta1: Range::new(0.33018, 0.52891),
        beta2: Range::new(0.33018, 0.52891),
        beta3: Range::new(0.077639, 0.21782),
        phi: Range::new(0.525245, 0.619063),
    };

    /// Membership in the polygon cut out by all eight bounds, with
    /// `beta2 = 3(1 − phi) − 2 beta1` and `beta3 = beta1 − 2 + 3 phi`.
    pub fn contains(&self, phi: f64, beta1: f64) -> bool {
        let beta2 = 3.0 * (1.0 - phi) - 2.0 * beta1;
        let beta3 = beta1 - 2.0 + 3.0 * phi;
        self.phi.contains(phi)
            && self.beta1.contains(beta1)
            && self.beta2.contains(beta2)
            && self.beta3.contains(beta3)
    }

    /// The `beta1` section of the polygon at fixed `phi`.
    pub fn beta1_section(&self, phi: f64) -> Option<Range> {
        let lo = self
            .beta1
            .lo
            .max((3.0 * (1.0 - phi) - self.beta2.hi) / 2.0)
            .max(2.0 - 3.0 * phi + self.beta3.lo);
        let hi = self
            .beta1
            .hi
            .min((3.0 * (1.0 - phi) - self.beta2.lo) / 2.0)
            .min(2.0 - 3.0 * phi + self.beta3.hi);
        (self.phi.contains(phi) && lo <= hi).then_some(Range::new(lo, hi))
    }

    /// The `phi` section of the polygon at fixed `beta1`.
    pub fn phi_section(&self, beta1: f64) -> Option<Range> {
        let lo = self
            .phi
            .lo
            .max(1.0 - (self.beta2.hi + 2.0 * beta1) / 3.0)
            .max((2.0 + self.beta3.lo - beta1) / 3.0);
        let hi = self
            .phi
            .hi
            .min(1.0 - (self.beta2.lo + 2.0 * beta1) / 3.0)
            .min((2.0 + self.beta3.hi - beta1) / 3.0);
        (self.beta1.contains(beta1) && lo <= hi).then_some(Range::new(lo, hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Clauses per variable.
    #[serde(with = "crate::numeric::sig17")]
    pub c: f64,
    /// Literal occurrences per variable, `3c`.
    #[serde(with = "crate::numeric::sig17")]
    pub lambda: f64,
    /// Even truncation degree for occurrence counts.
    pub x_max: u32,
    /// Accuracy radius of the typical-formula definition.
    #[serde(with = "crate::numeric::sig17")]
    pub epsilon: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub c_min: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub c_max: f64,
    pub a_priori: AprioriBox,
}

pub const CERTIFIED_DENSITY: f64 = 4.506;
/// Slack added in the pessimistic direction to every sign or inequality
/// check that feeds a verdict.
pub const DELTA_NUM: f64 = 1e-9;
pub const CERTIFIED_X_MAX: u32 = 56;
pub const CERTIFIED_EPSILON: f64 = 1e-15;

impl ModelParams {
    /// The configuration under which the bound is certified.
    pub fn certification() -> Self {
        ModelParams::at_density(CERTIFIED_DENSITY, CERTIFIED_X_MAX, CERTIFIED_EPSILON)
    }

    /// Degenerate density range `c_min = c = c_max`, with the tightened
    /// a-priori box.
    pub fn at_density(c: f64, x_max: u32, epsilon: f64) -> Self {
        ModelParams {
            c,
            lambda: 3.0 * c,
            x_max,
            epsilon,
            c_min: c,
            c_max: c,
            a_priori: AprioriBox::CERTIFICATION,
        }
    }

    /// A density range with the general a-priori box; `c` is the midpoint.
    pub fn with_range(c_min: f64, c_max: f64, x_max: u32, epsilon: f64) -> Self {
        let c = 0.5 * (c_min + c_max);
        ModelParams {
            c,
            lambda: 3.0 * c,
            x_max,
            epsilon,
            c_min,
            c_max,
            a_priori: AprioriBox::GENERAL,
        }
    }

    pub fn lambda_min(&self) -> f64 {
        3.0 * self.c_min
    }

    pub fn lambda_max(&self) -> f64 {
        3.0 * self.c_max
    }

    /// Checks every structural requirement, naming the first violated one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.c.is_finite() && self.c_min.is_finite() && self.c_max.is_finite()) {
            return Err(ConfigError::NonFinite);
        }
        if self.lambda != 3.0 * self.c {
            return Err(ConfigError::LambdaMismatch {
                c: self.c,
                lambda: self.lambda,
            });
        }
        if !(3.0 <= self.c_min && self.c_min <= self.c && self.c <= self.c_max && self.c_max <= 5.0)
        {
            return Err(ConfigError::DensityRange {
                c_min: self.c_min,
                c: self.c,
                c_max: self.c_max,
            });
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(ConfigError::Epsilon(self.epsilon));
        }
        if self.x_max % 2 != 0 {
            return Err(ConfigError::OddTruncation(self.x_max));
        }
        let lambda_max = self.lambda_max();
        if (self.x_max as f64) <= lambda_max {
            return Err(ConfigError::TruncationBelowMean {
                x_max: self.x_max,
                lambda_max,
            });
        }
        let needed = tail_truncation_requirement(self.lambda_min(), self.lambda_max());
        if (self.x_max as f64) < needed {
            return Err(ConfigError::TruncationBelowTail {
                x_max: self.x_max,
                required: needed,
            });
        }
        Ok(())
    }
}

/// `max over λ in [lo, hi] of (2λ − log 2)/(log λ − log 2)`.
///
/// The ratio is increasing for λ ≥ 2e, so above that the right end is the
/// maximum; the grid covers ranges reaching below it.
pub fn tail_truncation_requirement(lambda_lo: f64, lambda_hi: f64) -> f64 {
    let f = |l: f64| (2.0 * l - std::f64::consts::LN_2) / (l.ln() - std::f64::consts::LN_2);
    let steps = 1000;
    (0..=steps)
        .map(|i| f(lambda_lo + (lambda_hi - lambda_lo) * i as f64 / steps as f64))
        .fold(f(lambda_hi), f64::max)
}
