//! The two-variable reduction of the stationarity system.
//!
//! Every stationary proportion table is determined by the normalized spread
//! `phi` and the type-1 clause fraction `beta1` through two aggregates `U`
//! and `V`. This module evaluates those aggregates, the closed-form
//! proportions, the two residual equations whose common roots are the
//! stationary points, and the expectation-rate bound.

mod equations;
mod mu;
mod objective;
mod rate;

pub use equations::{
    eq1, eq1_in, eq2, eq2_in, eqb1_form, eqb1_form_in, residuals_in, Eq1Range, Eq1Variant,
};
pub use mu::{alpha_closed_form, h_weight, mu_closed_form, MuTable};
pub use objective::{objective_f1, gradient_f1, projected_gradient};
pub use rate::{
    log_g2, log_rate_constant, rate_point, rectangle_majorant, Rectangle, RectangleMajorant,
};

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::numeric::Scalar;
use crate::params::{AprioriBox, ModelParams};

/// Derived quantities of a `(phi, beta1)` pair.
#[derive(Clone, Copy, Debug)]
pub struct Aggregates<S> {
    pub phi: S,
    pub beta1: S,
    pub beta2: S,
    pub beta3: S,
    /// `3 phi − 1`
    pub x: S,
    /// `3 phi − beta1`
    pub y: S,
    /// `1 − beta1`
    pub z: S,
    pub u: S,
    pub v: S,
}

/// Computes `beta2`, `beta3`, `U` and `V`; fails where `U` or `V` is undefined
/// or `V <= 1`.
pub fn aggregates<S: Scalar>(phi: S, beta1: S) -> Result<Aggregates<S>, DomainError> {
    let one = S::exact(1.0);
    let three = S::exact(3.0);
    let beta2 = three * (one - phi) - S::exact(2.0) * beta1;
    let beta3 = beta1 - S::exact(2.0) + three * phi;
    let y = three * phi - beta1;
    let singular = |reason| DomainError::SingularPoint {
        phi: phi.central(),
        beta1: beta1.central(),
        reason,
    };
    if !y.is_positive() {
        return Err(singular("3 phi - beta1 must be positive"));
    }
    if !beta2.is_positive() {
        return Err(singular("beta2 must be positive"));
    }
    if !beta3.is_positive() {
        return Err(singular("beta3 must be positive"));
    }
    let u = S::exact(9.0) * (one - phi) * beta3 / (y * beta2);
    let v = one + beta2 * beta2 / (three * y * beta3);
    if !u.is_positive() {
        return Err(singular("U must be positive"));
    }
    Ok(Aggregates {
        phi,
        beta1,
        beta2,
        beta3,
        x: three * phi - one,
        y,
        z: one - beta1,
        u,
        v,
    })
}

/// A candidate stationary point with its derived quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiBetaPoint {
    #[serde(with = "crate::numeric::sig17")]
    pub phi: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta1: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta2: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta3: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub x: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub y: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub z: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub u: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub v: f64,
    pub feasible: bool,
}

impl PhiBetaPoint {
    pub fn new(phi: f64, beta1: f64, bounds: &AprioriBox) -> Result<Self, DomainError> {
        let a = aggregates(phi, beta1)?;
        let feasible = bounds.phi.contains(phi)
            && bounds.beta1.contains(beta1)
            && bounds.beta2.contains(a.beta2)
            && bounds.beta3.contains(a.beta3);
        Ok(PhiBetaPoint {
            phi,
            beta1,
            beta2: a.beta2,
            beta3: a.beta3,
            x: a.x,
            y: a.y,
            z: a.z,
            u: a.u,
            v: a.v,
            feasible,
        })
    }

    /// `V` through the squared form `(beta1 + 6 phi − 3)² / (3 beta3 (3 phi − beta1))`.
    pub fn v_squared_form(&self) -> f64 {
        let s = self.beta1 + 6.0 * self.phi - 3.0;
        s * s / (3.0 * self.beta3 * self.y)
    }

    pub fn aggregates(&self) -> Aggregates<f64> {
        Aggregates {
            phi: self.phi,
            beta1: self.beta1,
            beta2: self.beta2,
            beta3: self.beta3,
            x: self.x,
            y: self.y,
            z: self.z,
            u: self.u,
            v: self.v,
        }
    }
}

pub fn derive_point(phi: f64, beta1: f64, params: &ModelParams) -> Result<PhiBetaPoint, DomainError> {
    PhiBetaPoint::new(phi, beta1, &params.a_priori)
}
