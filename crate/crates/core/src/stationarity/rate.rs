use serde::{Deserialize, Serialize};

use crate::distribution::Tables;
use crate::error::DomainError;
use crate::numeric::Scalar;

use super::equations::check_v;
use super::{aggregates, Aggregates, PhiBetaPoint};

/// Axis-aligned box in the `(phi, beta1)` plane. Corners are taken as exact
/// binary numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    #[serde(with = "crate::numeric::sig17")]
    pub phi_lo: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub phi_hi: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta1_lo: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta1_hi: f64,
}

impl Rectangle {
    pub fn new(phi_lo: f64, phi_hi: f64, beta1_lo: f64, beta1_hi: f64) -> Self {
        Rectangle {
            phi_lo,
            phi_hi,
            beta1_lo,
            beta1_hi,
        }
    }

    pub fn contains(&self, phi: f64, beta1: f64) -> bool {
        self.phi_lo <= phi && phi <= self.phi_hi && self.beta1_lo <= beta1 && beta1 <= self.beta1_hi
    }

    pub fn contains_rect(&self, other: &Rectangle) -> bool {
        self.phi_lo <= other.phi_lo
            && other.phi_hi <= self.phi_hi
            && self.beta1_lo <= other.beta1_lo
            && other.beta1_hi <= self.beta1_hi
    }

    pub fn phi_width(&self) -> f64 {
        self.phi_hi - self.phi_lo
    }

    pub fn beta1_width(&self) -> f64 {
        self.beta1_hi - self.beta1_lo
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.phi_lo + self.phi_hi),
            0.5 * (self.beta1_lo + self.beta1_hi),
        )
    }
}

/// Logarithm of the point-independent factor
/// `3^c (λ/6e)^λ 2^{Σ_{x>2p} κ̃} / Π [p!(x−p)! κ̃]^{κ̃}`.
pub fn log_rate_constant<S: Scalar>(tables: &Tables<S>) -> S {
    let lambda = tables.lambda;
    let ln_lambda = lambda.ln();
    let ln_half_lambda = ln_lambda - S::ln2();
    // p!(x−p)! κ̃ = f e^{−λ} (λ/2)^x with f the unbalancing factor
    let weighted = S::sum(tables.support().map(|(x, p, kt)| {
        let f = if x > 2 * p { S::ln2() } else { S::exact(0.0) };
        kt * (f + S::exact(x as f64) * ln_half_lambda - lambda)
    }));
    tables.c * S::exact(3.0).ln()
        + lambda * (ln_lambda - S::exact(6.0).ln() - S::exact(1.0))
        + S::ln2() * tables.constants.doubled_mass
        - weighted
}

/// `Σ κ̃ ln[U^{x−2p}(V^p − 1) + V^{x−p}]`.
fn log_denominator_sum<S: Scalar>(u: S, v: S, tables: &Tables<S>) -> S {
    let ln_v = v.ln();
    let ln_uv = u.ln() - ln_v;
    let one = S::exact(1.0);
    S::sum(tables.support().map(|(x, p, kt)| {
        let r = (S::exact((x - 2 * p) as f64) * ln_uv).exp();
        let d = one + r * (one - (-(S::exact(p as f64) * ln_v)).exp());
        kt * (S::exact((x - p) as f64) * ln_v + d.ln())
    }))
}

/// `ln g2 = Σ κ̃ ln den − (K̃ − λφ) ln U − β₁ c ln(V − 1)`.
pub fn log_g2<S: Scalar>(a: &Aggregates<S>, tables: &Tables<S>) -> Result<S, DomainError> {
    check_v(a)?;
    let k = tables.constants.k_tilde;
    Ok(log_denominator_sum(a.u, a.v, tables)
        - (k - tables.lambda * a.phi) * a.u.ln()
        - a.beta1 * tables.c * (a.v - S::exact(1.0)).ln())
}

fn clause_entropy<S: Scalar>(a: &Aggregates<S>) -> S {
    let w = S::exact(3.0) * (S::exact(1.0) - a.phi);
    a.y * a.y.ln() + w * w.ln() - a.beta2 * a.beta2.ln() - a.beta3 * (S::exact(3.0) * a.beta3).ln()
}

/// Per-variable expectation rate at one point, excluding the finite-size
/// prefactors and the `(6n³)^{1/n}` factor.
pub fn rate_point(pt: &PhiBetaPoint, tables: &Tables) -> Result<f64, DomainError> {
    let a = pt.aggregates();
    let log = log_rate_constant(tables) + log_g2(&a, tables)? + tables.c * clause_entropy(&a);
    Ok(log.exp())
}

/// Supremum of `t ln t` over `[lo, hi]` (convex, so an endpoint).
fn sup_t_ln_t<S: Scalar>(lo: S, hi: S) -> S {
    (lo * lo.ln()).max(hi * hi.ln())
}

/// Supremum of `−t ln t` over `[lo, hi]` (concave, peak `1/e` at `t = 1/e`).
fn sup_neg_t_ln_t<S: Scalar>(lo: S, hi: S) -> S {
    let inv_e = (-S::exact(1.0)).exp();
    let peak = std::f64::consts::E.recip();
    if hi.upper() < peak {
        -(hi * hi.ln())
    } else if lo.lower() > peak {
        -(lo * lo.ln())
    } else {
        inv_e
    }
}

/// Upper bound of the rate over a rectangle, and the corner values it used.
#[derive(Clone, Copy, Debug)]
pub struct RectangleMajorant<S> {
    pub log_value: S,
    pub value: S,
    pub u_min: S,
    pub u_max: S,
    pub v_min: S,
    pub v_max: S,
    pub log_constant: S,
    pub log_denominators: S,
    pub u_term: S,
    pub v_term: S,
    pub clause_term: S,
}

/// Majorant of the rate over `rect`.
///
/// `U` increases and `V` decreases in each variable, so `U` ranges over its
/// values at the lower-left and upper-right corners and `V` over the same
/// corners reversed. The denominator product increases in both, the two
/// power factors are bilinear in (exponent, log base) and the clause entropy
/// splits into single-variable convex or concave pieces.
pub fn rectangle_majorant<S: Scalar>(
    rect: &Rectangle,
    tables: &Tables<S>,
) -> Result<RectangleMajorant<S>, DomainError> {
    let phi_lo = S::exact(rect.phi_lo);
    let phi_hi = S::exact(rect.phi_hi);
    let b_lo = S::exact(rect.beta1_lo);
    let b_hi = S::exact(rect.beta1_hi);
    let low = aggregates(phi_lo, b_lo)?;
    let high = aggregates(phi_hi, b_hi)?;
    check_v(&high)?;
    let (u_min, u_max) = (low.u, high.u);
    let (v_min, v_max) = (high.v, low.v);

    let log_constant = log_rate_constant(tables);
    let log_denominators = log_denominator_sum(u_max, v_max, tables);

    let k = tables.constants.k_tilde;
    let lambda = tables.lambda;
    let mut u_term: Option<S> = None;
    for phi in [phi_lo, phi_hi] {
        for u in [u_min, u_max] {
            let t = (lambda * phi - k) * u.ln();
            u_term = Some(u_term.map_or(t, |m| m.max(t)));
        }
    }
    let one = S::exact(1.0);
    let mut v_term: Option<S> = None;
    for b in [b_lo, b_hi] {
        for v in [v_min, v_max] {
            let t = -(b * tables.c * (v - one).ln());
            v_term = Some(v_term.map_or(t, |m| m.max(t)));
        }
    }

    let three = S::exact(3.0);
    let y_lo = three * phi_lo - b_hi;
    if !y_lo.is_positive() {
        return Err(DomainError::SingularPoint {
            phi: rect.phi_lo,
            beta1: rect.beta1_hi,
            reason: "3 phi - beta1 must be positive",
        });
    }
    let y_hi = three * phi_hi - b_lo;
    let w_lo = three * (one - phi_hi);
    let w_hi = three * (one - phi_lo);
    let beta2_lo = high.beta2;
    let beta2_hi = three * (one - phi_lo) - S::exact(2.0) * b_lo;
    let s_lo = three * low.beta3;
    let s_hi = three * high.beta3;
    let clause_term = sup_t_ln_t(y_lo, y_hi)
        + sup_t_ln_t(w_lo, w_hi)
        + sup_neg_t_ln_t(beta2_lo, beta2_hi)
        + sup_neg_t_ln_t(s_lo, s_hi) / three;

    let log_value = log_constant
        + log_denominators
        + u_term.expect("four corners")
        + v_term.expect("four corners")
        + tables.c * clause_term;
    Ok(RectangleMajorant {
        log_value,
        value: log_value.exp(),
        u_min,
        u_max,
        v_min,
        v_max,
        log_constant,
        log_denominators,
        u_term: u_term.unwrap(),
        v_term: v_term.unwrap(),
        clause_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Interval;
    use crate::params::ModelParams;
    use crate::stationarity::derive_point;

    #[test]
    fn degenerate_rectangle_equals_point_rate() {
        let params = ModelParams::certification();
        let tables = Tables::build(&params).unwrap();
        let (phi, b) = (0.5638322754067644, 0.4465145417054659);
        let pt = derive_point(phi, b, &params).unwrap();
        let point = rate_point(&pt, &tables).unwrap();
        let rect = rectangle_majorant(&Rectangle::new(phi, phi, b, b), &tables).unwrap();
        assert!((point - rect.value).abs() < 1e-13, "{point} vs {}", rect.value);
    }

    #[test]
    fn interval_majorant_encloses_float() {
        let params = ModelParams::certification();
        let tf = Tables::<f64>::build(&params).unwrap();
        let ti = Tables::<Interval>::build(&params).unwrap();
        let r = Rectangle::new(0.56383217, 0.56383249, 0.44651403, 0.44651478);
        let f = rectangle_majorant(&r, &tf).unwrap().value;
        let i = rectangle_majorant(&r, &ti).unwrap().value;
        assert!(i.lo() <= f && f <= i.hi(), "{f} not in {i:?}");
        assert!(i.width() < 1e-11);
    }

    #[test]
    fn sup_helpers() {
        assert_eq!(sup_t_ln_t(0.5f64, 2.0), 2.0 * 2f64.ln());
        let e_inv = std::f64::consts::E.recip();
        assert!((sup_neg_t_ln_t(0.1f64, 0.9) - e_inv).abs() < 1e-15);
        assert_eq!(sup_neg_t_ln_t(0.5f64, 0.9), -(0.5 * 0.5f64.ln()));
        assert_eq!(sup_neg_t_ln_t(0.1f64, 0.2), -(0.2 * 0.2f64.ln()));
    }
}
