use crate::distribution::Tables;
use crate::error::DomainError;
use crate::numeric::Scalar;

use super::{aggregates, Aggregates, PhiBetaPoint};

/// Which off-diagonal families enter the first equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eq1Variant {
    Full,
    /// Drops the `x = 2p + 1` terms.
    WithoutFirstOffDiagonal,
    /// Drops the `x = 2p + 1` and `x = 2p + 2` terms.
    WithoutTwoOffDiagonals,
}

impl Eq1Variant {
    fn keeps(self, x: u32, p: u32) -> bool {
        match self {
            Eq1Variant::Full => true,
            Eq1Variant::WithoutFirstOffDiagonal => x > 2 * p + 1,
            Eq1Variant::WithoutTwoOffDiagonals => x > 2 * p + 2,
        }
    }
}

/// Summation range of the first equation. The diagonal `x = 2p` terms carry a
/// zero factor, so both ranges give the same value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eq1Range {
    OffDiagonal,
    WithDiagonal,
}

/// `(U/V)^{x−2p} (1 − V^{−p})`, the ratio of the `j < p` mass to the `j >= p`
/// mass of one row.
fn split_ratio<S: Scalar>(x: u32, p: u32, ln_uv: S, ln_v: S) -> S {
    let d = S::exact((x - 2 * p) as f64);
    let pp = S::exact(p as f64);
    (d * ln_uv).exp() * (S::exact(1.0) - (-(pp * ln_v)).exp())
}

pub(crate) fn check_v<S: Scalar>(a: &Aggregates<S>) -> Result<(), DomainError> {
    if a.v.lower() <= 1.0 {
        return Err(DomainError::VNotAboveOne(a.v.central()));
    }
    Ok(())
}

/// First equation residual `K̃ − λφ − Σ κ̃ (x−2p) t/(1+t)`.
pub fn eq1_in<S: Scalar>(
    a: &Aggregates<S>,
    tables: &Tables<S>,
    variant: Eq1Variant,
    range: Eq1Range,
) -> Result<S, DomainError> {
    check_v(a)?;
    let ln_v = a.v.ln();
    let ln_uv = a.u.ln() - ln_v;
    let one = S::exact(1.0);
    let sum = S::sum(
        tables
            .support()
            .filter(|&(x, p, _)| match range {
                Eq1Range::OffDiagonal => x > 2 * p,
                Eq1Range::WithDiagonal => true,
            })
            .filter(|&(x, p, _)| variant.keeps(x, p))
            .map(|(x, p, kt)| {
                let t = split_ratio(x, p, ln_uv, ln_v);
                kt * S::exact((x - 2 * p) as f64) * (t / (one + t))
            }),
    );
    Ok(tables.constants.k_tilde - tables.lambda * a.phi - sum)
}

/// Second equation residual in its reduced form
/// `−β₁c + λφ(1 − 1/V) + Σ_{p>=1} p κ̃ (V−1)/(V(V^p−1)) t/(1+t)`.
pub fn eq2_in<S: Scalar>(a: &Aggregates<S>, tables: &Tables<S>) -> Result<S, DomainError> {
    check_v(a)?;
    let ln_v = a.v.ln();
    let ln_uv = a.u.ln() - ln_v;
    let one = S::exact(1.0);
    let vm1_over_v = (a.v - one) / a.v;
    let sum = S::sum(tables.support().filter(|&(_, p, _)| p >= 1).map(|(x, p, kt)| {
        let t = split_ratio(x, p, ln_uv, ln_v);
        let vp_m1 = (S::exact(p as f64) * ln_v).exp() - one;
        S::exact(p as f64) * kt * vm1_over_v / vp_m1 * (t / (one + t))
    }));
    Ok(-a.beta1 * tables.c + tables.lambda * a.phi * vm1_over_v + sum)
}

/// Second equation in its original form
/// `(V−1)/V Σ κ̃ (p U^{x−2p} V^p + (x−p) V^{x−p}) / den − β₁c`.
pub fn eqb1_form_in<S: Scalar>(a: &Aggregates<S>, tables: &Tables<S>) -> Result<S, DomainError> {
    check_v(a)?;
    let ln_v = a.v.ln();
    let ln_uv = a.u.ln() - ln_v;
    let one = S::exact(1.0);
    let sum = S::sum(tables.support().map(|(x, p, kt)| {
        let r = (S::exact((x - 2 * p) as f64) * ln_uv).exp();
        let d = one + split_ratio(x, p, ln_uv, ln_v);
        kt * (S::exact(p as f64) * r + S::exact((x - p) as f64)) / d
    }));
    Ok((a.v - one) / a.v * sum - a.beta1 * tables.c)
}

pub fn eq1(pt: &PhiBetaPoint, tables: &Tables) -> Result<f64, DomainError> {
    eq1_in(&pt.aggregates(), tables, Eq1Variant::Full, Eq1Range::OffDiagonal)
}

pub fn eq2(pt: &PhiBetaPoint, tables: &Tables) -> Result<f64, DomainError> {
    eq2_in(&pt.aggregates(), tables)
}

pub fn eqb1_form(pt: &PhiBetaPoint, tables: &Tables) -> Result<f64, DomainError> {
    eqb1_form_in(&pt.aggregates(), tables)
}

/// Residuals at `(phi, beta1)` in any arithmetic.
pub fn residuals_in<S: Scalar>(phi: S, beta1: S, tables: &Tables<S>) -> Result<(S, S), DomainError> {
    let a = aggregates(phi, beta1)?;
    Ok((
        eq1_in(&a, tables, Eq1Variant::Full, Eq1Range::OffDiagonal)?,
        eq2_in(&a, tables)?,
    ))
}
