//! Signed-occurrence distributions over the triangle `0 <= p <= x <= x_max`.
//!
//! The typical distribution gives the limiting fraction of variables with `x`
//! occurrences of which `p` are positive: a Poisson(λ) total split by a fair
//! binomial. The unbalanced distribution folds every column onto its
//! majority-negative half.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, DomainError};
use crate::numeric::exact::{ln_big, FactorialTable};
use crate::numeric::Scalar;
use crate::params::ModelParams;

/// Last `p` summed explicitly in the tail mass of balanced columns.
pub const RHO_CUTOFF_P: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Typical,
    Unbalanced,
    Measured,
}

#[inline]
pub fn tri_index(x: u32, p: u32) -> usize {
    (x as usize) * (x as usize + 1) / 2 + p as usize
}

/// Values indexed by `(x, p)` with `0 <= p <= x <= x_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct OccurrenceTable<S = f64> {
    pub kind: TableKind,
    pub x_max: u32,
    pub lambda: f64,
    entries: Vec<S>,
}

impl<S: Scalar> OccurrenceTable<S> {
    pub fn from_fn(kind: TableKind, x_max: u32, lambda: f64, mut f: impl FnMut(u32, u32) -> S) -> Self {
        let mut entries = Vec::with_capacity(tri_index(x_max + 1, 0));
        for x in 0..=x_max {
            for p in 0..=x {
                entries.push(f(x, p));
            }
        }
        OccurrenceTable {
            kind,
            x_max,
            lambda,
            entries,
        }
    }

    pub fn get(&self, x: u32, p: u32) -> S {
        assert!(p <= x && x <= self.x_max, "({x}, {p}) outside the table");
        self.entries[tri_index(x, p)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, S)> + '_ {
        (0..=self.x_max).flat_map(move |x| (0..=x).map(move |p| (x, p, self.entries[tri_index(x, p)])))
    }

    pub fn row_sum(&self, x: u32) -> S {
        S::sum((0..=x).map(|p| self.get(x, p)))
    }

    pub fn total(&self) -> S {
        S::sum(self.entries.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_index(x: u32, p: u32) -> Result<(), DomainError> {
    if p > x {
        return Err(DomainError::OccurrenceIndex { x, p });
    }
    Ok(())
}

fn ln_typical<S: Scalar>(x: u32, p: u32, lambda: S, ln_lambda: S, facts: &FactorialTable) -> S {
    let denom = facts.get(p) * facts.get(x - p);
    S::exact(x as f64) * (ln_lambda - S::ln2()) - lambda - ln_big::<S>(&denom)
}

/// Typical mass `2^{-x} C(x,p) e^{-λ} λ^x / x!`.
pub fn kappa(x: u32, p: u32, lambda: f64) -> Result<f64, DomainError> {
    check_index(x, p)?;
    let facts = FactorialTable::up_to(x);
    Ok(ln_typical::<f64>(x, p, lambda, lambda.ln(), &facts).exp())
}

/// Unbalanced mass: doubled below the diagonal `x = 2p`, kept on it, zero above.
pub fn kappa_tilde(x: u32, p: u32, lambda: f64) -> Result<f64, DomainError> {
    let k = kappa(x, p, lambda)?;
    Ok(unbalance_factor(x, p) * k)
}

#[inline]
pub fn unbalance_factor(x: u32, p: u32) -> f64 {
    use std::cmp::Ordering::*;
    match x.cmp(&(2 * p)) {
        Greater => 2.0,
        Equal => 1.0,
        Less => 0.0,
    }
}

pub fn p2(xi: f64) -> f64 {
    xi * (xi + 1.0) * (xi + 2.0) / 3.0
}

pub fn p3(xi: f64) -> f64 {
    xi * (xi + 2.0) * (2.0 * xi + 3.0) / 8.0
}

/// Number of cells in the triangle, `(x+1)(x+2)/2`.
pub fn triangle_size(x_max: u32) -> u64 {
    let x = x_max as u64;
    (x + 1) * (x + 2) / 2
}

/// Number of `(x, p, j)` unknowns with `0 <= 2p <= x <= x_max`, `0 <= j <= x`.
pub fn unknown_count(x_max: u32) -> u64 {
    let x = x_max as u64;
    (x + 2) * (4 * x * x + 13 * x + 12) / 24
}

/// Tail mass of the balanced columns beyond the truncation degree.
pub fn balanced_tail<S: Scalar>(x_max: u32, lambda: S) -> S {
    let first = x_max / 2 + 1;
    let facts = FactorialTable::up_to(RHO_CUTOFF_P.max(first));
    let ln_lambda = lambda.ln();
    let term = |p: u32| {
        let two_p = S::exact(2.0 * p as f64);
        (two_p * (ln_lambda - S::ln2()) - lambda - S::exact(2.0) * ln_big::<S>(facts.get(p))).exp()
    };
    if first > RHO_CUTOFF_P {
        return S::exact(0.0);
    }
    let partial = S::sum((first..=RHO_CUTOFF_P).map(term));
    // successive ratios λ²/(2p+2)² only shrink past the cutoff
    let edge = S::exact(2.0 * RHO_CUTOFF_P as f64 + 2.0);
    let ratio = lambda * lambda / (edge * edge);
    let tail = term(RHO_CUTOFF_P) * ratio / (S::exact(1.0) - ratio);
    partial + tail
}

/// Constants derived from the distributions and the truncation degree.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedConstants<S = f64> {
    /// Mass of balanced columns `x = 2p > x_max`.
    pub rho: S,
    /// `(x_max/2 + 1)/2`.
    pub delta: f64,
    /// Triangle size.
    pub d: u64,
    /// Unknown count of the stationarity system.
    pub n: u64,
    /// `Σ (x − p) κ̃`.
    pub k_tilde: S,
    /// `Σ_{x > 2p} κ̃`.
    pub doubled_mass: S,
    pub p2: f64,
    pub p3: f64,
}

#[derive(Clone, Debug)]
pub struct Tables<S = f64> {
    pub lambda: S,
    pub c: S,
    pub typical: OccurrenceTable<S>,
    pub unbalanced: OccurrenceTable<S>,
    pub constants: DerivedConstants<S>,
}

impl<S: Scalar> Tables<S> {
    pub fn build(params: &ModelParams) -> Result<Self, ConfigError> {
        params.validate()?;
        Ok(Self::build_unchecked(params.c, params.x_max))
    }

    /// Builds tables without the truncation-degree requirements (small toy
    /// tables in tests and the sensitivity probes use this).
    pub fn build_unchecked(c: f64, x_max: u32) -> Self {
        let c_s = S::decimal(c);
        let lambda = S::exact(3.0) * c_s;
        let lambda_f = 3.0 * c;
        let ln_lambda = lambda.ln();
        let facts = FactorialTable::up_to(x_max);
        let typical = OccurrenceTable::from_fn(TableKind::Typical, x_max, lambda_f, |x, p| {
            ln_typical(x, p, lambda, ln_lambda, &facts).exp()
        });
        let unbalanced = OccurrenceTable::from_fn(TableKind::Unbalanced, x_max, lambda_f, |x, p| {
            let f = unbalance_factor(x, p);
            if f == 0.0 {
                S::exact(0.0)
            } else {
                S::exact(f) * typical.get(x, p)
            }
        });
        let k_tilde = S::sum(
            unbalanced
                .iter()
                .filter(|&(x, p, _)| 2 * p <= x)
                .map(|(x, p, v)| S::exact((x - p) as f64) * v),
        );
        let doubled_mass = S::sum(unbalanced.iter().filter(|&(x, p, _)| x > 2 * p).map(|(_, _, v)| v));
        let constants = DerivedConstants {
            rho: balanced_tail(x_max, lambda),
            delta: 0.5 * (x_max as f64 / 2.0 + 1.0),
            d: triangle_size(x_max),
            n: unknown_count(x_max),
            k_tilde,
            doubled_mass,
            p2: p2(x_max as f64),
            p3: p3(x_max as f64),
        };
        Tables {
            lambda,
            c: c_s,
            typical,
            unbalanced,
            constants,
        }
    }

    pub fn x_max(&self) -> u32 {
        self.typical.x_max
    }

    /// `(x − 2p) κ̃`.
    pub fn h_tilde(&self, x: u32, p: u32) -> S {
        if 2 * p > x {
            return S::exact(0.0);
        }
        S::exact((x - 2 * p) as f64) * self.unbalanced.get(x, p)
    }

    /// Cells `(x, p, κ̃)` with `2p <= x`, the support of the unbalanced table.
    pub fn support(&self) -> impl Iterator<Item = (u32, u32, S)> + '_ {
        self.unbalanced.iter().filter(|&(x, p, _)| 2 * p <= x)
    }
}

pub fn build_tables(params: &ModelParams) -> Result<Tables<f64>, ConfigError> {
    Tables::build(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Interval;

    const LAMBDA: f64 = 13.518;

    #[test]
    fn kappa_at_origin_is_poisson_zero() {
        assert!((kappa(0, 0, LAMBDA).unwrap() - (-LAMBDA).exp()).abs() < 1e-20);
    }

    #[test]
    fn kappa_rejects_p_above_x() {
        assert_eq!(kappa(2, 3, LAMBDA), Err(DomainError::OccurrenceIndex { x: 2, p: 3 }));
    }

    #[test]
    fn kappa_three_one_closed_form() {
        let expected = 3.0 / 8.0 * (-LAMBDA).exp() * LAMBDA.powi(3) / 6.0;
        let got = kappa(3, 1, LAMBDA).unwrap();
        assert!((got - expected).abs() / expected < 1e-13);
    }

    #[test]
    fn kappa_tilde_cases() {
        let l = LAMBDA;
        assert_eq!(kappa_tilde(4, 1, l).unwrap(), 2.0 * kappa(4, 1, l).unwrap());
        assert_eq!(kappa_tilde(4, 2, l).unwrap(), kappa(4, 2, l).unwrap());
        assert_eq!(kappa_tilde(4, 3, l).unwrap(), 0.0);
    }

    #[test]
    fn unbalanced_column_six() {
        let t = Tables::<f64>::build_unchecked(4.506, 56);
        for p in 0..=6 {
            let want = match p {
                0..=2 => 2.0 * t.typical.get(6, p),
                3 => t.typical.get(6, 3),
                _ => 0.0,
            };
            assert_eq!(t.unbalanced.get(6, p), want, "p = {p}");
        }
    }

    #[test]
    fn exact_integer_constants() {
        assert_eq!(triangle_size(56), 1653);
        let x = 56u64;
        assert_eq!(unknown_count(56) * 24, (x + 2) * (4 * x * x + 13 * x + 12));
        // direct count of (x, p, j) with 2p <= x
        let direct: u64 = (0..=56u64).map(|x| (x / 2 + 1) * (x + 1)).sum();
        assert_eq!(unknown_count(56), direct);
        assert_eq!(p2(1.0), 2.0);
        assert_eq!(p3(1.0), 15.0 / 8.0);
    }

    #[test]
    fn build_rejects_small_truncation() {
        let p = ModelParams::at_density(4.506, 2, 1e-15);
        assert!(matches!(
            build_tables(&p),
            Err(ConfigError::TruncationBelowMean { .. })
        ));
    }

    #[test]
    fn rho_is_tiny_at_certification() {
        let t = build_tables(&ModelParams::certification()).unwrap();
        assert!(t.constants.rho > 0.0 && t.constants.rho < 1e-14);
        assert_eq!(t.constants.delta, 14.5);
    }

    #[test]
    fn interval_tables_enclose_float_tables() {
        let f = Tables::<f64>::build_unchecked(4.506, 56);
        let i = Tables::<Interval>::build_unchecked(4.506, 56);
        for (x, p, v) in f.typical.iter() {
            let e = i.typical.get(x, p);
            assert!(e.lo() <= v * (1.0 + 1e-14) && v * (1.0 - 1e-14) <= e.hi());
            assert!(e.width() <= 1e-12 * v.max(1e-300));
        }
        let k = i.constants.k_tilde;
        assert!(k.contains(f.constants.k_tilde) || (k.mid() - f.constants.k_tilde).abs() < 1e-13);
    }
}
