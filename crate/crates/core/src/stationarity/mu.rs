use crate::distribution::{tri_index, Tables};
use crate::error::DomainError;
use crate::numeric::exact::{binomial, to_f64};
use crate::numeric::neumaier;

use super::equations::check_v;
use super::{Aggregates, PhiBetaPoint};

/// Number of ways to pick which occurrences of a type-`(x, p, j)` variable
/// are the unique true literal of their clause: `C(p, j)` below `p`,
/// `C(x−p, j−p)` from `p` on.
pub fn h_weight(x: u32, p: u32, j: u32) -> f64 {
    if j < p {
        to_f64(&binomial(p, j))
    } else {
        to_f64(&binomial(x - p, j - p))
    }
}

fn ln_h(x: u32, p: u32, j: u32) -> f64 {
    h_weight(x, p, j).ln()
}

/// Closed-form stationary proportion of type-`(x, p, j)` variables.
pub fn mu_closed_form(x: u32, p: u32, j: u32, pt: &PhiBetaPoint) -> Result<f64, DomainError> {
    if 2 * p > x || j > x {
        return Err(DomainError::Precondition(format!(
            "need 2p <= x and j <= x, got x = {x}, p = {p}, j = {j}"
        )));
    }
    let a = pt.aggregates();
    check_v(&a)?;
    Ok(row_closed_form(x, p, &a)[j as usize])
}

/// One row of proportions, computed relative to `V^{x−p}` so that nothing
/// overflows.
fn row_closed_form(x: u32, p: u32, a: &Aggregates<f64>) -> Vec<f64> {
    let ln_u = a.u.ln();
    let ln_v = a.v.ln();
    let ln_vm1 = (a.v - 1.0).ln();
    let d = (x - 2 * p) as f64;
    let r = (d * (ln_u - ln_v)).exp();
    let ln_den = (1.0 + r * (1.0 - (-(p as f64) * ln_v).exp())).ln();
    (0..=x)
        .map(|j| {
            let ln_num = if j < p {
                ln_h(x, p, j) + d * ln_u + (p - j) as f64 * ln_vm1 - (x - p) as f64 * ln_v
            } else {
                ln_h(x, p, j) + (j - p) as f64 * ln_vm1 - (x - p) as f64 * ln_v
            };
            (ln_num - ln_den).exp()
        })
        .collect()
}

/// Proportions `mu(x, p, j)` over `0 <= 2p <= x <= x_max`, `0 <= j <= x`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuTable {
    pub x_max: u32,
    rows: Vec<Vec<f64>>,
}

impl MuTable {
    pub fn from_fn(x_max: u32, mut f: impl FnMut(u32, u32, u32) -> f64) -> Self {
        let mut rows = Vec::with_capacity(tri_index(x_max + 1, 0));
        for x in 0..=x_max {
            for p in 0..=x {
                if 2 * p <= x {
                    rows.push((0..=x).map(|j| f(x, p, j)).collect());
                } else {
                    rows.push(Vec::new());
                }
            }
        }
        MuTable { x_max, rows }
    }

    pub fn closed_form(pt: &PhiBetaPoint, x_max: u32) -> Result<Self, DomainError> {
        let a = pt.aggregates();
        check_v(&a)?;
        let mut rows = Vec::with_capacity(tri_index(x_max + 1, 0));
        for x in 0..=x_max {
            for p in 0..=x {
                rows.push(if 2 * p <= x {
                    row_closed_form(x, p, &a)
                } else {
                    Vec::new()
                });
            }
        }
        Ok(MuTable { x_max, rows })
    }

    pub fn row(&self, x: u32, p: u32) -> &[f64] {
        &self.rows[tri_index(x, p)]
    }

    pub fn row_mut(&mut self, x: u32, p: u32) -> &mut [f64] {
        &mut self.rows[tri_index(x, p)]
    }

    pub fn get(&self, x: u32, p: u32, j: u32) -> f64 {
        self.row(x, p)[j as usize]
    }

    pub fn set(&mut self, x: u32, p: u32, j: u32, v: f64) {
        self.row_mut(x, p)[j as usize] = v;
    }

    /// `(x, p)` pairs with `2p <= x`.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> {
        let x_max = self.x_max;
        (0..=x_max).flat_map(|x| (0..=x / 2).map(move |p| (x, p)))
    }

    pub fn coordinates(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.cells().flat_map(|(x, p)| (0..=x).map(move |j| (x, p, j)))
    }

    pub fn row_sum(&self, x: u32, p: u32) -> f64 {
        neumaier(self.row(x, p).iter().copied())
    }

    /// `Σ_{j<p} mu`.
    pub fn alpha(&self, x: u32, p: u32) -> f64 {
        neumaier(self.row(x, p)[..p as usize].iter().copied())
    }

    /// `(phi, beta1)` implied by the table through the spread and type-1
    /// clause-fraction definitions.
    pub fn implied_point(&self, tables: &Tables) -> (f64, f64) {
        let k_tilde = tables.constants.k_tilde;
        let h_alpha = neumaier(self.cells().map(|(x, p)| tables.h_tilde(x, p) * self.alpha(x, p)));
        let phi = (k_tilde - h_alpha) / tables.lambda;
        let unique = neumaier(self.cells().map(|(x, p)| {
            let kt = tables.unbalanced.get(x, p);
            kt * neumaier(
                self.row(x, p)
                    .iter()
                    .enumerate()
                    .map(|(j, &m)| (p as f64 - j as f64).abs() * m),
            )
        }));
        (phi, unique / tables.c)
    }
}

/// `U^{x−2p}(V^p−1) / (U^{x−2p}(V^p−1) + V^{x−p})`.
pub fn alpha_closed_form(x: u32, p: u32, pt: &PhiBetaPoint) -> f64 {
    let ln_v = pt.v.ln();
    let r = ((x - 2 * p) as f64 * (pt.u.ln() - ln_v)).exp();
    let t = r * (1.0 - (-(p as f64) * ln_v).exp());
    t / (1.0 + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::stationarity::derive_point;

    fn center() -> PhiBetaPoint {
        derive_point(0.56383233, 0.44651440, &ModelParams::certification()).unwrap()
    }

    #[test]
    fn h_weight_branches() {
        assert_eq!(h_weight(7, 3, 1), 3.0);
        assert_eq!(h_weight(7, 3, 5), 6.0);
        assert_eq!(h_weight(56, 0, 28), 7648690600760440.0);
    }

    #[test]
    fn p_zero_row_is_binomial() {
        let pt = center();
        let q = (pt.v - 1.0) / pt.v;
        for j in 0..=9 {
            let b = h_weight(9, 0, j) * q.powi(j as i32) * (1.0 - q).powi(9 - j as i32);
            let m = mu_closed_form(9, 0, j, &pt).unwrap();
            assert!((m - b).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn row_sums_to_one_against_denominator_identity() {
        let pt = center();
        let (x, p) = (5u32, 2u32);
        // direct numerators over the unnormalized denominator
        let den = pt.u.powi(1) * (pt.v.powi(2) - 1.0) + pt.v.powi(3);
        let mut total = 0.0;
        for j in 0..=x {
            let num = if j < p {
                h_weight(x, p, j) * pt.u * (pt.v - 1.0).powi((p - j) as i32)
            } else {
                h_weight(x, p, j) * (pt.v - 1.0).powi((j - p) as i32)
            };
            let m = mu_closed_form(x, p, j, &pt).unwrap();
            assert!((m - num / den).abs() < 1e-14);
            total += num;
        }
        assert!((total / den - 1.0).abs() < 1e-14);
    }

    #[test]
    fn alpha_matches_partial_sum() {
        let pt = center();
        let t = MuTable::closed_form(&pt, 56).unwrap();
        for (x, p) in [(5u32, 2u32), (20, 3), (56, 28), (9, 0)] {
            assert!((t.alpha(x, p) - alpha_closed_form(x, p, &pt)).abs() < 1e-13);
        }
        assert_eq!(t.alpha(30, 0), 0.0);
    }

    #[test]
    fn bad_indices_rejected() {
        let pt = center();
        assert!(mu_closed_form(3, 2, 0, &pt).is_err());
        assert!(mu_closed_form(3, 1, 4, &pt).is_err());
    }
}
