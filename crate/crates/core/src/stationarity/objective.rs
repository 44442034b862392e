use crate::distribution::Tables;
use crate::error::DomainError;
use crate::numeric::neumaier;

use super::mu::{h_weight, MuTable};
use super::{aggregates, Aggregates};

fn x_ln_x(x: f64) -> f64 {
    x * x.ln()
}

fn implied_aggregates(mu: &MuTable, tables: &Tables) -> Result<Aggregates<f64>, DomainError> {
    let (phi, beta1) = mu.implied_point(tables);
    aggregates(phi, beta1)
}

fn check_positive(mu: &MuTable) -> Result<(), DomainError> {
    for (x, p, j) in mu.coordinates() {
        if mu.get(x, p, j) <= 0.0 {
            return Err(DomainError::ZeroProportion { x, p, j });
        }
    }
    Ok(())
}

/// Entropy-type objective of the constrained maximization, with `phi` and
/// `beta1` eliminated through their definitions in terms of the table.
pub fn objective_f1(mu: &MuTable, tables: &Tables) -> Result<f64, DomainError> {
    check_positive(mu)?;
    let a = implied_aggregates(mu, tables)?;
    let entropy = neumaier(mu.cells().map(|(x, p)| {
        let kt = tables.unbalanced.get(x, p);
        kt * neumaier(mu.row(x, p).iter().enumerate().map(|(j, &m)| {
            m * (h_weight(x, p, j as u32) / m).ln()
        }))
    }));
    let clause = x_ln_x(a.y) + x_ln_x(3.0 * (1.0 - a.phi)) - x_ln_x(a.beta2) - a.beta3 * (3.0 * a.beta3).ln();
    Ok(entropy + tables.c * clause)
}

/// Partial derivatives of [`objective_f1`], one row per `(x, p)` cell.
pub fn gradient_f1(mu: &MuTable, tables: &Tables) -> Result<MuTable, DomainError> {
    check_positive(mu)?;
    let a = implied_aggregates(mu, tables)?;
    let ln_u = a.u.ln();
    let ln_vm1 = (a.v - 1.0).ln();
    Ok(MuTable::from_fn(mu.x_max, |x, p, j| {
        let kt = tables.unbalanced.get(x, p);
        let m = mu.get(x, p, j);
        let base = (h_weight(x, p, j) / m).ln() - 1.0;
        if j < p {
            kt * (base + (x - 2 * p) as f64 * ln_u + (p - j) as f64 * ln_vm1)
        } else {
            kt * (base + (j - p) as f64 * ln_vm1)
        }
    }))
}

/// Gradient minus its mean over each row: the component not absorbed by the
/// row-normalization multipliers.
pub fn projected_gradient(grad: &MuTable) -> MuTable {
    let mut out = grad.clone();
    for (x, p) in grad.cells() {
        let row = grad.row(x, p);
        let mean = neumaier(row.iter().copied()) / row.len() as f64;
        for (o, g) in out.row_mut(x, p).iter_mut().zip(row) {
            *o = g - mean;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::stationarity::derive_point;

    #[test]
    fn zero_coordinate_rejected() {
        let params = ModelParams::certification();
        let tables = Tables::build(&params).unwrap();
        let pt = derive_point(0.5638, 0.4465, &params).unwrap();
        let mut mu = MuTable::closed_form(&pt, params.x_max).unwrap();
        mu.set(4, 1, 2, 0.0);
        assert_eq!(
            objective_f1(&mu, &tables),
            Err(DomainError::ZeroProportion { x: 4, p: 1, j: 2 })
        );
        assert!(gradient_f1(&mu, &tables).is_err());
    }

    #[test]
    fn projection_removes_row_constants() {
        let mut g = MuTable::from_fn(4, |x, p, _| (x * 10 + p) as f64);
        let pg = projected_gradient(&g);
        for (x, p, j) in pg.coordinates() {
            assert_eq!(pg.get(x, p, j), 0.0);
        }
        g.set(4, 1, 0, 42.0);
        let pg = projected_gradient(&g);
        assert!(pg.get(4, 1, 0) > 0.0);
    }
}
