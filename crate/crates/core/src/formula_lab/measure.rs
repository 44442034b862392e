use crate::distribution::{tri_index, OccurrenceTable};
use crate::error::DomainError;

use super::formula::Formula;

/// Occurrence census of one formula: how many variables have `x` total and
/// `p` positive occurrences, for `x <= x_cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredOmega {
    pub x_cap: u32,
    pub n: u32,
    counts: Vec<u64>,
    /// Variables with more than `x_cap` occurrences.
    pub heavy_count: u64,
    /// Total occurrences of the heavy variables.
    pub heavy_occurrences: u64,
}

impl MeasuredOmega {
    pub fn count(&self, x: u32, p: u32) -> u64 {
        if p > x || x > self.x_cap {
            return 0;
        }
        self.counts[tri_index(x, p)]
    }

    /// `omega_{x,p}`, the proportion of variables in cell `(x, p)`.
    pub fn omega(&self, x: u32, p: u32) -> f64 {
        self.count(x, p) as f64 / self.n as f64
    }

    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        (0..=self.x_cap).flat_map(move |x| (0..=x).map(move |p| (x, p, self.count(x, p))))
    }

    /// `tau`: proportion of heavy variables.
    pub fn heavy_fraction(&self) -> f64 {
        self.heavy_count as f64 / self.n as f64
    }

    /// `sum counts + heavy = n`, `sum x counts + heavy occurrences = 3m`.
    pub fn balanced(&self, m: usize) -> bool {
        let vars: u64 = self.counts.iter().sum::<u64>() + self.heavy_count;
        let occ: u64 = self.cells().map(|(x, _, k)| x as u64 * k).sum::<u64>() + self.heavy_occurrences;
        vars == self.n as u64 && occ == 3 * m as u64
    }
}

pub fn measure_omega(f: &Formula, x_cap: u32) -> MeasuredOmega {
    let mut counts = vec![0u64; tri_index(x_cap, x_cap) + 1];
    let (mut heavy_count, mut heavy_occurrences) = (0, 0);
    for (x, p) in f.occurrences() {
        if x > x_cap {
            heavy_count += 1;
            heavy_occurrences += x as u64;
        } else {
            counts[tri_index(x, p)] += 1;
        }
    }
    MeasuredOmega {
        x_cap,
        n: f.n(),
        counts,
        heavy_count,
        heavy_occurrences,
    }
}

/// Whether every proportion `omega_{x,p}`, `x <= x_cap`, lies within `eps`
/// of the table entry.
pub fn obeys<S: crate::numeric::Scalar>(
    f: &Formula,
    table: &OccurrenceTable<S>,
    eps: f64,
    x_cap: u32,
) -> Result<bool, DomainError> {
    if table.x_max < x_cap {
        return Err(DomainError::Precondition(format!(
            "table stops at x = {}, below x_cap = {x_cap}",
            table.x_max
        )));
    }
    let w = measure_omega(f, x_cap);
    let inside = w.cells().all(|(x, p, _)| {
        let xi = table.get(x, p);
        let o = w.omega(x, p);
        xi.lower() - eps <= o && o <= xi.upper() + eps
    });
    Ok(inside)
}

/// Variables whose positive and negative occurrence counts differ. Absent
/// variables are balanced.
pub fn count_unbalanced(f: &Formula) -> u32 {
    f.occurrences().iter().filter(|&&(x, p)| 2 * p != x).count() as u32
}

/// `F⁻`: renames exactly the variables with more positive than negative
/// occurrences.
pub fn totally_unbalanced_representative(f: &Formula) -> Formula {
    let occ = f.occurrences();
    f.renamed(|v| {
        let (x, p) = occ[v as usize];
        2 * p > x
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{kappa, TableKind};

    fn f(n: u32, c: &[[i64; 3]]) -> Formula {
        Formula::from_signed(n, c).unwrap()
    }

    #[test]
    fn single_clause_census() {
        let w = measure_omega(&f(2, &[[1, 1, -1]]), 6);
        assert_eq!(w.count(3, 2), 1);
        assert_eq!(w.count(0, 0), 1);
        assert!(w.balanced(1));
        let h = measure_omega(&f(2, &[[1, 1, -1]]), 2);
        assert_eq!((h.heavy_count, h.heavy_occurrences), (1, 3));
        assert!(h.balanced(1));
    }

    #[test]
    fn obeys_extremes() {
        let t = OccurrenceTable::from_fn(TableKind::Typical, 6, 13.518, |x, p| kappa(x, p, 13.518).unwrap());
        let g = super::super::formula::generate(50, 4.506, 3).unwrap();
        assert!(obeys(&g, &t, 1.0, 6).unwrap());
        assert!(!obeys(&g, &t, 0.0, 6).unwrap());
        assert!(obeys(&g, &t, 0.0, 7).is_err());
    }

    #[test]
    fn representative_examples() {
        assert_eq!(totally_unbalanced_representative(&f(2, &[[1, 1, -2]])), f(2, &[[-1, -1, -2]]));
        let none = f(2, &[[1, -1, 2], [-2, 1, -1]]);
        assert_eq!(count_unbalanced(&none), 0);
        assert_eq!(totally_unbalanced_representative(&none), none);
        assert_eq!(count_unbalanced(&f(3, &[[1, -1, 2]])), 1);
    }
}
