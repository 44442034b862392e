use crate::error::DomainError;

use super::formula::{Assignment, Formula};

/// Largest `n` for exhaustive enumeration.
pub const ENUMERATION_MAX_N: u32 = 24;

/// Clauses as pairs of bit masks `(positive vars, negative vars)`; an
/// assignment is a bit set of the variables with value 1.
#[derive(Clone, Debug)]
pub struct Compiled {
    n: u32,
    clauses: Vec<(u32, u32)>,
}

impl Compiled {
    pub fn new(f: &Formula) -> Result<Self, DomainError> {
        if f.n() > ENUMERATION_MAX_N {
            return Err(DomainError::Precondition(format!(
                "exhaustive enumeration needs n <= {ENUMERATION_MAX_N}, got n = {}",
                f.n()
            )));
        }
        let clauses = f
            .clauses()
            .iter()
            .map(|c| {
                c.iter().fold((0u32, 0u32), |(p, q), l| {
                    if l.positive {
                        (p | 1 << l.var, q)
                    } else {
                        (p, q | 1 << l.var)
                    }
                })
            })
            .collect();
        Ok(Compiled { n: f.n(), clauses })
    }

    pub fn satisfied(&self, bits: u32) -> bool {
        self.clauses.iter().all(|&(p, q)| bits & p != 0 || !bits & q != 0)
    }

    /// Satisfied, and no variable with value 1 can be flipped to 0 alone.
    pub fn is_pps(&self, bits: u32) -> bool {
        self.satisfied(bits) && (0..self.n).all(|v| bits >> v & 1 == 0 || !self.satisfied(bits & !(1 << v)))
    }

    pub fn assignments(&self) -> impl Iterator<Item = u32> {
        0..(1u32 << self.n)
    }
}

fn check_len(f: &Formula, a: &Assignment) -> Result<(), DomainError> {
    if a.len() != f.n() as usize {
        return Err(DomainError::Precondition(format!(
            "assignment has {} values for {} variables",
            a.len(),
            f.n()
        )));
    }
    Ok(())
}

fn bits_of(f: &Formula, a: &Assignment) -> Result<u32, DomainError> {
    check_len(f, a)?;
    Ok(a.values().iter().enumerate().fold(0, |b, (i, &v)| b | (v as u32) << i))
}

/// Whether `a` is a positively prime solution of `f`.
pub fn is_pps(f: &Formula, a: &Assignment) -> Result<bool, DomainError> {
    check_len(f, a)?;
    if f.n() <= ENUMERATION_MAX_N {
        return Ok(Compiled::new(f)?.is_pps(bits_of(f, a)?));
    }
    Ok(f.satisfied_by(a) && (0..f.n()).all(|v| !a.get(v) || !f.satisfied_by(&a.with_flipped(v))))
}

/// Solution and PPS counts from plain `2^n` enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub solutions: u64,
    pub pps: u64,
}

pub fn census(f: &Formula) -> Result<Census, DomainError> {
    let c = Compiled::new(f)?;
    let mut out = Census::default();
    for bits in c.assignments() {
        if c.satisfied(bits) {
            out.solutions += 1;
            out.pps += c.is_pps(bits) as u64;
        }
    }
    Ok(out)
}

pub fn enumerate_pps(f: &Formula) -> Result<u64, DomainError> {
    census(f).map(|c| c.pps)
}

/// Every PPS of `f`.
pub fn pps_list(f: &Formula) -> Result<Vec<Assignment>, DomainError> {
    let c = Compiled::new(f)?;
    Ok(c.assignments()
        .filter(|&b| c.is_pps(b))
        .map(|b| Assignment::from_bits(b as u64, f.n()))
        .collect())
}

/// Type `(x, p, j)` of variable `v` under the solution `a`: `x` and `p`
/// count its occurrences, and `|p − j|` of them are the only true cell of
/// their clause, with `j < p` exactly when `v` has value 1.
pub fn variable_type(f: &Formula, a: &Assignment, v: u32) -> Result<(u32, u32, u32), DomainError> {
    if a.len() != f.n() as usize || !f.satisfied_by(a) {
        return Err(DomainError::NotASolution);
    }
    if v >= f.n() {
        return Err(DomainError::OutOfDomain {
            name: "variable index",
            value: v as f64,
            domain: "0..n",
        });
    }
    let (mut x, mut p, mut q) = (0, 0, 0);
    for (clause, &t) in f.clauses().iter().zip(&f.true_counts(a)) {
        for l in clause.iter().filter(|l| l.var == v) {
            x += 1;
            p += l.positive as u32;
            if t == 1 && l.value(a) {
                q += 1;
            }
        }
    }
    let j = if a.get(v) { p - q } else { p + q };
    Ok((x, p, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u32, c: &[[i64; 3]]) -> Formula {
        Formula::from_signed(n, c).unwrap()
    }

    fn a(v: &[u8]) -> Assignment {
        Assignment::new(v.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn pps_examples() {
        assert!(is_pps(&f(1, &[[1, 1, 1]]), &a(&[1])).unwrap());
        assert!(!is_pps(&f(2, &[[1, 2, 2]]), &a(&[1, 1])).unwrap());
        assert!(is_pps(&f(1, &[[-1, -1, -1]]), &a(&[0])).unwrap());
        assert!(is_pps(&f(1, &[[1, 1, 1]]), &a(&[1, 0])).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_pps(&f(2, &[[1, 2, 2]])).unwrap(), 2);
        assert_eq!(enumerate_pps(&f(1, &[[1, 1, 1]])).unwrap(), 1);
        let unsat: Vec<[i64; 3]> = (0..8)
            .map(|s| [1, 2, 3].map(|v: i64| if s >> (v - 1) & 1 == 1 { -v } else { v }))
            .collect();
        let u = f(3, &unsat);
        assert_eq!(census(&u).unwrap(), Census { solutions: 0, pps: 0 });
        assert_eq!(pps_list(&f(2, &[[1, 2, 2]])).unwrap(), vec![a(&[1, 0]), a(&[0, 1])]);
    }

    #[test]
    fn enumeration_guard() {
        let big = Formula::new(25, vec![]).unwrap();
        assert!(matches!(enumerate_pps(&big), Err(DomainError::Precondition(_))));
    }

    #[test]
    fn type_examples() {
        // v pure positive, the only true literal in both its clauses
        let g = f(2, &[[1, -2, -2], [1, -2, -2]]);
        assert_eq!(variable_type(&g, &a(&[1, 1]), 0).unwrap(), (2, 2, 0));
        // v = 0 with one positive and two negated occurrences, one of which
        // is the sole true cell
        let h = f(3, &[[-1, 2, 2], [1, 2, 3], [-1, -2, 3]]);
        let s = a(&[0, 0, 1]);
        assert!(h.satisfied_by(&s));
        assert_eq!(variable_type(&h, &s, 0).unwrap(), (3, 1, 2));
        assert_eq!(variable_type(&h, &a(&[1, 0, 0]), 0), Err(DomainError::NotASolution));
    }
}
