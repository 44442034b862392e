use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::error::DomainError;

/// One literal occupying a cell: a 0-based variable index and a sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: u32,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        Literal { var, positive }
    }

    /// DIMACS encoding: `±(var + 1)`.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn negated(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn value(self, a: &Assignment) -> bool {
        a.get(self.var) == self.positive
    }
}

/// A formula of the ordered-clauses model: `m` clauses of three cells each.
/// Cells may repeat a variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    n: u32,
    clauses: Vec<[Literal; 3]>,
}

impl Formula {
    /// Fails if a literal names a variable outside `0..n`.
    pub fn new(n: u32, clauses: Vec<[Literal; 3]>) -> Result<Self, DomainError> {
        if let Some(l) = clauses.iter().flatten().find(|l| l.var >= n) {
            return Err(DomainError::OutOfDomain {
                name: "variable index",
                value: l.var as f64,
                domain: "0..n",
            });
        }
        Ok(Formula { n, clauses })
    }

    /// From DIMACS-style signed 1-based triples.
    pub fn from_signed(n: u32, clauses: &[[i64; 3]]) -> Result<Self, DomainError> {
        let mut out = Vec::with_capacity(clauses.len());
        for c in clauses {
            let mut cl = [Literal::new(0, true); 3];
            for (slot, &s) in cl.iter_mut().zip(c) {
                if s == 0 || s.unsigned_abs() > n as u64 {
                    return Err(DomainError::OutOfDomain {
                        name: "literal",
                        value: s as f64,
                        domain: "±1..=±n",
                    });
                }
                *slot = Literal::new((s.unsigned_abs() - 1) as u32, s > 0);
            }
            out.push(cl);
        }
        Formula::new(n, out)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn cells(&self) -> impl Iterator<Item = Literal> + '_ {
        self.clauses.iter().flatten().copied()
    }

    /// `(total, positive)` occurrence counts of every variable.
    pub fn occurrences(&self) -> Vec<(u32, u32)> {
        let mut occ = vec![(0u32, 0u32); self.n as usize];
        for l in self.cells() {
            let e = &mut occ[l.var as usize];
            e.0 += 1;
            e.1 += l.positive as u32;
        }
        occ
    }

    /// Number of true cells in each clause.
    pub fn true_counts(&self, a: &Assignment) -> Vec<u8> {
        self.clauses
            .iter()
            .map(|c| c.iter().filter(|l| l.value(a)).count() as u8)
            .collect()
    }

    pub fn satisfied_by(&self, a: &Assignment) -> bool {
        a.len() == self.n as usize && self.clauses.iter().all(|c| c.iter().any(|l| l.value(a)))
    }

    /// The same formula with the listed variables renamed (every occurrence
    /// negated).
    pub fn renamed(&self, flip: impl Fn(u32) -> bool) -> Formula {
        let clauses = self
            .clauses
            .iter()
            .map(|c| c.map(|l| if flip(l.var) { l.negated() } else { l }))
            .collect();
        Formula { n: self.n, clauses }
    }

    /// Text form: `p ocnf n m` and one clause of three signed integers per
    /// line.
    pub fn to_ocnf(&self) -> String {
        let mut s = format!("p ocnf {} {}\n", self.n, self.m());
        for c in &self.clauses {
            s.push_str(&format!("{} {} {}\n", c[0].to_dimacs(), c[1].to_dimacs(), c[2].to_dimacs()));
        }
        s
    }

    /// Parses the text form. Lines starting with `c` are comments; a clause
    /// line may end with a DIMACS-style `0`.
    pub fn from_ocnf(text: &str) -> Result<Formula, OcnfError> {
        let mut header: Option<(u32, usize)> = None;
        let mut clauses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let err = |kind| OcnfError { line: line_no, kind };
            if let Some(rest) = line.strip_prefix('p') {
                if header.is_some() {
                    return Err(err(OcnfErrorKind::DuplicateHeader));
                }
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 3 || f[0] != "ocnf" {
                    return Err(err(OcnfErrorKind::BadHeader));
                }
                let n = f[1].parse::<u32>().map_err(|_| err(OcnfErrorKind::BadHeader))?;
                let m = f[2].parse::<usize>().map_err(|_| err(OcnfErrorKind::BadHeader))?;
                header = Some((n, m));
                continue;
            }
            let Some((n, _)) = header else {
                return Err(err(OcnfErrorKind::MissingHeader));
            };
            let mut nums = Vec::with_capacity(4);
            for tok in line.split_whitespace() {
                nums.push(tok.parse::<i64>().map_err(|_| err(OcnfErrorKind::BadLiteral(tok.to_string())))?);
                if nums.len() > 4 {
                    break;
                }
            }
            if nums.len() == 4 && nums[3] == 0 {
                nums.pop();
            }
            if nums.len() != 3 {
                return Err(err(OcnfErrorKind::ClauseWidth(nums.len())));
            }
            let mut cl = [Literal::new(0, true); 3];
            for (slot, &s) in cl.iter_mut().zip(&nums) {
                if s == 0 || s.unsigned_abs() > n as u64 {
                    return Err(err(OcnfErrorKind::VariableOutOfRange(s)));
                }
                *slot = Literal::new((s.unsigned_abs() - 1) as u32, s > 0);
            }
            clauses.push(cl);
        }
        let Some((n, m)) = header else {
            return Err(OcnfError {
                line: 0,
                kind: OcnfErrorKind::MissingHeader,
            });
        };
        if clauses.len() != m {
            return Err(OcnfError {
                line: 0,
                kind: OcnfErrorKind::ClauseCount {
                    declared: m,
                    found: clauses.len(),
                },
            });
        }
        Ok(Formula { n, clauses })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ocnf())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct OcnfError {
    /// 1-based; 0 for errors about the file as a whole.
    pub line: usize,
    pub kind: OcnfErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OcnfErrorKind {
    #[error("missing `p ocnf n m` header")]
    MissingHeader,
    #[error("second header")]
    DuplicateHeader,
    #[error("malformed header, expected `p ocnf n m`")]
    BadHeader,
    #[error("not an integer literal: {0:?}")]
    BadLiteral(String),
    #[error("clause has {0} literals, expected 3")]
    ClauseWidth(usize),
    #[error("literal {0} names no variable of the header")]
    VariableOutOfRange(i64),
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
}

/// Truth values of the `n` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    /// Bit `i` of `bits` is the value of variable `i`.
    pub fn from_bits(bits: u64, n: u32) -> Self {
        Assignment((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, var: u32) -> bool {
        self.0[var as usize]
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn with_flipped(&self, var: u32) -> Self {
        let mut v = self.0.clone();
        v[var as usize] = !v[var as usize];
        Assignment(v)
    }
}

/// `round(c n)` with halves rounded up.
pub fn clause_count(n: u32, c: f64) -> Result<usize, DomainError> {
    let m = (c * n as f64 + 0.5).floor();
    if n == 0 || !(m >= 1.0) || !m.is_finite() {
        return Err(DomainError::Precondition(format!(
            "need n >= 1 and round(c n) >= 1, got n = {n}, c = {c}"
        )));
    }
    Ok(m as usize)
}

/// A uniform formula: each of the `3m` cells is an independent draw from
/// the `2n` literals. `stream` selects an independent ChaCha20 stream under
/// the same seed, so corpora can be generated in any order.
pub fn generate_stream(n: u32, c: f64, seed: u64, stream: u64) -> Result<Formula, DomainError> {
    let m = clause_count(n, c)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let two_n = 2 * n as u64;
    let mut draw = || {
        let k = rng.random_range(0..two_n);
        Literal::new((k >> 1) as u32, k & 1 == 0)
    };
    let clauses = (0..m).map(|_| [draw(), draw(), draw()]).collect();
    Ok(Formula { n, clauses })
}

pub fn generate(n: u32, c: f64, seed: u64) -> Result<Formula, DomainError> {
    generate_stream(n, c, seed, 0)
}

/// Every formula with `n` variables and `m` clauses, in lexicographic order
/// of the cell contents.
pub fn all_formulas(n: u32, m: usize) -> impl Iterator<Item = Formula> {
    let k = 2 * n as u64;
    let cells = 3 * m as u32;
    let total = k.pow(cells);
    (0..total).map(move |mut idx| {
        let mut lits = Vec::with_capacity(cells as usize);
        for _ in 0..cells {
            let d = idx % k;
            idx /= k;
            lits.push(Literal::new((d >> 1) as u32, d & 1 == 0));
        }
        lits.reverse();
        let clauses = lits.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        Formula { n, clauses }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_rule() {
        assert_eq!(clause_count(100, 4.506).unwrap(), 451);
        assert_eq!(clause_count(2, 1.25).unwrap(), 3);
        assert_eq!(clause_count(1, 1.0).unwrap(), 1);
        assert!(clause_count(1, 0.4).is_err());
        assert!(clause_count(0, 4.0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(100, 4.506, 9).unwrap();
        assert_eq!(a.m(), 451);
        assert_eq!(a.cells().count(), 1353);
        assert_eq!(a, generate(100, 4.506, 9).unwrap());
        assert_ne!(a, generate(100, 4.506, 10).unwrap());
        assert_ne!(a, generate_stream(100, 4.506, 9, 1).unwrap());
    }

    #[test]
    fn single_variable_formulas_are_uniform() {
        let mut seen = std::collections::HashMap::new();
        for seed in 0..8000 {
            *seen.entry(generate(1, 1.0, seed).unwrap()).or_insert(0u32) += 1;
        }
        assert_eq!(seen.len(), 8);
        assert!(seen.values().all(|&k| (900..1100).contains(&k)), "{seen:?}");
        assert_eq!(all_formulas(1, 1).count(), 8);
    }

    #[test]
    fn ocnf_round_trip() {
        let f = generate(7, 3.0, 1).unwrap();
        assert_eq!(Formula::from_ocnf(&f.to_ocnf()).unwrap(), f);
        let g = Formula::from_ocnf("c dup\np ocnf 2 2\n1 1 -2 0\n\n-1 2 2\n").unwrap();
        assert_eq!(g, Formula::from_signed(2, &[[1, 1, -2], [-1, 2, 2]]).unwrap());
    }

    #[test]
    fn ocnf_errors() {
        let e = |s: &str| Formula::from_ocnf(s).unwrap_err().kind;
        assert_eq!(e("1 2 3\n"), OcnfErrorKind::MissingHeader);
        assert_eq!(e(""), OcnfErrorKind::MissingHeader);
        assert_eq!(e("p cnf 2 1\n1 2 2\n"), OcnfErrorKind::BadHeader);
        assert_eq!(e("p ocnf 2 1\n1 2\n"), OcnfErrorKind::ClauseWidth(2));
        assert_eq!(e("p ocnf 2 1\n1 2 3\n"), OcnfErrorKind::VariableOutOfRange(3));
        assert_eq!(e("p ocnf 2 1\n1 0 2\n"), OcnfErrorKind::VariableOutOfRange(0));
        assert_eq!(e("p ocnf 2 2\n1 2 2\n"), OcnfErrorKind::ClauseCount { declared: 2, found: 1 });
        assert_eq!(e("p ocnf 2 1\np ocnf 2 1\n"), OcnfErrorKind::DuplicateHeader);
        assert!(matches!(e("p ocnf 2 1\n1 x 2\n"), OcnfErrorKind::BadLiteral(_)));
        assert_eq!(Formula::from_ocnf("p ocnf 2 1\n1 2 2 2\n").unwrap_err().line, 2);
    }
}
