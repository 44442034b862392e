//! Brute-force check of the combinatorial bound on the number of (formula,
//! PPS) pairs with a given occurrence profile, clause-type profile and
//! variable-type profile.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::DomainError;
use crate::numeric::exact::{binomial, factorial, ln_big};

use super::formula::{all_formulas, Assignment, Formula};
use super::pps::Compiled;

pub const ORACLE_MAX_N: u32 = 3;
pub const ORACLE_MAX_M: usize = 2;

/// Clause-type counts `(g1, g2, g3)` and the number of variables of each
/// type `(x, p, j)` with `x <= x_max`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub gamma: [u32; 3],
    pub mu: Vec<((u32, u32, u32), u32)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub signature: Signature,
    /// Variables with more than `x_max` occurrences, and their occurrences.
    pub heavy: u32,
    pub heavy_occurrences: u32,
    /// Heavy occurrences among the sole true cells of one-true clauses.
    pub sigma_hat1: i64,
    /// Heavy occurrences among all true cells.
    pub sigma1: i64,
    pub count: u64,
    pub bound: BigUint,
    pub log_bound: f64,
}

impl OracleRow {
    pub fn holds(&self) -> bool {
        BigUint::from(self.count) <= self.bound
    }

    /// `"x:p=k;..."`, the occurrence profile.
    pub fn theta_string(&self) -> String {
        let mut theta: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for &((x, p, _), k) in &self.signature.mu {
            *theta.entry((x, p)).or_default() += k;
        }
        theta.iter().map(|((x, p), k)| format!("{x}:{p}={k}")).collect::<Vec<_>>().join(";")
    }

    pub fn mu_string(&self) -> String {
        self.signature
            .mu
            .iter()
            .map(|((x, p, j), k)| format!("{x}:{p}:{j}={k}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRecord {
    pub n: u32,
    pub m: usize,
    pub x_max: u32,
    pub formulas: u64,
    /// Σ_F #PPS(F).
    pub by_formula: u64,
    /// Σ_A #{F : A is a PPS of F}.
    pub by_assignment: u64,
    /// PPS pairs in which a light variable of value 1 is never the sole true
    /// cell of a clause. This needs the variable to fill every true cell of
    /// some clause by itself, which only happens when it repeats within
    /// the clause. Such a variable has no type, and the pair is left out
    /// of the rows.
    pub untyped: u64,
    pub rows: Vec<OracleRow>,
}

impl OracleRecord {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,x_max,gamma1,gamma2,gamma3,theta,mu,heavy,sigma_hat1,sigma1,count,bound,holds\n");
        for r in &self.rows {
            let g = r.signature.gamma;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.n,
                self.m,
                self.x_max,
                g[0],
                g[1],
                g[2],
                r.theta_string(),
                r.mu_string(),
                r.heavy,
                r.sigma_hat1,
                r.sigma1,
                r.count,
                r.bound,
                r.holds()
            );
        }
        s
    }
}

fn signature(f: &Formula, bits: u32, x_max: u32) -> Option<(Signature, u32, u32)> {
    let a = Assignment::from_bits(bits as u64, f.n());
    let mut gamma = [0u32; 3];
    let mut types = vec![(0u32, 0u32, 0u32); f.n() as usize];
    for c in f.clauses() {
        let t = c.iter().filter(|l| l.value(&a)).count();
        gamma[t - 1] += 1;
        for l in c {
            let e = &mut types[l.var as usize];
            e.0 += 1;
            e.1 += l.positive as u32;
            if t == 1 && l.value(&a) {
                e.2 += 1;
            }
        }
    }
    let mut mu: BTreeMap<(u32, u32, u32), u32> = BTreeMap::new();
    let (mut heavy, mut heavy_occ) = (0, 0);
    for (v, &(x, p, q)) in types.iter().enumerate() {
        if x > x_max {
            heavy += 1;
            heavy_occ += x;
            continue;
        }
        let one = bits >> v & 1 == 1;
        if one && q == 0 {
            return None;
        }
        let j = if one { p - q } else { p + q };
        *mu.entry((x, p, j)).or_default() += 1;
    }
    Some((
        Signature {
            gamma,
            mu: mu.into_iter().collect(),
        },
        heavy,
        heavy_occ,
    ))
}

fn pow(b: &BigUint, e: u32) -> BigUint {
    num_traits::pow(b.clone(), e as usize)
}

/// `A_n B_n M1 M2 M3 eta` for one signature, with the intermediate
/// heavy-cell counts.
fn bound(n: u32, m: usize, sig: &Signature, heavy: u32, heavy_occ: u32) -> (BigUint, i64, i64) {
    let [g1, g2, g3] = sig.gamma;
    let a_n = factorial(m as u32) / (factorial(g1) * factorial(g2) * factorial(g3)) * pow(&BigUint::from(3u32), g1 + g2);

    let mut b_n = pow(&BigUint::from(2u32), heavy) * factorial(n) / factorial(heavy);
    let (mut unique, mut true_rest, mut false_cells) = (0i64, 0i64, 0i64);
    let (mut d1, mut d2, mut d3) = (BigUint::one(), BigUint::one(), BigUint::one());
    let mut true_light = 0i64;
    for &((x, p, j), k) in &sig.mu {
        b_n /= factorial(k);
        let (u, r, f) = if j < p { (p - j, j, x - p) } else { (j - p, x - j, p) };
        unique += (u * k) as i64;
        true_rest += (r * k) as i64;
        false_cells += (f * k) as i64;
        true_light += ((if j < p { p } else { x - p }) * k) as i64;
        d1 *= pow(&factorial(u), k);
        d2 *= pow(&factorial(r), k);
        d3 *= pow(&factorial(f), k);
    }
    let true_cells = (g1 + 2 * g2 + 3 * g3) as i64;
    let sigma_hat1 = g1 as i64 - unique;
    let sigma1 = true_cells - true_light;
    let fact = |v: i64| factorial(v.max(0) as u32);
    let m1 = fact(g1 as i64 - sigma_hat1) / d1;
    let m2 = fact(true_cells - g1 as i64 - sigma1 + sigma_hat1) / d2;
    let all_cells = 3 * m as i64;
    let m3 = fact(all_cells - true_cells - heavy_occ as i64 + sigma1) / d3;
    debug_assert_eq!(g1 as i64 - sigma_hat1, unique);
    debug_assert_eq!(true_cells - g1 as i64 - sigma1 + sigma_hat1, true_rest);
    debug_assert_eq!(all_cells - true_cells - heavy_occ as i64 + sigma1, false_cells);
    let eta = binomial(3 * m as u32, heavy_occ) * pow(&BigUint::from(heavy), heavy_occ);
    (a_n * b_n * m1 * m2 * m3 * eta, sigma_hat1, sigma1)
}

/// Enumerates every formula with `n <= 3` variables and `m <= 2` clauses and
/// every assignment, groups the (formula, PPS) pairs by signature, and sets
/// each group's exact size against the bound.
pub fn counting_oracle(n: u32, m: usize, x_max: u32) -> Result<OracleRecord, DomainError> {
    if n == 0 || n > ORACLE_MAX_N || m == 0 || m > ORACLE_MAX_M {
        return Err(DomainError::Precondition(format!(
            "counting oracle needs 1 <= n <= {ORACLE_MAX_N} and 1 <= m <= {ORACLE_MAX_M}, got n = {n}, m = {m}"
        )));
    }
    let mut groups: BTreeMap<Signature, (u64, u32, u32)> = BTreeMap::new();
    let (mut formulas, mut by_formula, mut untyped) = (0u64, 0u64, 0u64);
    for f in all_formulas(n, m) {
        formulas += 1;
        let comp = Compiled::new(&f)?;
        for bits in comp.assignments() {
            if comp.is_pps(bits) {
                by_formula += 1;
                match signature(&f, bits, x_max) {
                    Some((sig, heavy, heavy_occ)) => groups.entry(sig).or_insert((0, heavy, heavy_occ)).0 += 1,
                    None => untyped += 1,
                }
            }
        }
    }
    let mut by_assignment = 0u64;
    for bits in 0..1u64 << n {
        let a = Assignment::from_bits(bits, n);
        by_assignment += all_formulas(n, m)
            .filter(|f| f.satisfied_by(&a) && (0..n).all(|v| !a.get(v) || !f.satisfied_by(&a.with_flipped(v))))
            .count() as u64;
    }
    let rows = groups
        .into_iter()
        .map(|(sig, (count, heavy, heavy_occ))| {
            let (b, sigma_hat1, sigma1) = bound(n, m, &sig, heavy, heavy_occ);
            let log_bound = ln_big::<f64>(&b);
            OracleRow {
                signature: sig,
                heavy,
                heavy_occurrences: heavy_occ,
                sigma_hat1,
                sigma1,
                count,
                bound: b,
                log_bound,
            }
        })
        .collect();
    Ok(OracleRecord {
        n,
        m,
        x_max,
        formulas,
        by_formula,
        by_assignment,
        untyped,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_one_clause() {
        let r = counting_oracle(1, 1, 6).unwrap();
        assert_eq!(r.formulas, 8);
        assert_eq!(r.by_formula, r.by_assignment);
        assert_eq!(r.violations(), 0);
        // A = 0 solves the 7 formulas with a negated cell; A = 1 is a PPS of
        // the all-positive formula only
        assert_eq!(r.by_formula, 8);
    }

    #[test]
    fn bound_holds_without_heavy_variables() {
        for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let r = counting_oracle(n, m, 6).unwrap();
            assert_eq!(r.by_formula, r.by_assignment);
            assert_eq!(r.violations(), 0);
            let typed: u64 = r.rows.iter().map(|row| row.count).sum();
            assert_eq!(typed + r.untyped, r.by_formula);
            for row in &r.rows {
                assert_eq!((row.heavy, row.sigma_hat1, row.sigma1), (0, 0, 0), "{n} {m} {row:?}");
            }
        }
    }

    #[test]
    fn repeated_variable_pps_is_untyped() {
        // (x1 ∨ x1 ∨ x1) with x1 = 1 is a PPS, but x1 is never the sole true
        // cell of its clause
        let r = counting_oracle(1, 1, 6).unwrap();
        assert_eq!(r.untyped, 1);
        // a single clause over two variables repeats one of them
        assert!(counting_oracle(2, 1, 6).unwrap().untyped > 0);
    }

    #[test]
    fn bound_holds_with_heavy_variables() {
        for x_max in 0..3 {
            let r = counting_oracle(2, 2, x_max).unwrap();
            assert_eq!(r.violations(), 0);
            assert!(r.rows.iter().any(|row| row.heavy > 0));
        }
    }

    #[test]
    fn refuses_large_instances() {
        assert!(counting_oracle(4, 1, 6).is_err());
        assert!(counting_oracle(2, 3, 6).is_err());
    }

    #[test]
    fn csv_has_one_line_per_signature() {
        let r = counting_oracle(2, 1, 6).unwrap();
        assert_eq!(r.formulas, 64);
        assert_eq!(r.to_csv().lines().count(), r.rows.len() + 1);
    }
}
