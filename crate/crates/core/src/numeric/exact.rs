//! Exact integer combinatorics and rigorous logarithms of big integers.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::scalar::Scalar;

pub fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Factorials `0!..=n!`, built once and indexed.
#[derive(Clone, Debug)]
pub struct FactorialTable {
    values: Vec<BigUint>,
}

impl FactorialTable {
    pub fn up_to(n: u32) -> Self {
        let mut values = Vec::with_capacity(n as usize + 1);
        let mut acc = BigUint::one();
        values.push(acc.clone());
        for k in 1..=n {
            acc *= k;
            values.push(acc.clone());
        }
        FactorialTable { values }
    }

    pub fn get(&self, n: u32) -> &BigUint {
        &self.values[n as usize]
    }

    pub fn max(&self) -> u32 {
        (self.values.len() - 1) as u32
    }
}

/// Natural logarithm of a positive big integer, enclosed in `S`.
///
/// Values wider than 64 bits are truncated to their top 64 bits `m` and a
/// power of two; the logarithm then lies between `ln m + s ln 2` and
/// `ln(m + 1) + s ln 2`.
pub fn ln_big<S: Scalar>(v: &BigUint) -> S {
    assert!(!v.is_zero(), "logarithm of zero");
    let bits = v.bits();
    if bits <= 64 {
        let m = v.to_u64().expect("fits in 64 bits");
        return S::approx(m as f64, 1).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_u64().expect("top 64 bits");
    let mant = S::approx(top as f64, 1)
        .ln()
        .hull(S::approx(top as f64 + 1.0, 1).ln());
    mant + S::exact(shift as f64) * S::ln2()
}

pub fn to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Interval;

    #[test]
    fn small_factorials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(5), BigUint::from(120u32));
        let t = FactorialTable::up_to(20);
        assert_eq!(t.get(20).to_u64(), Some(2_432_902_008_176_640_000));
    }

    #[test]
    fn factorial_56_needs_about_250_bits() {
        let f = factorial(56);
        assert!(f.bits() > 240 && f.bits() < 260);
    }

    #[test]
    fn binomial_row() {
        let row: Vec<u64> = (0..=6).map(|k| binomial(6, k).to_u64().unwrap()).collect();
        assert_eq!(row, vec![1, 6, 15, 20, 15, 6, 1]);
        assert_eq!(binomial(3, 4), BigUint::zero());
    }

    #[test]
    fn ln_of_large_factorial_matches_sum_of_logs() {
        let n = 400u32;
        let f = factorial(n);
        let direct: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        let approx: f64 = ln_big::<f64>(&f);
        assert!((approx - direct).abs() / direct < 1e-13);
        let enc: Interval = ln_big(&f);
        assert!(enc.lo() <= direct * (1.0 + 1e-13) && enc.hi() >= direct * (1.0 - 1e-13));
    }
}
