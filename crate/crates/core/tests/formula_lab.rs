use std::collections::{BTreeMap, HashMap, HashSet};

use proptest::prelude::*;
use sat3bound::distribution::{kappa, OccurrenceTable, TableKind};
use sat3bound::formula_lab::*;

fn f(n: u32, c: &[[i64; 3]]) -> Formula {
    Formula::from_signed(n, c).unwrap()
}

fn formula_strategy(max_n: u32, max_m: usize) -> impl Strategy<Value = Formula> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        let lit = (1..=n as i64, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        prop::collection::vec([lit.clone(), lit.clone(), lit], m).prop_map(move |c| Formula::from_signed(n, &c).unwrap())
    })
}

/// Flip test straight from the definition, with no bit tricks.
fn pps_by_definition(f: &Formula, a: &Assignment) -> bool {
    f.satisfied_by(a) && (0..f.n()).all(|v| !a.get(v) || !f.satisfied_by(&a.with_flipped(v)))
}

#[test]
fn generator_examples() {
    let g = generate(100, 4.506, 9).unwrap();
    assert_eq!(g.m(), 451);
    assert_eq!(g.cells().count(), 1353);
    assert_eq!(g, generate(100, 4.506, 9).unwrap());
    assert_ne!(g, generate(100, 4.506, 10).unwrap());
    assert_eq!(clause_count(2, 0.25).unwrap(), 1);
}

#[test]
fn one_variable_formulas_are_uniform() {
    let draws = 16_000u64;
    let mut counts: HashMap<Formula, u64> = HashMap::new();
    for s in 0..draws {
        *counts.entry(generate_stream(1, 1.0, 77, s).unwrap()).or_default() += 1;
    }
    assert_eq!(counts.len(), 8);
    let expected = draws as f64 / 8.0;
    let chi2: f64 = counts.values().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom, 0.999 quantile 24.3
    assert!(chi2 < 24.3, "chi2 = {chi2}");
}

#[test]
fn measured_means_track_kappa() {
    let (n, c) = (100_000, 4.506);
    let m = clause_count(n, c).unwrap();
    let lambda = 3.0 * m as f64 / n as f64;
    let runs = 200;
    let mut sum: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for s in 0..runs {
        let w = measure_omega(&generate_stream(n, c, 2024, s).unwrap(), 8);
        assert!(w.balanced(m));
        for (x, p, _) in w.cells() {
            *sum.entry((x, p)).or_default() += w.omega(x, p);
        }
    }
    for ((x, p), s) in sum {
        let k = kappa(x, p, lambda).unwrap();
        assert!((s / runs as f64 - k).abs() < 0.003, "({x},{p}) {} vs {k}", s / runs as f64);
    }
}

#[test]
fn random_formulas_obey_kappa_at_one_percent() {
    let lambda = 3.0 * 4.506;
    let table = OccurrenceTable::from_fn(TableKind::Typical, 6, lambda, |x, p| kappa(x, p, lambda).unwrap());
    let seeds = 100;
    let good = (0..seeds)
        .filter(|&s| obeys(&generate_stream(100_000, 4.506, 31, s).unwrap(), &table, 0.01, 6).unwrap())
        .count();
    assert!(good as f64 / seeds as f64 > 0.99, "{good} of {seeds}");
}

#[test]
fn pps_examples() {
    let one = |v: &[bool]| Assignment::new(v.to_vec());
    assert!(is_pps(&f(1, &[[1, 1, 1]]), &one(&[true])).unwrap());
    assert!(!is_pps(&f(2, &[[1, 2, 2]]), &one(&[true, true])).unwrap());
    assert!(is_pps(&f(1, &[[-1, -1, -1]]), &one(&[false])).unwrap());
    assert_eq!(enumerate_pps(&f(2, &[[1, 2, 2]])).unwrap(), 2);
    assert_eq!(enumerate_pps(&f(1, &[[1, 1, 1]])).unwrap(), 1);
}

#[test]
fn pps_exhaustive_small_instances() {
    for (n, m) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)] {
        for g in all_formulas(n, m) {
            let occ = g.occurrences();
            let c = census(&g).unwrap();
            let list = pps_list(&g).unwrap();
            assert_eq!(list.len() as u64, c.pps);
            if c.solutions > 0 {
                assert!(c.pps >= 1, "{g:?}");
            }
            for bits in 0..1u64 << n {
                let a = Assignment::from_bits(bits, n);
                let p = is_pps(&g, &a).unwrap();
                assert_eq!(p, pps_by_definition(&g, &a));
                assert_eq!(p, list.contains(&a));
                if p {
                    // a value-1 variable needs a positive occurrence
                    assert!((0..n).all(|v| !a.get(v) || occ[v as usize].1 > 0));
                }
            }
        }
    }
}

#[test]
fn type_histograms_partition_the_cells() {
    for g in all_formulas(3, 2).step_by(7) {
        let occ = g.occurrences();
        for a in pps_list(&g).unwrap() {
            let mut theta: BTreeMap<(u32, u32), u32> = BTreeMap::new();
            let mut mu: BTreeMap<(u32, u32, u32), u32> = BTreeMap::new();
            for v in 0..g.n() {
                let (x, p, j) = variable_type(&g, &a, v).unwrap();
                assert_eq!((x, p), occ[v as usize]);
                assert!(j <= x);
                *theta.entry((x, p)).or_default() += 1;
                *mu.entry((x, p, j)).or_default() += 1;
                // the value read off the type agrees with A unless the
                // variable is 1 and never the sole true cell
                if j != p {
                    assert_eq!(a.get(v), j < p);
                }
            }
            let mut folded: BTreeMap<(u32, u32), u32> = BTreeMap::new();
            for ((x, p, _), k) in mu {
                *folded.entry((x, p)).or_default() += k;
            }
            assert_eq!(theta, folded);
        }
    }
}

#[test]
fn type_examples() {
    let g = f(2, &[[1, -2, -2], [1, -2, -2]]);
    assert_eq!(variable_type(&g, &Assignment::new(vec![true, true]), 0).unwrap(), (2, 2, 0));
    let h = f(3, &[[-1, 2, 2], [1, 2, 3], [-1, -2, 3]]);
    assert_eq!(variable_type(&h, &Assignment::new(vec![false, false, true]), 0).unwrap(), (3, 1, 2));
}

#[test]
fn representative_fibers_have_size_two_to_the_unbalanced() {
    for (n, m) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)] {
        let mut fibers: HashMap<Formula, u64> = HashMap::new();
        let mut total = 0u64;
        for g in all_formulas(n, m) {
            total += 1;
            *fibers.entry(totally_unbalanced_representative(&g)).or_default() += 1;
        }
        assert_eq!(fibers.values().sum::<u64>(), total);
        for (rep, size) in &fibers {
            assert_eq!(*size, 1 << count_unbalanced(rep), "{rep:?}");
            assert_eq!(&totally_unbalanced_representative(rep), rep);
        }
    }
}

#[test]
fn renaming_orbit_counts_present_variables() {
    // flipping any subset of the variables that occur gives a distinct formula
    let g = f(3, &[[1, -1, 2], [2, -2, 2]]);
    let orbit: HashSet<Formula> = (0..8u32).map(|s| g.renamed(|v| s >> v & 1 == 1)).collect();
    assert_eq!(orbit.len(), 4);
    assert_eq!(count_unbalanced(&g), 1);
}

#[test]
fn oracle_examples() {
    let r = counting_oracle(1, 1, 6).unwrap();
    assert_eq!((r.formulas, r.violations()), (8, 0));
    let r = counting_oracle(2, 1, 6).unwrap();
    assert_eq!(r.formulas, 64);
    assert_eq!(r.violations(), 0);
    assert_eq!(r.by_formula, r.by_assignment);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn representative_is_idempotent_and_keeps_satisfiability(g in formula_strategy(6, 8)) {
        let r = totally_unbalanced_representative(&g);
        prop_assert_eq!(&totally_unbalanced_representative(&r), &r);
        prop_assert!(r.occurrences().iter().all(|&(x, p)| 2 * p <= x));
        prop_assert_eq!(count_unbalanced(&r), count_unbalanced(&g));
        prop_assert_eq!(census(&r).unwrap().solutions > 0, census(&g).unwrap().solutions > 0);
    }

    #[test]
    fn representative_folds_occurrence_cells(g in formula_strategy(8, 10)) {
        let x_cap = 30;
        let w = measure_omega(&g, x_cap);
        let r = measure_omega(&totally_unbalanced_representative(&g), x_cap);
        for x in 0..=x_cap {
            for p in 0..=x {
                let want = match (2 * p).cmp(&x) {
                    std::cmp::Ordering::Less => w.count(x, p) + w.count(x, x - p),
                    std::cmp::Ordering::Equal => w.count(x, p),
                    std::cmp::Ordering::Greater => 0,
                };
                prop_assert_eq!(r.count(x, p), want);
            }
        }
    }

    #[test]
    fn measurement_balances(g in formula_strategy(10, 12), x_cap in 0u32..5) {
        let w = measure_omega(&g, x_cap);
        prop_assert!(w.balanced(g.m()));
    }

    #[test]
    fn ocnf_round_trip(g in formula_strategy(20, 15)) {
        prop_assert_eq!(Formula::from_ocnf(&g.to_ocnf()).unwrap(), g);
    }

    #[test]
    fn solutions_of_the_representative_are_renamed_solutions(g in formula_strategy(5, 6), bits in 0u64..32) {
        let occ = g.occurrences();
        let flip = |v: u32| 2 * occ[v as usize].1 > occ[v as usize].0;
        let a = Assignment::from_bits(bits & ((1 << g.n()) - 1), g.n());
        let b = Assignment::new((0..g.n()).map(|v| a.get(v) ^ flip(v)).collect());
        prop_assert_eq!(g.satisfied_by(&a), totally_unbalanced_representative(&g).satisfied_by(&b));
    }
}
