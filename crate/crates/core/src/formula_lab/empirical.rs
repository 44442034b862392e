use std::fmt::Write as _;

use crate::distribution::kappa;
use crate::error::DomainError;

use super::deviation::deviation_for_confidence;
use super::formula::{clause_count, generate_stream, Formula};
use super::measure::measure_omega;
use super::pps::{Compiled, ENUMERATION_MAX_N};

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalConfig {
    pub n: u32,
    pub c: f64,
    pub formulas: u32,
    pub seed: u64,
    /// Cells with `x <= x_cap` are reported.
    pub x_cap: u32,
    /// Joint confidence over all reported cells.
    pub confidence: f64,
    /// Cap on `n * formulas`; beyond it the report is partial.
    pub max_variables: u64,
}

impl EmpiricalConfig {
    pub fn new(n: u32, c: f64, formulas: u32, seed: u64) -> Self {
        EmpiricalConfig {
            n,
            c,
            formulas,
            seed,
            x_cap: 8,
            confidence: 0.999,
            max_variables: 200_000_000,
        }
    }
}

/// Exact probability that a given variable of a uniform formula with `n`
/// variables and `m` clauses has `x` occurrences, `p` of them positive.
pub fn finite_cell_probability(n: u32, m: usize, x: u32, p: u32) -> f64 {
    let cells = 3 * m as u64;
    if x as u64 > cells || p > x {
        return 0.0;
    }
    let nf = n as f64;
    let mut ln = 0.0;
    for i in 0..x as u64 {
        ln += ((cells - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    for i in 0..p {
        ln += ((x - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    ln -= x as f64 * (nf.ln() + std::f64::consts::LN_2);
    if cells > x as u64 {
        ln += (cells - x as u64) as f64 * (-1.0 / nf).ln_1p();
    }
    ln.exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalRow {
    pub x: u32,
    pub p: u32,
    pub kappa: f64,
    pub mean_omega: f64,
    pub std_omega: f64,
    /// Exact finite-`n` cell probability.
    pub q_finite: f64,
    /// Large-deviation radius at the per-cell confidence.
    pub deviation: f64,
    /// `|q_finite − kappa|`, the finite-size bias.
    pub bias: f64,
    pub budget: f64,
}

impl EmpiricalRow {
    pub fn error(&self) -> f64 {
        (self.mean_omega - self.kappa).abs()
    }

    pub fn within(&self) -> bool {
        self.error() <= self.budget
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalReport {
    pub config: EmpiricalConfig,
    pub m: usize,
    pub formulas_used: u32,
    pub partial: bool,
    pub rows: Vec<EmpiricalRow>,
}

impl EmpiricalReport {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(EmpiricalRow::error).fold(0.0, f64::max)
    }

    /// Largest `error / budget` over the cells.
    pub fn worst_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.error() / r.budget).fold(0.0, f64::max)
    }

    pub fn within_budget(&self) -> bool {
        self.rows.iter().all(EmpiricalRow::within)
    }

    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut s = String::from("x,p,kappa,mean_omega,std_omega,n,formulas,seed,q_finite,deviation,bias,budget,within\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.12e},{:.12e},{:.12e},{},{},{},{:.12e},{:.6e},{:.6e},{:.6e},{}",
                r.x,
                r.p,
                r.kappa,
                r.mean_omega,
                r.std_omega,
                c.n,
                self.formulas_used,
                c.seed,
                r.q_finite,
                r.deviation,
                r.bias,
                r.budget,
                r.within()
            );
        }
        s
    }
}

/// Measures `omega_{x,p}` on `formulas` independent formulas and compares
/// the means with `kappa`. The budget of each cell is the large-deviation
/// radius for `n * formulas` samples at the per-cell share of the
/// confidence, plus the finite-size bias.
pub fn empirical_report(cfg: &EmpiricalConfig) -> Result<EmpiricalReport, DomainError> {
    let m = clause_count(cfg.n, cfg.c)?;
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) || cfg.formulas == 0 {
        return Err(DomainError::Precondition(
            "need at least one formula and a confidence in (0, 1)".into(),
        ));
    }
    let fit = (cfg.max_variables / cfg.n as u64).min(cfg.formulas as u64) as u32;
    let used = fit.max(1);
    let lambda = 3.0 * cfg.c;
    let cells = ((cfg.x_cap + 1) * (cfg.x_cap + 2) / 2) as usize;
    let mut sum = vec![0.0; cells];
    let mut sum_sq = vec![0.0; cells];
    for i in 0..used {
        let f = generate_stream(cfg.n, cfg.c, cfg.seed, i as u64)?;
        let w = measure_omega(&f, cfg.x_cap);
        for (k, (x, p, _)) in w.cells().enumerate() {
            let o = w.omega(x, p);
            sum[k] += o;
            sum_sq[k] += o * o;
        }
    }
    let k_used = used as f64;
    let samples = cfg.n as f64 * k_used;
    let alpha = (1.0 - cfg.confidence) / cells as f64;
    let mut rows = Vec::with_capacity(cells);
    let mut k = 0;
    for x in 0..=cfg.x_cap {
        for p in 0..=x {
            let mean = sum[k] / k_used;
            let var = if used > 1 {
                ((sum_sq[k] - k_used * mean * mean) / (k_used - 1.0)).max(0.0)
            } else {
                0.0
            };
            let kap = kappa(x, p, lambda)?;
            let q = finite_cell_probability(cfg.n, m, x, p);
            let deviation = if q > 0.0 && q < 1.0 {
                deviation_for_confidence(q, samples, alpha)?
            } else {
                0.0
            };
            let bias = (q - kap).abs();
            rows.push(EmpiricalRow {
                x,
                p,
                kappa: kap,
                mean_omega: mean,
                std_omega: var.sqrt(),
                q_finite: q,
                deviation,
                bias,
                budget: deviation + bias,
            });
            k += 1;
        }
    }
    Ok(EmpiricalReport {
        config: cfg.clone(),
        m,
        formulas_used: used,
        partial: (used as u64) < cfg.formulas as u64,
        rows,
    })
}

/// Exhaustive PPS statistics over a corpus of small formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PpsCensus {
    pub n: u32,
    pub formulas: u64,
    pub satisfiable: u64,
    /// Satisfiable formulas with at least one PPS.
    pub with_pps: u64,
    pub solutions: u64,
    pub pps: u64,
    /// PPSs that fail the cell-level flip test.
    pub flip_failures: u64,
    /// PPSs giving value 1 to a pure negative variable.
    pub pure_negative_ones: u64,
}

impl PpsCensus {
    pub fn clean(&self) -> bool {
        self.with_pps == self.satisfiable && self.flip_failures == 0 && self.pure_negative_ones == 0
    }

    /// Adds one formula to the tally.
    pub fn add(&mut self, f: &Formula) -> Result<(), DomainError> {
        let comp = Compiled::new(f)?;
        let occ = f.occurrences();
        let pure_negative: u32 = occ
            .iter()
            .enumerate()
            .filter(|(_, &(x, p))| x > 0 && p == 0)
            .fold(0, |b, (v, _)| b | 1 << v);
        let (mut sols, mut pps) = (0u64, 0u64);
        for bits in comp.assignments() {
            if !comp.satisfied(bits) {
                continue;
            }
            sols += 1;
            if !comp.is_pps(bits) {
                continue;
            }
            pps += 1;
            let a = super::formula::Assignment::from_bits(bits as u64, f.n());
            let flips_ok = f.satisfied_by(&a) && (0..f.n()).all(|v| !a.get(v) || !f.satisfied_by(&a.with_flipped(v)));
            self.flip_failures += !flips_ok as u64;
            self.pure_negative_ones += (bits & pure_negative != 0) as u64;
        }
        self.formulas += 1;
        self.satisfiable += (sols > 0) as u64;
        self.with_pps += (sols > 0 && pps > 0) as u64;
        self.solutions += sols;
        self.pps += pps;
        Ok(())
    }
}

/// Census over `formulas` formulas at `n` variables, cycling through the
/// given densities.
pub fn pps_census(n: u32, densities: &[f64], formulas: u64, seed: u64) -> Result<PpsCensus, DomainError> {
    if n > ENUMERATION_MAX_N || densities.is_empty() {
        return Err(DomainError::Precondition(format!(
            "need n <= {ENUMERATION_MAX_N} and at least one density"
        )));
    }
    let mut census = PpsCensus {
        n,
        ..Default::default()
    };
    for i in 0..formulas {
        let c = densities[(i % densities.len() as u64) as usize];
        census.add(&generate_stream(n, c, seed, i)?)?;
    }
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_probability_sums_to_one() {
        let (n, m) = (10, 20);
        let total: f64 = (0..=60).flat_map(|x| (0..=x).map(move |p| (x, p))).map(|(x, p)| finite_cell_probability(n, m, x, p)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // n = 1: every cell belongs to the single variable
        assert!((finite_cell_probability(1, 1, 3, 1) - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn finite_probability_approaches_kappa() {
        let n = 100_000;
        let m = clause_count(n, 4.506).unwrap();
        let q = finite_cell_probability(n, m, 4, 2);
        let k = kappa(4, 2, 3.0 * m as f64 / n as f64).unwrap();
        assert!((q - k).abs() < 1e-5, "{q} {k}");
    }

    #[test]
    fn small_report_is_deterministic_and_within_budget() {
        let cfg = EmpiricalConfig::new(2000, 4.506, 20, 5);
        let a = empirical_report(&cfg).unwrap();
        assert_eq!(a.rows.len(), 45);
        assert!(a.within_budget(), "worst ratio {}", a.worst_ratio());
        assert_eq!(a.to_csv(), empirical_report(&cfg).unwrap().to_csv());
        assert!(a.to_csv().starts_with("x,p,kappa,mean_omega,std_omega,n,formulas,seed"));
    }

    #[test]
    fn budget_cap_marks_partial() {
        let mut cfg = EmpiricalConfig::new(1000, 4.0, 10, 1);
        cfg.max_variables = 3500;
        let r = empirical_report(&cfg).unwrap();
        assert!(r.partial);
        assert_eq!(r.formulas_used, 3);
    }

    #[test]
    fn small_census_is_clean() {
        let c = pps_census(8, &[2.0, 4.506], 200, 3).unwrap();
        assert_eq!(c.formulas, 200);
        assert!(c.clean(), "{c:?}");
        assert!(c.satisfiable > 0 && c.pps <= c.solutions);
    }
}
