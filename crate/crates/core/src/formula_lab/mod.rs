//! The ordered-clauses random formula model at desk scale: generation,
//! occurrence measurement, positively prime solutions, the renaming to the
//! totally unbalanced representative, and brute-force oracles.

mod deviation;
mod empirical;
mod formula;
mod measure;
mod oracle;
mod pps;

pub use deviation::{binomial_large_deviation, deviation_for_confidence, h as kl_exponent};
pub use empirical::{
    empirical_report, finite_cell_probability, pps_census, EmpiricalConfig, EmpiricalReport, EmpiricalRow, PpsCensus,
};
pub use formula::{
    all_formulas, clause_count, generate, generate_stream, Assignment, Formula, Literal, OcnfError, OcnfErrorKind,
};
pub use measure::{count_unbalanced, measure_omega, obeys, totally_unbalanced_representative, MeasuredOmega};
pub use oracle::{counting_oracle, OracleRecord, OracleRow, Signature, ORACLE_MAX_M, ORACLE_MAX_N};
pub use pps::{census, enumerate_pps, is_pps, pps_list, variable_type, Census, Compiled, ENUMERATION_MAX_N};
