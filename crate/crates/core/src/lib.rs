//! Certification machinery for a first-moment upper bound on the random
//! 3-SAT satisfiability threshold.
//!
//! The analytic side builds the signed-occurrence distributions, reduces the
//! stationarity system of the constrained maximization to two equations in
//! two unknowns, boxes their common roots by sign exclusion, and bounds the
//! per-variable expectation rate over the box with every finite-size error
//! factor accounted for. The empirical side generates random formulas in the
//! ordered-clauses model and measures the same quantities directly.

pub mod certifier;
pub mod distribution;
pub mod error;
pub mod error_ledger;
pub mod formula_lab;
pub mod monotone;
pub mod numeric;
pub mod params;
pub mod root_box;
pub mod stationarity;

pub use error::{ConfigError, DomainError};
pub use params::ModelParams;
