//! The whole chain in one run: tables, error ledger, monotonicity
//! certificates, exclusion spiral and the rate over the final rectangle,
//! gathered into a certificate that can be replayed from its own contents.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::Tables;
use crate::error::{ConfigError, DomainError};
use crate::error_ledger::ErrorBudget;
use crate::monotone::MonotoneReport;
use crate::numeric::{ArithmeticMode, Interval, Scalar};
use crate::params::{AprioriBox, ModelParams, Range, DELTA_NUM};
use crate::root_box::{spiral_localize, verify_exclusion, EquationPair, ExclusionTrace, Stationarity, TraceError};
use crate::stationarity::{rectangle_majorant, Rectangle};

pub const SCHEMA_VERSION: u32 = 1;

/// Rectangle width the spiral aims for by default.
pub const DEFAULT_WIDTH_TARGET: f64 = 1e-7;

/// Largest truncation degree a certificate may ask a replay to rebuild.
pub const REPLAY_MAX_X_MAX: u32 = 400;

/// Used by the final step from "the expectation vanishes at c" to "the
/// threshold lies below c", and not checked by any computation here.
pub const DECREASING_IN_C: &str = "Pr(SAT) for random 3-SAT with n variables is nonincreasing in the clause density c";

/// The stage of the pipeline a failure is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Monotone,
    Spiral,
    Exclusion,
    Rate,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Monotone => "monotone",
            Stage::Spiral => "spiral",
            Stage::Exclusion => "exclusion",
            Stage::Rate => "rate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub mode: ArithmeticMode,
    /// Recorded only; the analytic chain draws no random numbers.
    pub seed: u64,
    pub width_target: f64,
    /// Seconds since the Unix epoch, if the caller wants one recorded.
    pub timestamp: Option<u64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            mode: ArithmeticMode::Float,
            seed: 0,
            width_target: DEFAULT_WIDTH_TARGET,
            timestamp: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
    pub timestamp_unix: Option<u64>,
    pub mode: ArithmeticMode,
    #[serde(with = "crate::numeric::sig17")]
    pub width_target: f64,
}

/// Upper bounds on the rate over a rectangle, alone and with the ledger's
/// slack applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    #[serde(with = "crate::numeric::sig17")]
    pub log_majorant: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub majorant: f64,
    /// `ln(G₁ G₂ e^{2εD/e} 2^{ρ+εΔ})`.
    #[serde(with = "crate::numeric::sig17")]
    pub log_slack: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub bound: f64,
}

impl RateRecord {
    /// The bound stays below one with the numerical slack added.
    pub fn below_one(&self) -> bool {
        self.bound + DELTA_NUM < 1.0
    }
}

/// Rate majorant over `rect`, multiplied by the prefactor and the
/// unbalancing factor of the ledger.
pub fn rate_bound<S: Scalar>(rect: &Rectangle, tables: &Tables<S>, ledger: &ErrorBudget) -> Result<RateRecord, DomainError> {
    let maj = rectangle_majorant(rect, tables)?;
    let log_slack = S::exact(ledger.log_prefactor.value) + S::exact(ledger.log_unbalancing.value);
    let log_bound = maj.log_value + log_slack;
    Ok(RateRecord {
        log_majorant: maj.log_value.upper(),
        majorant: maj.value.upper(),
        log_slack: log_slack.upper(),
        bound: log_bound.exp().upper(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub params: ModelParams,
    pub ledger: ErrorBudget,
    pub monotone: Option<MonotoneReport>,
    pub trace: Option<ExclusionTrace>,
    pub rectangle: Option<Rectangle>,
    pub rate: Option<RateRecord>,
    pub verdict: bool,
    pub failed_stage: Option<Stage>,
    pub failure: Option<String>,
    /// Facts the conclusion rests on that were not computed.
    pub assumptions: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    Schema { found: u32 },
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CertificateError> {
        let cert: Certificate = serde_json::from_str(s)?;
        if cert.schema_version != SCHEMA_VERSION {
            return Err(CertificateError::Schema {
                found: cert.schema_version,
            });
        }
        Ok(cert)
    }

    fn fail(&mut self, stage: Stage, why: impl Into<String>) {
        if self.failed_stage.is_none() {
            self.failed_stage = Some(stage);
            self.failure = Some(why.into());
        }
    }
}

/// Runs the chain at `params`. Invalid parameters are errors; a stage that
/// fails yields a certificate with a false verdict naming the stage.
pub fn certify(params: &ModelParams, opts: &CertifyOptions) -> Result<Certificate, ConfigError> {
    params.validate()?;
    let float_tables: Tables<f64> = Tables::build(params)?;
    match opts.mode {
        ArithmeticMode::Float => run(params, opts, &float_tables, &float_tables),
        ArithmeticMode::Interval => {
            let tables: Tables<Interval> = Tables::build(params)?;
            run(params, opts, &float_tables, &tables)
        }
    }
}

fn run<S: Scalar>(
    params: &ModelParams,
    opts: &CertifyOptions,
    float_tables: &Tables<f64>,
    tables: &Tables<S>,
) -> Result<Certificate, ConfigError> {
    let ledger = ErrorBudget::compute(params, tables.constants.rho)?;
    let mut cert = Certificate {
        schema_version: SCHEMA_VERSION,
        params: *params,
        ledger,
        monotone: None,
        trace: None,
        rectangle: None,
        rate: None,
        verdict: false,
        failed_stage: None,
        failure: None,
        assumptions: vec![DECREASING_IN_C.to_string()],
        provenance: Provenance {
            seed: opts.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: opts.timestamp,
            mode: S::MODE,
            width_target: opts.width_target,
        },
    };

    match MonotoneReport::compute(params, tables) {
        Ok(report) => {
            if !report.verdict {
                cert.fail(Stage::Monotone, monotone_failure(&report));
            }
            cert.monotone = Some(report);
        }
        Err(e) => cert.fail(Stage::Monotone, e.to_string()),
    }

    // the spiral runs in floats; interval mode re-verifies its witnesses
    let mut trace = match spiral_localize(&Stationarity::new(float_tables), &params.a_priori, opts.width_target) {
        Ok(t) => t,
        Err(e) => {
            cert.fail(Stage::Spiral, e.to_string());
            return Ok(cert);
        }
    };
    match verify_exclusion(&trace, &Stationarity::new(tables), &params.a_priori) {
        Ok(report) => {
            if let Some(c) = report.failure() {
                cert.fail(
                    Stage::Exclusion,
                    format!("{:?} #{} at ({}, {}) has margin {:e}", c.family, c.index, c.phi, c.beta1, c.margin),
                );
            }
            trace.sign_checks = report.checks;
        }
        Err(e) => cert.fail(Stage::Exclusion, e.to_string()),
    }
    let rect = trace.rectangle;
    cert.rectangle = Some(rect);
    cert.trace = Some(trace);

    match rate_bound(&rect, tables, &cert.ledger) {
        Ok(rate) => {
            if !rate.below_one() {
                cert.fail(Stage::Rate, format!("rate bound {} is not below 1", rate.bound));
            }
            cert.rate = Some(rate);
        }
        Err(e) => cert.fail(Stage::Rate, e.to_string()),
    }
    cert.verdict = cert.failed_stage.is_none();
    Ok(cert)
}

fn monotone_failure(r: &MonotoneReport) -> String {
    let mut parts = Vec::new();
    if !r.v_min.agrees(1e-7) || !r.uv_max.agrees(1e-7) {
        parts.push("polygon extrema disagree with the grid".to_string());
    }
    for c in r.eq2.iter().filter(|c| !c.verdict) {
        parts.push(format!("{:?}: total {} vs threshold {}", c.direction, c.total(), c.threshold));
    }
    if r.eq1_star + DELTA_NUM >= 0.0 {
        parts.push(format!("eq1 majorant {} is not negative", r.eq1_star));
    }
    for m in r.m_bands.iter().filter(|m| m.value + DELTA_NUM >= 0.0) {
        parts.push(format!("band [{}, {}] bound {} is not negative", m.lo, m.hi, m.value));
    }
    parts.join("; ")
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("replay refuses x_max = {0} (limit {REPLAY_MAX_X_MAX})")]
    TooLarge(u32),
    #[error("replay disagrees with the certificate: {0}")]
    Mismatch(String),
}

/// Rebuilds the tables in the recorded mode, re-verifies the stored trace,
/// recomputes the rate on the stored rectangle and the monotone report, and
/// checks that every recomputed part and the verdict match the stored ones.
/// Returns the verdict.
pub fn replay(cert: &Certificate) -> Result<bool, ReplayError> {
    let params = &cert.params;
    params.validate()?;
    if params.x_max > REPLAY_MAX_X_MAX {
        return Err(ReplayError::TooLarge(params.x_max));
    }
    match cert.provenance.mode {
        ArithmeticMode::Float => replay_in::<f64>(cert),
        ArithmeticMode::Interval => replay_in::<Interval>(cert),
    }
}

fn mismatch(what: &str) -> ReplayError {
    ReplayError::Mismatch(what.to_string())
}

fn replay_in<S: Scalar>(cert: &Certificate) -> Result<bool, ReplayError> {
    let params = &cert.params;
    let tables: Tables<S> = Tables::build(params)?;
    let ledger = ErrorBudget::compute(params, tables.constants.rho)?;
    if ledger != cert.ledger {
        return Err(mismatch("error ledger"));
    }
    let mut ok = true;
    if let Ok(report) = MonotoneReport::compute(params, &tables) {
        ok &= report.verdict;
        if cert.monotone.as_ref() != Some(&report) {
            return Err(mismatch("monotone report"));
        }
    } else {
        ok = false;
    }
    let Some(trace) = &cert.trace else {
        return if cert.verdict { Err(mismatch("a true verdict without a trace")) } else { Ok(false) };
    };
    let report = verify_exclusion(trace, &Stationarity::new(&tables), &params.a_priori)?;
    if report.checks != trace.sign_checks {
        return Err(mismatch("sign checks"));
    }
    ok &= report.passed();
    if cert.rectangle != Some(trace.rectangle) {
        return Err(mismatch("rectangle"));
    }
    match rate_bound(&trace.rectangle, &tables, &ledger) {
        Ok(rate) => {
            if cert.rate != Some(rate) {
                return Err(mismatch("rate"));
            }
            ok &= rate.below_one();
        }
        Err(_) => ok = false,
    }
    if ok != cert.verdict {
        return Err(mismatch("verdict"));
    }
    Ok(ok)
}

/// Roots of the two equations on one column `beta1 = const`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub beta1: f64,
    pub phi_eq1: Option<f64>,
    pub phi_eq2: Option<f64>,
}

const COLUMN_SCAN: usize = 256;

/// First sign change from positive to negative of `g` on `[lo, hi]`,
/// located by a coarse scan and then bisected to adjacent doubles.
fn column_root(lo: f64, hi: f64, g: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=COLUMN_SCAN {
        let x = lo + (hi - lo) * i as f64 / COLUMN_SCAN as f64;
        let Some(v) = g(x) else {
            prev = None;
            continue;
        };
        if let Some((px, pv)) = prev {
            if pv > 0.0 && v <= 0.0 {
                let (mut a, mut b) = (px, x);
                loop {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        return Some(0.5 * (a + b));
                    }
                    match g(m) {
                        Some(gm) if gm > 0.0 => a = m,
                        Some(_) => b = m,
                        None => return Some(m),
                    }
                }
            }
        }
        prev = Some((x, v));
    }
    None
}

/// Samples both loci at `samples` evenly spaced values of `beta1` in
/// `beta1`, each by bisection in `phi` over the feasible section.
pub fn curve_points(pair: &impl EquationPair, domain: &AprioriBox, beta1: Range, samples: usize) -> Vec<CurvePoint> {
    (0..samples)
        .map(|i| {
            let b = if samples == 1 {
                beta1.lerp(0.5)
            } else {
                beta1.lerp(i as f64 / (samples - 1) as f64)
            };
            let (phi_eq1, phi_eq2) = match domain.phi_section(b) {
                Some(sec) => (
                    column_root(sec.lo, sec.hi, |phi| pair.eq1(phi, b).ok().map(Interval::mid)),
                    column_root(sec.lo, sec.hi, |phi| pair.eq2(phi, b).ok().map(Interval::mid)),
                ),
                None => (None, None),
            };
            CurvePoint { beta1: b, phi_eq1, phi_eq2 }
        })
        .collect()
}

/// `beta1,phi_eq1,phi_eq2`, with empty fields where a column has no root.
pub fn curves_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("beta1,phi_eq1,phi_eq2\n");
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
    for p in points {
        let _ = writeln!(s, "{:.17e},{},{}", p.beta1, cell(p.phi_eq1), cell(p.phi_eq2));
    }
    s
}

/// Both loci over the a-priori range of `beta1`, `grid_density` columns.
pub fn emit_curves(params: &ModelParams, grid_density: usize) -> Result<String, ConfigError> {
    let tables: Tables<f64> = Tables::build(params)?;
    let points = curve_points(&Stationarity::new(&tables), &params.a_priori, params.a_priori.beta1, grid_density);
    Ok(curves_csv(&points))
}
