//! Sign-exclusion boxing of the common roots of the two stationarity
//! equations.
//!
//! Both residuals decrease in each variable on the feasible polygon, so one
//! point with a known sign rules out a whole quadrant. The spiral walks in
//! from the corners `(phi_min, beta1_max)` and `(phi_max, beta1_min)`,
//! alternating between the equations, and the four witness sequences it
//! leaves behind confine every feasible common root to a small rectangle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::Tables;
use crate::error::DomainError;
use crate::numeric::{Interval, Scalar};
use crate::params::{AprioriBox, DELTA_NUM};
use crate::stationarity::{aggregates, eq1_in, eq2_in, Eq1Range, Eq1Variant, Rectangle};

/// Two residuals, each evaluated to an enclosure.
pub trait EquationPair {
    fn eq1(&self, phi: f64, beta1: f64) -> Result<Interval, DomainError>;
    fn eq2(&self, phi: f64, beta1: f64) -> Result<Interval, DomainError>;
}

/// The stationarity residuals in arithmetic `S`. With `f64` the enclosures
/// are points.
pub struct Stationarity<'a, S = f64> {
    tables: &'a Tables<S>,
}

impl<'a, S: Scalar> Stationarity<'a, S> {
    pub fn new(tables: &'a Tables<S>) -> Self {
        Stationarity { tables }
    }
}

fn enclose<S: Scalar>(v: S) -> Result<Interval, DomainError> {
    let (lo, hi) = (v.lower(), v.upper());
    if lo <= hi {
        Ok(Interval::new(lo, hi))
    } else {
        Err(DomainError::Precondition("residual is not a number".into()))
    }
}

impl<S: Scalar> EquationPair for Stationarity<'_, S> {
    fn eq1(&self, phi: f64, beta1: f64) -> Result<Interval, DomainError> {
        let a = aggregates(S::exact(phi), S::exact(beta1))?;
        enclose(eq1_in(&a, self.tables, Eq1Variant::Full, Eq1Range::OffDiagonal)?)
    }

    fn eq2(&self, phi: f64, beta1: f64) -> Result<Interval, DomainError> {
        let a = aggregates(S::exact(phi), S::exact(beta1))?;
        enclose(eq2_in(&a, self.tables)?)
    }
}

/// A pair of plain closures.
pub struct FnPair<F, G>(pub F, pub G);

impl<F, G> EquationPair for FnPair<F, G>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    fn eq1(&self, phi: f64, beta1: f64) -> Result<Interval, DomainError> {
        enclose((self.0)(phi, beta1))
    }

    fn eq2(&self, phi: f64, beta1: f64) -> Result<Interval, DomainError> {
        enclose((self.1)(phi, beta1))
    }
}

/// One of the four families of sign conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckFamily {
    /// `Eq1(phi_i^-, beta_i^+) > 0` for `0 <= i <= K`
    Eq1Minus,
    /// `Eq2(phi_i^-, beta_{i+1}^+) < 0` for `0 <= i < K`
    Eq2Minus,
    /// `Eq1(phi_j^+, beta_j^-) < 0` for `0 <= j <= L`
    Eq1Plus,
    /// `Eq2(phi_j^+, beta_{j+1}^-) > 0` for `0 <= j < L`
    Eq2Plus,
}

impl CheckFamily {
    pub fn equation(self) -> u8 {
        match self {
            CheckFamily::Eq1Minus | CheckFamily::Eq1Plus => 1,
            CheckFamily::Eq2Minus | CheckFamily::Eq2Plus => 2,
        }
    }

    pub fn wants_positive(self) -> bool {
        matches!(self, CheckFamily::Eq1Minus | CheckFamily::Eq2Plus)
    }
}

/// A residual evaluated at a witness point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub family: CheckFamily,
    pub index: usize,
    #[serde(with = "crate::numeric::sig17")]
    pub phi: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta1: f64,
    pub equation: u8,
    #[serde(with = "crate::numeric::sig17")]
    pub value: f64,
    /// Distance of the enclosure from zero on the required side; negative
    /// when the sign is wrong, `-inf` when the residual is undefined.
    #[serde(with = "crate::numeric::sig17")]
    pub margin: f64,
}

impl SignCheck {
    pub fn passed(&self) -> bool {
        self.margin > DELTA_NUM
    }
}

fn margin(r: &Result<Interval, DomainError>, positive: bool) -> f64 {
    match r {
        Ok(v) if positive => v.lower(),
        Ok(v) => -v.upper(),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn evaluate(pair: &impl EquationPair, family: CheckFamily, index: usize, phi: f64, beta1: f64) -> SignCheck {
    let r = match family.equation() {
        1 => pair.eq1(phi, beta1),
        _ => pair.eq2(phi, beta1),
    };
    SignCheck {
        family,
        index,
        phi,
        beta1,
        equation: family.equation(),
        value: r.as_ref().map_or(f64::NAN, |v| v.central()),
        margin: margin(&r, family.wants_positive()),
    }
}

/// Structural defects of a trace, as opposed to failed sign conditions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("witness sequences must be nonempty")]
    Empty,
    #[error("{sequence} has {found} entries, expected {expected}")]
    Length {
        sequence: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("{sequence} starts at {found}, expected the domain corner value {expected}")]
    Anchor {
        sequence: &'static str,
        expected: f64,
        found: f64,
    },
    #[error("{sequence} is not strictly {direction} at index {index}")]
    NotMonotone {
        sequence: &'static str,
        direction: &'static str,
        index: usize,
    },
    #[error("recorded rectangle does not match the witness sequences")]
    Rectangle,
    #[error("malformed trace: {0}")]
    Json(String),
}

/// The four witness sequences and the rectangle they pin down.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionTrace {
    #[serde(with = "crate::numeric::sig17::seq")]
    pub phi_minus: Vec<f64>,
    #[serde(with = "crate::numeric::sig17::seq")]
    pub beta_plus: Vec<f64>,
    #[serde(with = "crate::numeric::sig17::seq")]
    pub phi_plus: Vec<f64>,
    #[serde(with = "crate::numeric::sig17::seq")]
    pub beta_minus: Vec<f64>,
    pub k: usize,
    pub l: usize,
    /// `[phi_K^-, phi_L^+] x [beta_L^-, beta_K^+]`
    pub rectangle: Rectangle,
    pub sign_checks: Vec<SignCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

fn strictly(seq: &[f64], name: &'static str, increasing: bool) -> Result<(), TraceError> {
    for (i, w) in seq.windows(2).enumerate() {
        let ok = if increasing { w[0] < w[1] } else { w[0] > w[1] };
        if !ok {
            return Err(TraceError::NotMonotone {
                sequence: name,
                direction: if increasing { "increasing" } else { "decreasing" },
                index: i + 1,
            });
        }
    }
    Ok(())
}

impl ExclusionTrace {
    /// Builds a trace from the sequences; the sign checks are left empty.
    pub fn from_sequences(phi_minus: Vec<f64>, beta_plus: Vec<f64>, phi_plus: Vec<f64>, beta_minus: Vec<f64>) -> Self {
        let k = phi_minus.len().saturating_sub(1);
        let l = phi_plus.len().saturating_sub(1);
        let rectangle = Rectangle::new(
            phi_minus.last().copied().unwrap_or(f64::NAN),
            phi_plus.last().copied().unwrap_or(f64::NAN),
            beta_minus.last().copied().unwrap_or(f64::NAN),
            beta_plus.last().copied().unwrap_or(f64::NAN),
        );
        ExclusionTrace {
            phi_minus,
            beta_plus,
            phi_plus,
            beta_minus,
            k,
            l,
            rectangle,
            sign_checks: Vec::new(),
            diagnostic: None,
        }
    }

    /// The trace with only the first `k + 1` minus-side and `l + 1`
    /// plus-side witnesses.
    pub fn truncated(&self, k: usize, l: usize) -> Self {
        let k = k.min(self.k);
        let l = l.min(self.l);
        let mut t = ExclusionTrace::from_sequences(
            self.phi_minus[..=k].to_vec(),
            self.beta_plus[..=k].to_vec(),
            self.phi_plus[..=l].to_vec(),
            self.beta_minus[..=l].to_vec(),
        );
        t.sign_checks = self
            .sign_checks
            .iter()
            .filter(|c| match c.family {
                CheckFamily::Eq1Minus => c.index <= k,
                CheckFamily::Eq2Minus => c.index < k,
                CheckFamily::Eq1Plus => c.index <= l,
                CheckFamily::Eq2Plus => c.index < l,
            })
            .cloned()
            .collect();
        t
    }

    /// Lengths, finiteness, monotonicity and the recorded rectangle.
    pub fn check_structure(&self) -> Result<(), TraceError> {
        let seqs: [(&'static str, &Vec<f64>, usize); 4] = [
            ("phi_minus", &self.phi_minus, self.k),
            ("beta_plus", &self.beta_plus, self.k),
            ("phi_plus", &self.phi_plus, self.l),
            ("beta_minus", &self.beta_minus, self.l),
        ];
        for (name, seq, n) in seqs {
            if seq.is_empty() {
                return Err(TraceError::Empty);
            }
            if seq.len() != n + 1 {
                return Err(TraceError::Length {
                    sequence: name,
                    expected: n + 1,
                    found: seq.len(),
                });
            }
            if seq.iter().any(|x| !x.is_finite()) {
                return Err(TraceError::NonFinite(name));
            }
        }
        strictly(&self.phi_minus, "phi_minus", true)?;
        strictly(&self.beta_plus, "beta_plus", false)?;
        strictly(&self.phi_plus, "phi_plus", false)?;
        strictly(&self.beta_minus, "beta_minus", true)?;
        let r = &self.rectangle;
        let expected = Rectangle::new(self.phi_minus[self.k], self.phi_plus[self.l], self.beta_minus[self.l], self.beta_plus[self.k]);
        if *r != expected || r.phi_lo > r.phi_hi || r.beta1_lo > r.beta1_hi {
            return Err(TraceError::Rectangle);
        }
        Ok(())
    }

    /// Structure plus the anchoring of every sequence at its domain corner.
    pub fn check_anchoring(&self, domain: &AprioriBox) -> Result<(), TraceError> {
        self.check_structure()?;
        let anchors = [
            ("phi_minus", self.phi_minus[0], domain.phi.lo),
            ("beta_plus", self.beta_plus[0], domain.beta1.hi),
            ("phi_plus", self.phi_plus[0], domain.phi.hi),
            ("beta_minus", self.beta_minus[0], domain.beta1.lo),
        ];
        for (sequence, found, expected) in anchors {
            if found != expected {
                return Err(TraceError::Anchor {
                    sequence,
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Parses and checks structure; anchoring needs the domain and is left to
    /// [`verify_exclusion`].
    pub fn from_json(s: &str) -> Result<Self, TraceError> {
        let t: ExclusionTrace = serde_json::from_str(s).map_err(|e| TraceError::Json(e.to_string()))?;
        t.check_structure()?;
        Ok(t)
    }
}

fn all_checks(trace: &ExclusionTrace, pair: &impl EquationPair) -> Vec<SignCheck> {
    let (k, l) = (trace.k, trace.l);
    let (pm, bp, pp, bm) = (&trace.phi_minus, &trace.beta_plus, &trace.phi_plus, &trace.beta_minus);
    let mut out = Vec::with_capacity(2 * (k + l) + 2);
    out.extend((0..=k).map(|i| evaluate(pair, CheckFamily::Eq1Minus, i, pm[i], bp[i])));
    out.extend((0..k).map(|i| evaluate(pair, CheckFamily::Eq2Minus, i, pm[i], bp[i + 1])));
    out.extend((0..=l).map(|j| evaluate(pair, CheckFamily::Eq1Plus, j, pp[j], bm[j])));
    out.extend((0..l).map(|j| evaluate(pair, CheckFamily::Eq2Plus, j, pp[j], bm[j + 1])));
    out
}

/// Outcome of re-evaluating every sign condition of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ExclusionReport {
    pub checks: Vec<SignCheck>,
    /// Position in `checks` of the first condition without margin.
    pub first_failure: Option<usize>,
}

impl ExclusionReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn failure(&self) -> Option<&SignCheck> {
        self.first_failure.map(|i| &self.checks[i])
    }

    pub fn min_margin(&self) -> f64 {
        self.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Re-evaluates every sign condition of `trace`. Structural defects are
/// errors; failed signs are reported in the returned value.
pub fn verify_exclusion(
    trace: &ExclusionTrace,
    pair: &impl EquationPair,
    domain: &AprioriBox,
) -> Result<ExclusionReport, TraceError> {
    trace.check_anchoring(domain)?;
    let checks = all_checks(trace, pair);
    let first_failure = checks.iter().position(|c| !c.passed());
    Ok(ExclusionReport {
        checks,
        first_failure,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpiralError {
    #[error("cannot start the spiral: {0}")]
    CannotStart(String),
    #[error("width target must be a nonnegative number, got {0}")]
    BadTarget(f64),
}

const MAX_STEPS: usize = 10_000;

/// Margin the spiral aims for. Twice what verification demands, so a trace
/// built in floats survives re-verification in interval arithmetic.
pub const SPIRAL_MARGIN: f64 = 2.0 * DELTA_NUM;

/// Moves from `good` (where `holds` is true) toward `bad` as far as `holds`
/// stays true, assuming it flips at most once in between.
fn tightest(mut good: f64, mut bad: f64, holds: impl Fn(f64) -> bool) -> f64 {
    if holds(bad) {
        return bad;
    }
    loop {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            return good;
        }
        if holds(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
}

struct Spiral<'a, P> {
    pair: &'a P,
    domain: &'a AprioriBox,
    pm: Vec<f64>,
    bp: Vec<f64>,
    pp: Vec<f64>,
    bm: Vec<f64>,
}

impl<P: EquationPair> Spiral<'_, P> {
    fn sign(&self, eq: u8, phi: f64, beta1: f64, positive: bool) -> bool {
        let r = if eq == 1 { self.pair.eq1(phi, beta1) } else { self.pair.eq2(phi, beta1) };
        margin(&r, positive) > SPIRAL_MARGIN
    }

    fn minus_step(&mut self) -> bool {
        let (phi, beta) = (*self.pm.last().unwrap(), *self.bp.last().unwrap());
        let Some(sec) = self.domain.beta1_section(phi) else { return false };
        let hi = beta.min(sec.hi);
        let lo = sec.lo.max(*self.bm.last().unwrap());
        if !(lo < hi) || !self.sign(2, phi, hi, false) {
            return false;
        }
        let nb = tightest(hi, lo, |b| self.sign(2, phi, b, false));
        if !(nb < beta) {
            return false;
        }
        let Some(sec) = self.domain.phi_section(nb) else { return false };
        let top = sec.hi.min(*self.pp.last().unwrap());
        if !(phi < top) || !self.sign(1, phi, nb, true) {
            return false;
        }
        let np = tightest(phi, top, |p| self.sign(1, p, nb, true));
        if !(np > phi) {
            return false;
        }
        self.bp.push(nb);
        self.pm.push(np);
        true
    }

    fn plus_step(&mut self) -> bool {
        let (phi, beta) = (*self.pp.last().unwrap(), *self.bm.last().unwrap());
        let Some(sec) = self.domain.beta1_section(phi) else { return false };
        let lo = beta.max(sec.lo);
        let hi = sec.hi.min(*self.bp.last().unwrap());
        if !(lo < hi) || !self.sign(2, phi, lo, true) {
            return false;
        }
        let nb = tightest(lo, hi, |b| self.sign(2, phi, b, true));
        if !(nb > beta) {
            return false;
        }
        let Some(sec) = self.domain.phi_section(nb) else { return false };
        let bottom = sec.lo.max(*self.pm.last().unwrap());
        if !(bottom < phi) || !self.sign(1, phi, nb, false) {
            return false;
        }
        let np = tightest(phi, bottom, |p| self.sign(1, p, nb, false));
        if !(np < phi) {
            return false;
        }
        self.bm.push(nb);
        self.pp.push(np);
        true
    }

    fn widths(&self) -> (f64, f64) {
        (
            self.pp.last().unwrap() - self.pm.last().unwrap(),
            self.bp.last().unwrap() - self.bm.last().unwrap(),
        )
    }
}

/// Runs the exclusion spiral until the rectangle is at most `width_target`
/// wide in each coordinate, or until no witness clears the margin. In the
/// latter case the trace is still valid and carries a diagnostic.
pub fn spiral_localize(
    pair: &impl EquationPair,
    domain: &AprioriBox,
    width_target: f64,
) -> Result<ExclusionTrace, SpiralError> {
    if !(width_target >= 0.0) {
        return Err(SpiralError::BadTarget(width_target));
    }
    let (phi_lo, phi_hi) = (domain.phi.lo, domain.phi.hi);
    let (b_lo, b_hi) = (domain.beta1.lo, domain.beta1.hi);
    let mut missing = Vec::new();
    if !domain.contains(phi_lo, b_hi) || !domain.contains(phi_hi, b_lo) {
        missing.push("starting corners lie outside the feasible polygon".to_string());
    }
    let mut s = Spiral {
        pair,
        domain,
        pm: vec![phi_lo],
        bp: vec![b_hi],
        pp: vec![phi_hi],
        bm: vec![b_lo],
    };
    if !s.sign(1, phi_lo, b_hi, true) {
        missing.push("eq1 > 0 at (phi_min, beta1_max)".into());
    }
    if !s.sign(1, phi_hi, b_lo, false) {
        missing.push("eq1 < 0 at (phi_max, beta1_min)".into());
    }
    match domain.beta1_section(phi_lo) {
        Some(sec) if s.sign(2, phi_lo, sec.lo, true) => {}
        _ => missing.push("eq2 > 0 at the lowest feasible beta1 on phi = phi_min".into()),
    }
    match domain.beta1_section(phi_hi) {
        Some(sec) if s.sign(2, phi_hi, sec.hi, false) => {}
        _ => missing.push("eq2 < 0 at the highest feasible beta1 on phi = phi_max".into()),
    }
    if !missing.is_empty() {
        return Err(SpiralError::CannotStart(missing.join("; ")));
    }

    let (mut minus_live, mut plus_live) = (true, true);
    for _ in 0..MAX_STEPS {
        let (w, h) = s.widths();
        if (w <= width_target && h <= width_target) || !(minus_live || plus_live) {
            break;
        }
        if minus_live {
            minus_live = s.minus_step();
        }
        if plus_live {
            plus_live = s.plus_step();
        }
    }
    let (w, h) = s.widths();
    let mut trace = ExclusionTrace::from_sequences(s.pm, s.bp, s.pp, s.bm);
    if w > width_target || h > width_target {
        trace.diagnostic = Some(format!(
            "stopped at {w:.3e} x {h:.3e} above the target {width_target:.3e}: \
             no further witness clears the margin {SPIRAL_MARGIN:e}"
        ));
    }
    trace.sign_checks = all_checks(&trace, pair);
    Ok(trace)
}

/// A common root located by nested bisection, with its residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRoot {
    #[serde(with = "crate::numeric::sig17")]
    pub phi: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta1: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub eq1: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub eq2: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("no sign change of {0} across the rectangle")]
    NoSignChange(&'static str),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Zero of a function with a sign change on `[lo, hi]`, to full precision.
fn bisect(lo: f64, hi: f64, f: impl Fn(f64) -> Result<f64, ReferenceError>, name: &'static str) -> Result<(f64, f64), ReferenceError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok((a, fa));
    }
    if fb == 0.0 {
        return Ok((b, fb));
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(ReferenceError::NoSignChange(name));
    }
    loop {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok((m, fm));
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Ok(if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) })
}

/// Finds a common root inside `rect`: the inner bisection follows the
/// `eq1 = 0` curve in `phi`, the outer one runs `eq2` along it in `beta1`.
/// A sanity oracle only; it plays no part in the certificate.
pub fn solve_reference(pair: &impl EquationPair, rect: &Rectangle) -> Result<ReferenceRoot, ReferenceError> {
    let phi_of = |beta1: f64| {
        bisect(rect.phi_lo, rect.phi_hi, |p| Ok(pair.eq1(p, beta1)?.central()), "eq1").map(|(p, _)| p)
    };
    let (beta1, _) = bisect(
        rect.beta1_lo,
        rect.beta1_hi,
        |b| Ok(pair.eq2(phi_of(b)?, b)?.central()),
        "eq2",
    )?;
    let phi = phi_of(beta1)?;
    Ok(ReferenceRoot {
        phi,
        beta1,
        eq1: pair.eq1(phi, beta1)?.central(),
        eq2: pair.eq2(phi, beta1)?.central(),
    })
}
