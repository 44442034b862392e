//! Separate monotonicity of the two stationarity equations.
//!
//! The second equation decreases in each variable once a sum of positive
//! terms is shown to stay below `λ φ_min`; the first equation is shown to
//! decrease from positive to negative along each line by dropping its
//! near-diagonal terms and bounding what remains. Every inequality used is
//! evaluated here in either arithmetic.

use serde::{Deserialize, Serialize};

use crate::distribution::Tables;
use crate::error::DomainError;
use crate::numeric::Scalar;
use crate::params::{AprioriBox, ModelParams, DELTA_NUM};
use crate::stationarity::{eq1_in, Eq1Range, Eq1Variant, PhiBetaPoint};

fn check_v_above_one(v: f64) -> Result<(), DomainError> {
    if v > 1.0 {
        Ok(())
    } else {
        Err(DomainError::VNotAboveOne(v))
    }
}

/// `(3V² − 1 + 3V√(V(V−1)))/(3V + 1)`: the logarithmic-derivative ratio of
/// the second equation with `phi` held fixed, as a function of `V` alone.
pub fn r_fixed_phi(v: f64) -> Result<f64, DomainError> {
    check_v_above_one(v)?;
    let s = (v * (v - 1.0)).sqrt();
    Ok((3.0 * v * v - 1.0 + 3.0 * v * s) / (3.0 * v + 1.0))
}

/// Width of the window around `V = 4/3` where [`s_fixed_beta`] switches to
/// the factored form, measured on `3V − 4`.
pub const S_FACTORED_WINDOW: f64 = 1e-4;

/// `1/2 + 3(V−1)/(3V−4)·[V − 2 + √(V(V−1))]`, the counterpart of
/// [`r_fixed_phi`] with `beta1` held fixed.
///
/// The bracket vanishes at `V = 4/3`; near there the quotient is rewritten as
/// `1/(√(V(V−1)) + 2 − V)`, which has no singularity.
pub fn s_fixed_beta(v: f64) -> Result<f64, DomainError> {
    check_v_above_one(v)?;
    let s = (v * (v - 1.0)).sqrt();
    let d = 3.0 * v - 4.0;
    if d.abs() < S_FACTORED_WINDOW {
        Ok(0.5 + 3.0 * (v - 1.0) / (s + 2.0 - v))
    } else {
        Ok(0.5 + 3.0 * (v - 1.0) / d * (v - 2.0 + s))
    }
}

fn r_derivative(v: f64) -> f64 {
    let s = (v * (v - 1.0)).sqrt();
    let ds = (2.0 * v - 1.0) / (2.0 * s);
    let num = 3.0 * v * v - 1.0 + 3.0 * v * s;
    let dnum = 6.0 * v + 3.0 * s + 3.0 * v * ds;
    let den = 3.0 * v + 1.0;
    (dnum * den - 3.0 * num) / (den * den)
}

fn s_derivative(v: f64) -> f64 {
    let s = (v * (v - 1.0)).sqrt();
    let ds = (2.0 * v - 1.0) / (2.0 * s);
    let q = s + 2.0 - v;
    let dq = ds - 1.0;
    3.0 * (q - (v - 1.0) * dq) / (q * q)
}

/// Affine majorant `a V + b` of a concave function, tangent at `at`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tangent {
    #[serde(with = "crate::numeric::sig17")]
    pub a: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub b: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub at: f64,
}

impl Tangent {
    pub fn eval(&self, v: f64) -> f64 {
        self.a * v + self.b
    }
}

pub fn tangent_r(at: f64) -> Result<Tangent, DomainError> {
    let a = r_derivative(at);
    Ok(Tangent {
        a,
        b: r_fixed_phi(at)? - a * at,
        at,
    })
}

pub fn tangent_s(at: f64) -> Result<Tangent, DomainError> {
    let a = s_derivative(at);
    Ok(Tangent {
        a,
        b: s_fixed_beta(at)? - a * at,
        at,
    })
}

/// `(p V^{p+1} − (p+1) V^p + 1)/(V^p − 1)²`, decreasing in `V > 1`.
pub fn v_fraction<S: Scalar>(p: u32, v: S) -> S {
    let one = S::exact(1.0);
    let pf = S::exact(p as f64);
    let vp = v.powi(p);
    let den = vp - one;
    (pf * vp * v - (pf + one) * vp + one) / (den * den)
}

/// Smallest `V` on the feasible polygon, attained where `beta2 = beta2_min`
/// and `beta3 = beta3_max`.
pub fn v_min2<S: Scalar>(b: &AprioriBox) -> S {
    let b2 = S::decimal(b.beta2.lo);
    let b3 = S::decimal(b.beta3.hi);
    S::exact(1.0) + b2 * b2 / (S::exact(3.0) * b3 * (S::exact(2.0) * b2 + S::exact(3.0) * b3))
}

/// Largest `U/V` on the feasible polygon, at the same vertex.
pub fn uv_max2<S: Scalar>(b: &AprioriBox) -> S {
    let b2 = S::decimal(b.beta2.lo);
    let b3 = S::decimal(b.beta3.hi);
    let s = b2 + S::exact(3.0) * b3;
    S::exact(9.0) * (S::exact(2.0) * (S::exact(1.0) - b3) - b2) * b3 * b3 / (b2 * s * s)
}

/// One `(x, p)` cell's share of the summed estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermContribution {
    pub x: u32,
    pub p: u32,
    #[serde(with = "crate::numeric::sig17")]
    pub a: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub b: f64,
}

/// `Σ_{p>=1, 2p<=x} p κ̃ Vfrac(p, V) [1 − 1/(1 + (U/V)^{x−2p})]` with `V`
/// at its minimum and `U/V` at its maximum.
pub fn a_sum<S: Scalar>(v_low: S, uv_high: S, tables: &Tables<S>) -> (S, Vec<(u32, u32, S)>) {
    let one = S::exact(1.0);
    let terms: Vec<_> = tables
        .support()
        .filter(|&(_, p, _)| p >= 1)
        .map(|(x, p, kt)| {
            let r = uv_high.powi(x - 2 * p);
            let t = S::exact(p as f64) * kt * v_fraction(p, v_low) * (one - one / (one + r));
            (x, p, t)
        })
        .collect();
    (S::sum(terms.iter().map(|t| t.2)), terms)
}

/// `Σ_{p>=1, x>=2p+1} p (x−2p) κ̃ (aV − |b|)/(4(V^p − 1))` at `V = v_low`.
///
/// Needs `a > |b|`, which makes the summand decreasing in `V`.
pub fn b_sum<S: Scalar>(
    tangent: &Tangent,
    v_low: S,
    tables: &Tables<S>,
) -> Result<(S, Vec<(u32, u32, S)>), DomainError> {
    if tangent.a <= tangent.b.abs() {
        return Err(DomainError::Precondition(format!(
            "tangent slope {} must exceed |intercept| {}",
            tangent.a,
            tangent.b.abs()
        )));
    }
    let one = S::exact(1.0);
    let numer = S::exact(tangent.a) * v_low - S::exact(tangent.b.abs());
    let terms: Vec<_> = tables
        .support()
        .filter(|&(x, p, _)| p >= 1 && x > 2 * p)
        .map(|(x, p, kt)| {
            let w = S::exact((p * (x - 2 * p)) as f64);
            (x, p, w * kt * numer / (S::exact(4.0) * (v_low.powi(p) - one)))
        })
        .collect();
    Ok((S::sum(terms.iter().map(|t| t.2)), terms))
}

/// `λ(1 − beta1_min)/16`, bounding the extra term of the fixed-`beta1` case.
pub fn extra_term<S: Scalar>(lambda: S, beta1_min: f64) -> S {
    lambda * (S::exact(1.0) - S::decimal(beta1_min)) / S::exact(16.0)
}

/// Which variable is held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneDirection {
    Eq2FixedPhi,
    Eq2FixedBeta1,
}

/// The summed estimates behind one separate-monotonicity claim for the second
/// equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCertificate {
    pub direction: MonotoneDirection,
    pub tangent: Tangent,
    #[serde(with = "crate::numeric::sig17")]
    pub v_low: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub uv_high: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub a_bound: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub b_bound: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub extra_bound: f64,
    /// `λ φ_min`, taken from below.
    #[serde(with = "crate::numeric::sig17")]
    pub threshold: f64,
    pub verdict: bool,
    pub trace: Vec<TermContribution>,
}

impl MonotoneCertificate {
    pub fn total(&self) -> f64 {
        self.a_bound + self.b_bound + self.extra_bound
    }

    pub fn margin(&self) -> f64 {
        self.threshold - self.total()
    }
}

/// Certifies that the second equation decreases in the free variable.
pub fn eq2_monotone_verdict<S: Scalar>(
    which: MonotoneDirection,
    params: &ModelParams,
    tables: &Tables<S>,
) -> Result<MonotoneCertificate, DomainError> {
    let b = &params.a_priori;
    let v_low = v_min2::<S>(b);
    let uv_high = uv_max2::<S>(b);
    let tangent = match which {
        MonotoneDirection::Eq2FixedPhi => tangent_r(v_low.central())?,
        MonotoneDirection::Eq2FixedBeta1 => tangent_s(v_low.central())?,
    };
    let (a, a_terms) = a_sum(v_low, uv_high, tables);
    let (bs, b_terms) = b_sum(&tangent, v_low, tables)?;
    let extra = match which {
        MonotoneDirection::Eq2FixedPhi => S::exact(0.0),
        MonotoneDirection::Eq2FixedBeta1 => extra_term(tables.lambda, b.beta1.lo),
    };
    let threshold = tables.lambda * S::decimal(b.phi.lo);
    let total = a + bs + extra;
    let trace = a_terms
        .iter()
        .map(|&(x, p, t)| {
            let bt = b_terms
                .iter()
                .find(|&&(bx, bp, _)| bx == x && bp == p)
                .map_or(0.0, |t| t.2.upper());
            TermContribution {
                x,
                p,
                a: t.upper(),
                b: bt,
            }
        })
        .collect();
    Ok(MonotoneCertificate {
        direction: which,
        tangent,
        v_low: v_low.lower(),
        uv_high: uv_high.upper(),
        a_bound: a.upper(),
        b_bound: bs.upper(),
        extra_bound: extra.upper(),
        threshold: threshold.lower(),
        verdict: total.upper() + DELTA_NUM < threshold.lower(),
        trace,
    })
}

/// `√3 − 3(√3 − 1) φ`: below this `beta1` the `x = 2p + 1` terms of the first
/// equation increase in `beta1`.
pub fn beta1_star(phi: f64) -> f64 {
    let r3 = 3f64.sqrt();
    r3 - 3.0 * (r3 - 1.0) * phi
}

/// The `phi` below which the `x ∈ {2p+1, 2p+2}` terms of the first equation
/// increase in `phi`, as a function of `beta1`.
pub fn phi_star<S: Scalar>(beta1: S) -> S {
    let one = S::exact(1.0);
    let two = S::exact(2.0);
    let four = S::exact(4.0);
    let t = two - beta1;
    let root = (four * beta1 * beta1 + four * beta1 + S::exact(3.0)).sqrt();
    (S::exact(15.0) - S::exact(9.0) / t - two * beta1 - S::exact(3.0).sqrt() * (one - beta1) * root / t)
        / S::exact(12.0)
}

/// The first equation with near-diagonal families dropped.
pub fn eq1_partial(variant: Eq1Variant, pt: &PhiBetaPoint, tables: &Tables) -> Result<f64, DomainError> {
    eq1_in(&pt.aggregates(), tables, variant, Eq1Range::OffDiagonal)
}

/// Majorant of the first equation without its `x = 2p + 1` terms, at
/// `beta1 = beta1_star(phi)`, uniform over `phi` in the box.
pub fn eq1_star_majorant<S: Scalar>(params: &ModelParams, tables: &Tables<S>) -> S {
    let b = &params.a_priori;
    let one = S::exact(1.0);
    let three = S::exact(3.0);
    let phi_max = S::decimal(b.phi.hi);
    let r3 = three.sqrt();
    let ratio = three * r3 / S::exact(2.0) * (one - phi_max) / (three * phi_max - one);
    let half_r3 = r3 / S::exact(2.0);
    let sum = S::sum(
        tables
            .support()
            .filter(|&(x, p, _)| p >= 1 && x >= 2 * p + 2)
            .map(|(x, p, kt)| {
                let d = x - 2 * p;
                let e = ratio.powi(d) * (one - half_r3.powi(p));
                kt * S::exact(d as f64) * (one - one / (one + e))
            }),
    );
    tables.constants.k_tilde - tables.lambda * S::decimal(b.phi.lo) - sum
}

/// `(A, B)` with `A = 9 − √3 √(3 + 4β + 4β²)` and `B = 4 − 2β`.
fn star_ab<S: Scalar>(beta1: S) -> (S, S) {
    let four = S::exact(4.0);
    let a = S::exact(9.0) - S::exact(3.0).sqrt() * (S::exact(3.0) + four * beta1 + four * beta1 * beta1).sqrt();
    let b = four - S::exact(2.0) * beta1;
    (a, b)
}

/// `V` at `(phi_star(beta1), beta1)`.
pub fn v_star<S: Scalar>(beta1: S) -> S {
    let (a, b) = star_ab(beta1);
    S::exact(4.0) / S::exact(3.0) * a * a / ((a - b) * (a + S::exact(3.0) * b))
}

/// `U/V` at `(phi_star(beta1), beta1)`.
pub fn uv_ratio_star<S: Scalar>(beta1: S) -> S {
    let (a, b) = star_ab(beta1);
    let two = S::exact(2.0);
    let amb = a - b;
    S::exact(9.0) * amb * amb * (two * a + S::exact(10.0) * b - a * b - b * b)
        / (S::exact(4.0) * a * a * (S::exact(3.0) * b - a) * (b - two))
}

/// `(U*, V*)` at `(phi_star(beta1), beta1)`.
pub fn uv_star<S: Scalar>(beta1: S) -> (S, S) {
    let v = v_star(beta1);
    (uv_ratio_star(beta1) * v, v)
}

/// Majorant of the first equation without its `x ∈ {2p+1, 2p+2}` terms at
/// `phi = phi_star(beta1)`, uniform over `beta1 ∈ [lo, hi]`.
pub fn m_bound<S: Scalar>(lo: f64, hi: f64, tables: &Tables<S>) -> S {
    let one = S::exact(1.0);
    let uv = uv_ratio_star(S::decimal(lo));
    let inv_v = one / v_star(S::decimal(hi));
    let sum = S::sum(
        tables
            .support()
            .filter(|&(x, p, _)| p >= 1 && x >= 2 * p + 3)
            .map(|(x, p, kt)| {
                let d = x - 2 * p;
                let e = uv.powi(d) * (one - inv_v.powi(p));
                kt * S::exact(d as f64) * (one - one / (one + e))
            }),
    );
    tables.constants.k_tilde - tables.lambda * phi_star(S::decimal(hi)) - sum
}

/// The `beta1` bands covering the box on which [`m_bound`] is evaluated.
pub const M_BANDS: [(f64, f64); 4] = [(0.33, 0.39), (0.39, 0.428), (0.428, 0.468), (0.468, 0.529)];

/// Vertices of the feasible polygon in `(phi, beta1)` order, counterclockwise.
pub fn polygon_vertices(b: &AprioriBox) -> Vec<(f64, f64)> {
    // lines a·phi + c·beta1 = k
    let lines: [(f64, f64, f64); 8] = [
        (1.0, 0.0, b.phi.lo),
        (1.0, 0.0, b.phi.hi),
        (0.0, 1.0, b.beta1.lo),
        (0.0, 1.0, b.beta1.hi),
        (-3.0, -2.0, b.beta2.lo - 3.0),
        (-3.0, -2.0, b.beta2.hi - 3.0),
        (3.0, 1.0, b.beta3.lo + 2.0),
        (3.0, 1.0, b.beta3.hi + 2.0),
    ];
    let tol = 1e-12;
    let inside = |phi: f64, beta1: f64| {
        let beta2 = 3.0 * (1.0 - phi) - 2.0 * beta1;
        let beta3 = beta1 - 2.0 + 3.0 * phi;
        let within = |x: f64, lo: f64, hi: f64| lo - tol <= x && x <= hi + tol;
        within(phi, b.phi.lo, b.phi.hi)
            && within(beta1, b.beta1.lo, b.beta1.hi)
            && within(beta2, b.beta2.lo, b.beta2.hi)
            && within(beta3, b.beta3.lo, b.beta3.hi)
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, c1, k1) = lines[i];
            let (a2, c2, k2) = lines[j];
            let det = a1 * c2 - a2 * c1;
            if det.abs() < 1e-14 {
                continue;
            }
            let phi = (k1 * c2 - k2 * c1) / det;
            let beta1 = (a1 * k2 - a2 * k1) / det;
            if inside(phi, beta1) && !pts.iter().any(|&(p, q)| (p - phi).abs() < 1e-12 && (q - beta1).abs() < 1e-12) {
                pts.push((phi, beta1));
            }
        }
    }
    let n = pts.len() as f64;
    let (cx, cy) = pts.iter().fold((0.0, 0.0), |(x, y), p| (x + p.0 / n, y + p.1 / n));
    pts.sort_by(|p, q| {
        let ap = (p.1 - cy).atan2(p.0 - cx);
        let aq = (q.1 - cy).atan2(q.0 - cx);
        ap.total_cmp(&aq)
    });
    pts
}

/// Quantity extremized over the polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolygonTarget {
    VMin,
    UOverVMax,
}

/// Extremum found by walking the polygon boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonExtremum {
    pub target: PolygonTarget,
    #[serde(with = "crate::numeric::sig17")]
    pub value: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub phi: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub beta1: f64,
    /// Closed-form vertex value.
    #[serde(with = "crate::numeric::sig17")]
    pub analytic: f64,
}

impl PolygonExtremum {
    pub fn agrees(&self, tol: f64) -> bool {
        (self.value - self.analytic).abs() <= tol
    }
}

fn uv_at(phi: f64, beta1: f64) -> (f64, f64) {
    let beta2 = 3.0 * (1.0 - phi) - 2.0 * beta1;
    let beta3 = beta1 - 2.0 + 3.0 * phi;
    let y = 3.0 * phi - beta1;
    (9.0 * (1.0 - phi) * beta3 / (y * beta2), 1.0 + beta2 * beta2 / (3.0 * y * beta3))
}

/// Minimum of `V` or maximum of `U/V` over the polygon boundary, sampled at
/// `per_edge` points per edge including every vertex, next to the closed
/// form. `U` increases and `V` decreases in each variable, so the extrema
/// sit on the boundary.
pub fn polygon_extremize(b: &AprioriBox, target: PolygonTarget, per_edge: usize) -> PolygonExtremum {
    let verts = polygon_vertices(b);
    let score = |phi: f64, beta1: f64| {
        let (u, v) = uv_at(phi, beta1);
        match target {
            PolygonTarget::VMin => -v,
            PolygonTarget::UOverVMax => u / v,
        }
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for k in 0..verts.len() {
        let (p0, q0) = verts[k];
        let (p1, q1) = verts[(k + 1) % verts.len()];
        for i in 0..=per_edge {
            let t = i as f64 / per_edge as f64;
            let (phi, beta1) = if i == per_edge { (p1, q1) } else { (p0 + t * (p1 - p0), q0 + t * (q1 - q0)) };
            let s = score(phi, beta1);
            if s > best.0 {
                best = (s, phi, beta1);
            }
        }
    }
    let (value, analytic) = match target {
        PolygonTarget::VMin => (-best.0, v_min2::<f64>(b)),
        PolygonTarget::UOverVMax => (best.0, uv_max2::<f64>(b)),
    };
    PolygonExtremum {
        target,
        value,
        phi: best.1,
        beta1: best.2,
        analytic,
    }
}

/// Band value of [`m_bound`] with its band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MBand {
    #[serde(with = "crate::numeric::sig17")]
    pub lo: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub hi: f64,
    /// Upper bound.
    #[serde(with = "crate::numeric::sig17")]
    pub value: f64,
}

/// Everything the separate-monotonicity argument rests on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub v_min: PolygonExtremum,
    pub uv_max: PolygonExtremum,
    pub eq2: Vec<MonotoneCertificate>,
    /// Upper bound on the first equation without `x = 2p + 1` terms at
    /// `beta1_star`.
    #[serde(with = "crate::numeric::sig17")]
    pub eq1_star: f64,
    pub m_bands: Vec<MBand>,
    pub verdict: bool,
}

impl MonotoneReport {
    pub fn compute<S: Scalar>(params: &ModelParams, tables: &Tables<S>) -> Result<Self, DomainError> {
        let b = &params.a_priori;
        let v_min = polygon_extremize(b, PolygonTarget::VMin, 2000);
        let uv_max = polygon_extremize(b, PolygonTarget::UOverVMax, 2000);
        let eq2 = vec![
            eq2_monotone_verdict(MonotoneDirection::Eq2FixedPhi, params, tables)?,
            eq2_monotone_verdict(MonotoneDirection::Eq2FixedBeta1, params, tables)?,
        ];
        let eq1_star = eq1_star_majorant(params, tables).upper();
        // the bands must cover the box
        let mut bands: Vec<(f64, f64)> = M_BANDS.to_vec();
        bands[0].0 = bands[0].0.min(b.beta1.lo);
        let last = bands.len() - 1;
        bands[last].1 = bands[last].1.max(b.beta1.hi);
        let m_bands: Vec<MBand> = bands
            .into_iter()
            .map(|(lo, hi)| MBand {
                lo,
                hi,
                value: m_bound(lo, hi, tables).upper(),
            })
            .collect();
        let verdict = v_min.agrees(1e-7)
            && uv_max.agrees(1e-7)
            && eq2.iter().all(|c| c.verdict)
            && eq1_star + DELTA_NUM < 0.0
            && m_bands.iter().all(|m| m.value + DELTA_NUM < 0.0);
        Ok(MonotoneReport {
            v_min,
            uv_max,
            eq2,
            eq1_star,
            m_bands,
            verdict,
        })
    }
}
