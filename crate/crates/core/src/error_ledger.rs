//! Finite-size error factors.
//!
//! Replacing the unknown occurrence proportions of a typical formula by their
//! limits costs a multiplicative slack on the per-variable rate. Every factor
//! here is computed in log domain and reported as an upper bound (or a lower
//! bound for the low ends of the widened intervals).

use serde::{Deserialize, Serialize};

use crate::distribution::{p2, p3, triangle_size};
use crate::error::{ConfigError, DomainError};
use crate::numeric::exact::{factorial, ln_big};
use crate::numeric::{ArithmeticMode, Scalar};
use crate::params::{AprioriBox, ModelParams, Range};

/// Largest argument for which the `y^y / x^x` sandwich is stated.
pub const L_DOMAIN_MAX: f64 = 0.05;

/// `(2η)^{−2η}` for `0 < η <= 0.05`.
pub fn l_fn(eta: f64) -> Result<f64, DomainError> {
    if !(eta > 0.0 && eta <= L_DOMAIN_MAX) {
        return Err(DomainError::OutOfDomain {
            name: "eta",
            value: eta,
            domain: "(0, 0.05]",
        });
    }
    Ok(ln_l(eta).exp())
}

/// `ln L(η) = −2η ln(2η)`, with the limit 0 at `η = 0`.
fn ln_l<S: Scalar>(eta: S) -> S {
    if eta.upper() == 0.0 {
        return S::exact(0.0);
    }
    let two_eta = S::exact(2.0) * eta;
    -(two_eta * two_eta.ln())
}

/// Whether a bound may only be used from above or from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

/// A number together with the side from which it bounds the true value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    #[serde(with = "crate::numeric::sig17")]
    pub value: f64,
    pub direction: Direction,
}

impl Bound {
    pub fn upper<S: Scalar>(x: S) -> Self {
        Bound {
            value: x.upper(),
            direction: Direction::Upper,
        }
    }

    pub fn lower<S: Scalar>(x: S) -> Self {
        Bound {
            value: x.lower(),
            direction: Direction::Lower,
        }
    }
}

/// `ln(λ^k / k!)` with the exact factorial.
fn ln_poisson_weight<S: Scalar>(lambda: S, k: u32) -> S {
    S::exact(k as f64) * lambda.ln() - ln_big::<S>(&factorial(k))
}

fn lambda_bounds<S: Scalar>(params: &ModelParams) -> (S, S) {
    let three = S::exact(3.0);
    (three * S::decimal(params.c_min), three * S::decimal(params.c_max))
}

/// `λ_max^{x+1}/(x+1)! + ε D`.
pub fn r1<S: Scalar>(params: &ModelParams) -> S {
    let (_, l_max) = lambda_bounds::<S>(params);
    let x = params.x_max;
    ln_poisson_weight(l_max, x + 1).exp()
        + S::decimal(params.epsilon) * S::exact(triangle_size(x) as f64)
}

/// `λ_max^{x+1}/x! + ε P₂(x)`.
pub fn r2<S: Scalar>(params: &ModelParams) -> S {
    let (_, l_max) = lambda_bounds::<S>(params);
    let x = params.x_max;
    (ln_poisson_weight(l_max, x) + l_max.ln()).exp()
        + S::decimal(params.epsilon) * S::exact(p2(x as f64))
}

/// `λ_max^x/x! + (ε/λ_min)(P₂(x) + P₃(x))`.
pub fn r3<S: Scalar>(params: &ModelParams) -> S {
    let (l_min, l_max) = lambda_bounds::<S>(params);
    let x = params.x_max;
    let poly = S::exact(p2(x as f64)) + S::exact(p3(x as f64));
    ln_poisson_weight(l_max, x).exp() + S::decimal(params.epsilon) / l_min * poly
}

/// Shifts each bound outward by its multiple of `R₃`: `phi` by 1, `beta1` by
/// 3, `beta2` by 9 and `beta3` by 6.
pub fn widen_intervals(gamma: &AprioriBox, r3: f64) -> AprioriBox {
    let widen = |r: Range, k: f64| Range::new(r.lo - k * r3, r.hi + k * r3);
    AprioriBox {
        beta1: widen(gamma.beta1, 3.0),
        beta2: widen(gamma.beta2, 9.0),
        beta3: widen(gamma.beta3, 6.0),
        phi: widen(gamma.phi, 1.0),
    }
}

/// Logarithms of the slack factors.
#[derive(Clone, Copy, Debug)]
pub struct LogFactors<S> {
    pub r1: S,
    pub r2: S,
    pub r3: S,
    pub g1: S,
    pub ga: S,
    pub gb: S,
    pub gc: S,
    pub g2: S,
    /// `ln(G₁ G₂ e^{2εD/e})`.
    pub prefactor: S,
    /// `(ρ + εΔ) ln 2`.
    pub unbalancing: S,
}

/// Checks that an `L` argument lies in the lemma's domain.
fn l_arg<S: Scalar>(name: &'static str, eta: S) -> Result<S, ConfigError> {
    if eta.upper() > L_DOMAIN_MAX || eta.lower() < 0.0 {
        return Err(ConfigError::Other(format!(
            "L argument {name} = {:e} outside (0, 0.05]",
            eta.central()
        )));
    }
    Ok(eta)
}

/// All slack factors in log domain. `rho` is the balanced-column tail mass.
pub fn log_factors<S: Scalar>(params: &ModelParams, rho: S) -> Result<LogFactors<S>, ConfigError> {
    let (l_min, l_max) = lambda_bounds::<S>(params);
    let eps = S::decimal(params.epsilon);
    let x = params.x_max;
    let xf = S::exact(x as f64);
    let one = S::exact(1.0);
    let ln2 = S::ln2();
    let c_max = S::decimal(params.c_max);

    let r1 = r1::<S>(params);
    let r2 = r2::<S>(params);
    let r3 = r3::<S>(params);
    let p3x = S::exact(p3(x as f64));

    let e = S::e();
    let l = |name, eta: S| l_arg(name, eta).map(ln_l);
    let g1 = r1 * ln2
        + l("R1", r1)?
        + l("R2", r2)?
        + r2 * (S::exact(18.0) * e / l_min).ln()
        + S::exact(6.0) * l("R2/6", r2 / S::exact(6.0))?
        + c_max
            * (l("3 eps P3 / lambda_min", S::exact(3.0) * eps * p3x / l_min)?
                + l("6 eps P3 / lambda_min", S::exact(6.0) * eps * p3x / l_min)?)
        + c_max
            * (S::exact(2.0) * l("3 R3", S::exact(3.0) * r3)?
                + l("9 R3", S::exact(9.0) * r3)?
                + l("6 R3", S::exact(6.0) * r3)?
                + r3 * S::exact(3.0).ln());

    let ga = eps * S::exact(12.0).ln()
        + xf / S::exact(8.0) * (xf * xf + S::exact(2.0) * xf - one) * eps * ln2
        + xf / S::exact(4.0) * (xf + S::exact(3.0)) * l("eps", eps)?;

    let gb = xf / S::exact(4.0) * (xf + one) * ln_one_plus(eps);

    // evaluated at λ_max: e^{−λ}(λ/2)^x increases in λ below x
    let inner = -l_max + xf * (l_max.ln() - ln2);
    let gc = eps
        * ((xf + S::exact(2.0)) / S::exact(2.0) * (xf + one).ln()
            + xf / S::exact(24.0) * (xf + one) * (xf - S::exact(7.0)) * ln2
            + (xf + one) / S::exact(4.0) * ((xf + S::exact(4.0)) * ln2 + (xf + S::exact(8.0)) * inner));

    let g2 = ga + gb + gc;
    let d = S::exact(triangle_size(x) as f64);
    let prefactor = g1 + g2 + S::exact(2.0) * eps * d / e;
    let delta = S::exact(0.5 * (x as f64 / 2.0 + 1.0));
    let unbalancing = (rho + eps * delta) * ln2;
    Ok(LogFactors {
        r1,
        r2,
        r3,
        g1,
        ga,
        gb,
        gc,
        g2,
        prefactor,
        unbalancing,
    })
}

/// `ln(1 + t)` for small `t >= 0`, enclosed by `[t − t²/2, t]`.
fn ln_one_plus<S: Scalar>(t: S) -> S {
    if S::MODE == ArithmeticMode::Float {
        return S::exact(t.central().ln_1p());
    }
    let lo = t - t * t / S::exact(2.0);
    lo.hull(t)
}

/// Upper bound on `e^y − 1` for `0 <= y <= 1`, as `y e^y`.
fn excess<S: Scalar>(y: S) -> S {
    y * y.exp()
}

/// One use of `L` inside the factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LEvaluation {
    pub label: String,
    #[serde(with = "crate::numeric::sig17")]
    pub eta: f64,
    #[serde(with = "crate::numeric::sig17")]
    pub value: f64,
}

/// The error factors of one configuration, each tagged with its direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub mode: ArithmeticMode,
    pub r1: Bound,
    pub r2: Bound,
    pub r3: Bound,
    pub g1: Bound,
    pub ga: Bound,
    pub gb: Bound,
    pub gc: Bound,
    pub g2: Bound,
    /// `G₁ G₂ e^{2εD/e}`.
    pub prefactor: Bound,
    pub log_prefactor: Bound,
    /// `prefactor − 1`, kept separately since it is far below one ulp of 1.
    pub prefactor_excess: Bound,
    /// `2^{ρ + εΔ}`.
    pub unbalancing: Bound,
    pub log_unbalancing: Bound,
    pub unbalancing_excess: Bound,
    /// The a-priori box widened by `R₃`; low ends are lower bounds, high ends
    /// upper bounds.
    pub widened: AprioriBox,
    pub l_evaluations: Vec<LEvaluation>,
}

impl ErrorBudget {
    pub fn compute<S: Scalar>(params: &ModelParams, rho: S) -> Result<Self, ConfigError> {
        params.validate()?;
        let f = log_factors(params, rho)?;
        let exp_up = |x: S| Bound::upper(x.exp());
        let r3_up = f.r3.upper();
        let widened = widen_intervals(&params.a_priori, r3_up);
        let eps = params.epsilon;
        let mut l_evaluations = Vec::new();
        let (l_min, _) = lambda_bounds::<f64>(params);
        let p3x = p3(params.x_max as f64);
        let r1u = f.r1.upper();
        let r2u = f.r2.upper();
        for (label, eta) in [
            ("R1", r1u),
            ("R2", r2u),
            ("R2/6", r2u / 6.0),
            ("3 eps P3 / lambda_min", 3.0 * eps * p3x / l_min),
            ("6 eps P3 / lambda_min", 6.0 * eps * p3x / l_min),
            ("3 R3", 3.0 * r3_up),
            ("9 R3", 9.0 * r3_up),
            ("6 R3", 6.0 * r3_up),
            ("eps", eps),
        ] {
            let value = if eta == 0.0 {
                1.0
            } else {
                l_fn(eta).map_err(|e| ConfigError::Other(e.to_string()))?
            };
            l_evaluations.push(LEvaluation {
                label: label.to_string(),
                eta,
                value,
            });
        }
        Ok(ErrorBudget {
            mode: S::MODE,
            r1: Bound::upper(f.r1),
            r2: Bound::upper(f.r2),
            r3: Bound::upper(f.r3),
            g1: exp_up(f.g1),
            ga: exp_up(f.ga),
            gb: exp_up(f.gb),
            gc: exp_up(f.gc),
            g2: exp_up(f.g2),
            prefactor: exp_up(f.prefactor),
            log_prefactor: Bound::upper(f.prefactor),
            prefactor_excess: Bound::upper(excess(f.prefactor)),
            unbalancing: exp_up(f.unbalancing),
            log_unbalancing: Bound::upper(f.unbalancing),
            unbalancing_excess: Bound::upper(excess(f.unbalancing)),
            widened,
            l_evaluations,
        })
    }

    /// `ln` of the full multiplicative slack applied to the rate majorant.
    pub fn log_total(&self) -> f64 {
        self.log_prefactor.value + self.log_unbalancing.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::balanced_tail;
    use crate::numeric::Interval;

    fn cert_budget() -> ErrorBudget {
        let p = ModelParams::certification();
        ErrorBudget::compute(&p, balanced_tail(p.x_max, p.lambda)).unwrap()
    }

    #[test]
    fn l_domain_guard() {
        assert!(l_fn(0.5).is_err());
        assert!(l_fn(0.0).is_err());
        assert!(l_fn(0.05).is_ok());
        assert!(l_fn(1e-9).unwrap() - 1.0 < 5e-8);
        assert!(l_fn(0.01).unwrap() >= 1.0);
    }

    #[test]
    fn remainder_bounds() {
        let general = ModelParams::with_range(3.0, 5.0, 56, 1e-15);
        assert!(r2::<f64>(&general) < 1.54e-8);
        assert!(r3::<f64>(&general) < 1.035e-9);
        let cert = ModelParams::certification();
        assert!(r3::<f64>(&cert) < 1.104e-11);
    }

    #[test]
    fn zero_eps_leaves_poisson_tails() {
        let p = ModelParams::at_density(4.506, 56, 0.0);
        let lam: f64 = 13.518;
        let r3 = r3::<f64>(&p);
        let direct = (56.0 * lam.ln() - ln_big::<f64>(&factorial(56))).exp();
        assert!(r3 > 0.0 && (r3 - direct).abs() <= 1e-15 * direct);
        let f = log_factors(&p, 0.0).unwrap();
        assert_eq!((f.ga, f.gb, f.gc), (0.0, 0.0, 0.0));
    }

    #[test]
    fn widening() {
        let g = AprioriBox::GENERAL;
        let w = widen_intervals(&g, 1e-9);
        assert_eq!(w.beta1, Range::new(0.21 - 3e-9, 0.65 + 3e-9));
        assert_eq!(w.beta3, Range::new(0.017 - 6e-9, 0.32 + 6e-9));
        assert_eq!(widen_intervals(&g, 0.0), g);
    }

    #[test]
    fn prefactor_below_target() {
        let b = cert_budget();
        assert!(b.prefactor_excess.value < 1e-7, "{:?}", b.prefactor_excess);
        for g in [b.g1, b.ga, b.gb, b.gc, b.g2, b.prefactor] {
            assert!(g.value >= 1.0 && g.value.is_finite());
        }
    }

    #[test]
    fn gb_closed_form_dominates_product() {
        let eps: f64 = 1e-15;
        let x_max = 56u32;
        let product: f64 = (0..=x_max).map(|x| (x / 2) as f64 * eps.ln_1p()).sum();
        let bound = x_max as f64 / 4.0 * (x_max as f64 + 1.0) * eps.ln_1p();
        assert!(product <= bound);
    }

    #[test]
    fn interval_ledger_encloses_float() {
        let p = ModelParams::certification();
        let f = log_factors::<f64>(&p, balanced_tail(p.x_max, p.lambda)).unwrap();
        let i = log_factors::<Interval>(&p, balanced_tail(p.x_max, Interval::point(p.lambda))).unwrap();
        assert!(i.prefactor.contains(f.prefactor));
        assert!(i.prefactor.hi() < 2e-7);
        assert!(i.r3.contains(f.r3));
    }

    #[test]
    fn monotone_in_eps() {
        let mut last = 0.0;
        for eps in [1e-16, 1e-15, 1e-12] {
            let p = ModelParams::at_density(4.506, 56, eps);
            let b = ErrorBudget::compute(&p, 0.0).unwrap();
            assert!(b.log_prefactor.value >= last);
            last = b.log_prefactor.value;
        }
    }

    #[test]
    fn gc_inner_bracket_increases_in_lambda() {
        let x = 56.0;
        let inner = |l: f64| -l + x * (l / 2.0).ln();
        let mut prev = inner(9.0);
        for k in 1..=600 {
            let v = inner(9.0 + k as f64 * 0.01);
            assert!(v > prev);
            prev = v;
        }
    }
}
