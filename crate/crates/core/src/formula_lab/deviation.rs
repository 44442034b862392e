use crate::error::DomainError;

/// `h(q, t) = (q+t) ln(1 + t/q) + (1−q−t) ln(1 − t/(1−q))` for
/// `t <= 1 − q`, `+inf` beyond. This is the Kullback-Leibler divergence
/// `D(q+t ‖ q)`.
pub fn h(q: f64, t: f64) -> f64 {
    if t > 1.0 - q {
        return f64::INFINITY;
    }
    let r = 1.0 - q - t;
    let tail = if r == 0.0 { 0.0 } else { r * (-t / (1.0 - q)).ln_1p() };
    (q + t) * (t / q).ln_1p() + tail
}

/// `c(q, t) = min(h(q, t), h(1 − q, t))`: a binomial proportion with mean `q`
/// deviates by at least `t` with probability at most `2 exp(−c N)`.
pub fn binomial_large_deviation(q: f64, t: f64) -> Result<f64, DomainError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(DomainError::OutOfDomain {
            name: "q",
            value: q,
            domain: "(0, 1)",
        });
    }
    if !(t > 0.0) {
        return Err(DomainError::OutOfDomain {
            name: "t",
            value: t,
            domain: "(0, inf)",
        });
    }
    Ok(h(q, t).min(h(1.0 - q, t)))
}

/// Smallest deviation `t` with `2 exp(−c(q, t) samples) <= alpha`.
pub fn deviation_for_confidence(q: f64, samples: f64, alpha: f64) -> Result<f64, DomainError> {
    let need = (2.0 / alpha).ln() / samples;
    let holds = |t: f64| binomial_large_deviation(q, t).map(|c| c >= need);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if !holds(hi)? {
        return Ok(f64::INFINITY);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if mid > 0.0 && holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn beyond_both_tails_is_infinite() {
        assert_eq!(binomial_large_deviation(0.3, 0.8).unwrap(), f64::INFINITY);
        assert!(binomial_large_deviation(0.3, 0.5).unwrap().is_finite());
        assert!(binomial_large_deviation(0.0, 0.1).is_err());
        assert!(binomial_large_deviation(0.5, 0.0).is_err());
    }

    #[test]
    fn matches_kl_quadrature() {
        // h(q, 0) = 0 and d/dt h(q, t) = ln((q+t)(1−q) / (q(1−q−t)))
        let (q, t) = (0.5, 0.1);
        let steps = 1_000_000;
        let ds = t / steps as f64;
        let integral: f64 = (0..steps)
            .map(|i| {
                let s = (i as f64 + 0.5) * ds;
                (((q + s) * (1.0 - q)) / (q * (1.0 - q - s))).ln() * ds
            })
            .sum();
        assert!((h(q, t) - integral).abs() < 1e-12, "{} vs {integral}", h(q, t));
        let closed = 0.6 * (0.6f64 / 0.5).ln() + 0.4 * (0.4f64 / 0.5).ln();
        assert!((h(q, t) - closed).abs() < 1e-15);
    }

    #[test]
    fn confidence_inversion() {
        let t = deviation_for_confidence(0.05, 5e6, 1e-3 / 45.0).unwrap();
        let c = binomial_large_deviation(0.05, t).unwrap();
        assert!((2.0 * (-c * 5e6).exp() - 1e-3 / 45.0).abs() < 1e-9);
        // Gaussian scale sqrt(2 q (1−q) ln(2/alpha) / N)
        let g = (2.0 * 0.05 * 0.95 * (2.0 * 45.0 / 1e-3f64).ln() / 5e6).sqrt();
        assert!((t / g - 1.0).abs() < 0.05, "{t} {g}");
    }

    proptest! {
        #[test]
        fn positive_inside_the_range(q in 0.01f64..0.99, frac in 0.01f64..0.99) {
            let t = frac * q.min(1.0 - q);
            prop_assert!(binomial_large_deviation(q, t).unwrap() > 0.0);
        }

        #[test]
        fn increasing_in_t(q in 0.01f64..0.99, a in 0.001f64..0.5, b in 0.001f64..0.5) {
            let (a, b) = (a.min(b), a.max(b));
            prop_assume!(b - a > 1e-6);
            prop_assert!(binomial_large_deviation(q, a).unwrap() <= binomial_large_deviation(q, b).unwrap());
        }
    }
}
