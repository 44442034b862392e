use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sat3bound::distribution::Tables;
use sat3bound::numeric::{Interval, Scalar};
use sat3bound::params::{ModelParams, DELTA_NUM};
use sat3bound::root_box::{
    solve_reference, spiral_localize, verify_exclusion, CheckFamily, EquationPair, ExclusionTrace, Stationarity,
};
use sat3bound::stationarity::Rectangle;

fn setup() -> (ModelParams, Tables) {
    let p = ModelParams::certification();
    let t = Tables::build(&p).unwrap();
    (p, t)
}

#[test]
fn certification_rectangle_is_tight_and_verified() {
    let (p, t) = setup();
    let pair = Stationarity::new(&t);
    let trace = spiral_localize(&pair, &p.a_priori, 4e-7).unwrap();
    assert!(trace.diagnostic.is_none(), "{:?}", trace.diagnostic);
    let outer = Rectangle::new(0.5638320, 0.5638326, 0.4465139, 0.4465149);
    assert!(outer.contains_rect(&trace.rectangle), "{:?}", trace.rectangle);
    assert!(verify_exclusion(&trace, &pair, &p.a_priori).unwrap().passed());

    let root = solve_reference(&pair, &trace.rectangle).unwrap();
    assert!(root.eq1.abs() < 1e-10 && root.eq2.abs() < 1e-10, "{root:?}");
    assert!(trace.rectangle.contains(root.phi, root.beta1));
}

#[test]
fn coarse_target_needs_few_steps() {
    let (p, t) = setup();
    let pair = Stationarity::new(&t);
    let trace = spiral_localize(&pair, &p.a_priori, 0.05).unwrap();
    assert!(trace.k <= 8 && trace.l <= 8, "K = {}, L = {}", trace.k, trace.l);
    assert!(trace.rectangle.phi_width() <= 0.05 && trace.rectangle.beta1_width() <= 0.05);
    assert!(verify_exclusion(&trace, &pair, &p.a_priori).unwrap().passed());
}

#[test]
fn truncation_to_published_rectangle_verifies() {
    let (p, t) = setup();
    let pair = Stationarity::new(&t);
    let trace = spiral_localize(&pair, &p.a_priori, 1e-8).unwrap();
    let published = Rectangle::new(0.56383217, 0.56383249, 0.44651403, 0.44651478);
    let k = (0..=trace.k)
        .find(|&i| trace.phi_minus[i] >= published.phi_lo && trace.beta_plus[i] <= published.beta1_hi)
        .unwrap();
    let l = (0..=trace.l)
        .find(|&j| trace.phi_plus[j] <= published.phi_hi && trace.beta_minus[j] >= published.beta1_lo)
        .unwrap();
    let cut = trace.truncated(k, l);
    assert!(published.contains_rect(&cut.rectangle));
    assert!(verify_exclusion(&cut, &pair, &p.a_priori).unwrap().passed());
}

#[test]
fn interval_reverification_agrees() {
    let (p, t) = setup();
    let ti: Tables<Interval> = Tables::build(&p).unwrap();
    let trace = spiral_localize(&Stationarity::new(&t), &p.a_priori, 1e-6).unwrap();
    let report = verify_exclusion(&trace, &Stationarity::new(&ti), &p.a_priori).unwrap();
    assert!(report.passed(), "{:?}", report.failure());
    for (a, b) in report.checks.iter().zip(&trace.sign_checks) {
        assert!((a.margin - b.margin).abs() < 1e-10);
    }
}

#[test]
fn trace_json_replays() {
    let (p, t) = setup();
    let pair = Stationarity::new(&t);
    let trace = spiral_localize(&pair, &p.a_priori, 1e-4).unwrap();
    let back = ExclusionTrace::from_json(&trace.to_json()).unwrap();
    assert_eq!(back, trace);
    let report = verify_exclusion(&back, &pair, &p.a_priori).unwrap();
    assert_eq!(report.checks, trace.sign_checks);
}

/// Between consecutive minus-side witnesses no point is a common root: above
/// the next beta witness eq2 is below its recorded value, below it eq1 is
/// above its recorded value. Likewise on the plus side.
#[test]
fn excluded_bands_are_root_free() {
    let (p, t) = setup();
    let pair = Stationarity::new(&t);
    let trace = spiral_localize(&pair, &p.a_priori, 1e-6).unwrap();
    let margin_of = |fam: CheckFamily, i: usize| {
        trace
            .sign_checks
            .iter()
            .find(|c| c.family == fam && c.index == i)
            .unwrap()
            .margin
    };
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let bands: Vec<usize> = (0..trace.k).step_by(5).collect();
    for &i in &bands {
        let bound = margin_of(CheckFamily::Eq2Minus, i).min(margin_of(CheckFamily::Eq1Minus, i + 1));
        let (lo, hi) = (trace.phi_minus[i], trace.phi_minus[i + 1]);
        let mut sampled = 0;
        while sampled < 100 {
            let phi = rng.random_range(lo..=hi);
            let Some(sec) = p.a_priori.beta1_section(phi) else { continue };
            let beta1 = rng.random_range(sec.lo..=sec.hi);
            let e1 = pair.eq1(phi, beta1).unwrap().central();
            let e2 = pair.eq2(phi, beta1).unwrap().central();
            assert!(e1.abs().max(e2.abs()) >= bound, "band {i} at ({phi}, {beta1})");
            sampled += 1;
        }
    }
    for j in (0..trace.l).step_by(5) {
        let bound = margin_of(CheckFamily::Eq2Plus, j).min(margin_of(CheckFamily::Eq1Plus, j + 1));
        let (lo, hi) = (trace.phi_plus[j + 1], trace.phi_plus[j]);
        for _ in 0..100 {
            let phi = rng.random_range(lo..=hi);
            let sec = p.a_priori.beta1_section(phi).unwrap();
            let beta1 = rng.random_range(sec.lo..=sec.hi);
            let e1 = pair.eq1(phi, beta1).unwrap().central();
            let e2 = pair.eq2(phi, beta1).unwrap().central();
            assert!(e1.abs().max(e2.abs()) >= bound, "band {j} at ({phi}, {beta1})");
        }
    }
}

/// If a residual is positive at A and B <= A componentwise, it is positive
/// at B. Checked for eq2 everywhere and for eq1 where it is positive, on a
/// grid over the feasible polygon.
#[test]
fn sign_preservation_on_grid() {
    let (p, t) = setup();
    let pair = Stationarity::new(&t);
    let b = p.a_priori;
    let n = 40;
    let mut pts = Vec::new();
    for i in 0..n {
        let phi = b.phi.lerp((i as f64 + 0.5) / n as f64);
        let Some(sec) = b.beta1_section(phi) else { continue };
        for j in 0..n {
            let beta1 = sec.lerp((j as f64 + 0.5) / n as f64);
            let e1 = pair.eq1(phi, beta1).unwrap().central();
            let e2 = pair.eq2(phi, beta1).unwrap().central();
            pts.push((phi, beta1, e1, e2));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut pairs = 0;
    while pairs < 10_000 {
        let a = pts[rng.random_range(0..pts.len())];
        let c = pts[rng.random_range(0..pts.len())];
        if !(c.0 <= a.0 && c.1 <= a.1) {
            continue;
        }
        pairs += 1;
        if a.2 > DELTA_NUM {
            assert!(c.2 > 0.0, "eq1 at {c:?} below {a:?}");
        }
        if a.3 > DELTA_NUM {
            assert!(c.3 > 0.0, "eq2 at {c:?} below {a:?}");
        }
    }
}
