#![no_main]

use libfuzzer_sys::fuzz_target;
use sat3bound::params::{AprioriBox, Range};
use sat3bound::root_box::{verify_exclusion, ExclusionTrace, FnPair};

const UNIT: AprioriBox = AprioriBox {
    beta1: Range::new(0.0, 1.0),
    beta2: Range::new(-10.0, 10.0),
    beta3: Range::new(-10.0, 10.0),
    phi: Range::new(0.0, 1.0),
};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(trace) = ExclusionTrace::from_json(text) else {
        return;
    };
    let again = ExclusionTrace::from_json(&trace.to_json()).expect("printed trace parses");
    assert_eq!(again.to_json(), trace.to_json());
    let pair = FnPair(|p: f64, b: f64| 0.9 - p - 0.5 * b, |p: f64, b: f64| 0.6 - p - 0.1 * b);
    if let Ok(report) = verify_exclusion(&trace, &pair, &UNIT) {
        assert_eq!(report.checks.len(), 2 * (trace.k + trace.l) + 2);
    }
});
