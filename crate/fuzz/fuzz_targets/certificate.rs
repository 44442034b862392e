#![no_main]

use libfuzzer_sys::fuzz_target;
use sat3bound::certifier::{replay, Certificate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cert) = Certificate::from_json(text) else {
        return;
    };
    let again = Certificate::from_json(&cert.to_json()).expect("printed certificate parses");
    assert_eq!(again.to_json(), cert.to_json());
    // replay rebuilds the tables; keep each run short
    if cert.params.x_max <= 60 {
        let _ = replay(&cert);
    }
});
