#![no_main]

use libfuzzer_sys::fuzz_target;
use sat3bound::formula_lab::Formula;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = Formula::from_ocnf(text) {
        assert_eq!(f.m(), f.clauses().len());
        let again = Formula::from_ocnf(&f.to_ocnf()).expect("printed formula parses");
        assert_eq!(again, f);
    }
});
