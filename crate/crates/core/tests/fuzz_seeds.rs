//! Runs the checked-in fuzz corpus through the properties the fuzz targets
//! assert, so the seeds stay meaningful without a nightly toolchain.

use std::fs;
use std::path::PathBuf;

use sat3bound::certifier::{replay, Certificate, CertificateError};
use sat3bound::formula_lab::Formula;
use sat3bound::root_box::{ExclusionTrace, TraceError};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn ocnf_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("ocnf") {
        if let Ok(f) = Formula::from_ocnf(&text) {
            parsed += 1;
            assert_eq!(Formula::from_ocnf(&f.to_ocnf()).unwrap(), f, "{name}");
        }
    }
    assert!(parsed >= 3);
    assert!(Formula::from_ocnf("p ocnf 2 1\n1 3 -2 0\n").is_err());
}

#[test]
fn certificate_seeds() {
    let mut verdicts = Vec::new();
    for (name, text) in seeds("certificate") {
        match Certificate::from_json(&text) {
            Ok(cert) => {
                let again = Certificate::from_json(&cert.to_json()).unwrap();
                assert_eq!(again, cert, "{name}");
                assert_eq!(replay(&cert).unwrap(), cert.verdict, "{name}");
                verdicts.push(cert.verdict);
            }
            Err(CertificateError::Schema { found }) => assert_eq!(found, 2, "{name}"),
            Err(CertificateError::Json(_)) => {}
        }
    }
    verdicts.sort();
    assert_eq!(verdicts, vec![false, true]);
}

#[test]
fn trace_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("trace") {
        match ExclusionTrace::from_json(&text) {
            Ok(t) => {
                parsed += 1;
                assert_eq!(ExclusionTrace::from_json(&t.to_json()).unwrap(), t, "{name}");
            }
            Err(e) => assert!(
                matches!(e, TraceError::Length { .. } | TraceError::NotMonotone { .. } | TraceError::Json(_)),
                "{name}: {e:?}"
            ),
        }
    }
    assert_eq!(parsed, 2);
}
