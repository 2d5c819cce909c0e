#![no_main]

use covertsim::qsim::StateSnapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(psi) = StateSnapshot::parse(text) {
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-6);
        let again = StateSnapshot::parse(&serde_json::to_string(&StateSnapshot::from_state(&psi)).unwrap()).expect("re-parse");
        assert!(again.approx_eq(&psi, 1e-12));
    }
});
