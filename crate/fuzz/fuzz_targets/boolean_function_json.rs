#![no_main]

use covertsim::gf2core::BooleanFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(v) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    let Ok(f) = BooleanFunction::from_json(&v) else { return };
    // whatever parses must survive a round trip and evaluate on a few inputs
    let back = BooleanFunction::from_json(&f.to_json()).expect("re-parse");
    assert_eq!(back.to_json(), f.to_json());
    if f.arity() <= 16 {
        for x in 0..(1u64 << f.arity()).min(64) {
            assert_eq!(f.eval(x).ok(), back.eval(x).ok());
        }
    }
});
