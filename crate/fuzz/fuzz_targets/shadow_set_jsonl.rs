#![no_main]

use covertsim::covertsq::ShadowSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = ShadowSet::from_jsonl(text) {
        let again = ShadowSet::from_jsonl(&set.to_jsonl()).expect("re-parse");
        assert_eq!(again.len(), set.len());
    }
});
