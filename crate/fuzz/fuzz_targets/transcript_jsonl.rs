#![no_main]

use covertsim::oracles::Transcript;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = Transcript::from_jsonl(text) {
        let again = Transcript::from_jsonl(&t.to_jsonl()).expect("re-parse");
        assert_eq!(again.to_jsonl(), t.to_jsonl());
    }
});
