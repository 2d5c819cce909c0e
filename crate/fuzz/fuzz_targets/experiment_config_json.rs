#![no_main]

use covertsim::expcli::{resource_table, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_json_str(text) {
        let again = ExperimentConfig::from_json_str(&serde_json::to_string(&cfg).unwrap()).expect("re-parse");
        assert_eq!(again, cfg);
        // formula evaluation must not panic on any accepted config
        let _ = resource_table(&cfg);
    }
});
