#![no_main]

use covertsim::tasks::{ForrelationInstance, SimonInstance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(v) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    if let Ok(i) = ForrelationInstance::from_json(&v) {
        assert_eq!(ForrelationInstance::from_json(&i.to_json()).expect("re-parse"), i);
    }
    if let Ok(i) = SimonInstance::from_json(&v) {
        assert_eq!(SimonInstance::from_json(&i.to_json()).expect("re-parse"), i);
    }
});
