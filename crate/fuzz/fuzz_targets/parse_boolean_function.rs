#![no_main]
use boolcorr::format::{boolean_function_to_json, parse_boolean_function};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_boolean_function(text) {
        let again = parse_boolean_function(&boolean_function_to_json(&f)).expect("round trip");
        assert_eq!(again.table(), f.table());
    }
});
