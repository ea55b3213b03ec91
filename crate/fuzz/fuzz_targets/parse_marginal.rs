#![no_main]
use boolcorr::format::{marginal_to_json, parse_marginal};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_marginal(text) {
        let again = parse_marginal(&marginal_to_json(&m)).expect("round trip");
        assert_eq!(again.probs(), m.probs());
    }
});
