#![no_main]
use boolcorr::format::{parse_f64_list, parse_usize_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = parse_f64_list(text) {
            assert!(v.iter().all(|x| x.is_finite()));
        }
        let _ = parse_usize_list(text);
    }
});
