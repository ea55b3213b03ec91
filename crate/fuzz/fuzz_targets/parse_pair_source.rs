#![no_main]
use boolcorr::format::parse_pair_source;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(src) = parse_pair_source(text) {
            // Small valid joints also go through the maximal correlation.
            if src.dx() * src.dy() <= 64 {
                let _ = boolcorr::psi(&src);
            }
        }
    }
});
