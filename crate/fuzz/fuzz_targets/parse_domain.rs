#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Must reject malformed input with an error, never panic; valid
        // input must survive a write/parse round trip.
        if let Ok(spec) = domkit::formats::parse_domain(text) {
            let rewritten = domkit::formats::write_domain(&spec);
            domkit::formats::parse_domain(&rewritten).expect("writer output must re-parse");
        }
    }
});
