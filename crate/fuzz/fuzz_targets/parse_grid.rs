#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = domkit::formats::parse_grid(text) {
            let rewritten = domkit::formats::write_grid(&grid);
            domkit::formats::parse_grid(&rewritten).expect("writer output must re-parse");
        }
    }
});
