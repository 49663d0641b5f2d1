#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(parsed) = hyperroute::format::parse_matching(text) {
            let _ = hyperroute::format::write_matching(&parsed);
        }
    }
});
