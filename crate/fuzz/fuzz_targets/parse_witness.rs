#![no_main]

use libfuzzer_sys::fuzz_target;
use nrep_core::formats::parse_witness;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(w) = parse_witness(text) {
            let _ = w.marginal(0);
        }
    }
});
