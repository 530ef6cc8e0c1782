#![no_main]

use libfuzzer_sys::fuzz_target;
use nrep_core::formats::{parse_two_rdm, write_two_rdm};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rho) = parse_two_rdm(text) {
        let again = parse_two_rdm(&write_two_rdm(&rho)).expect("writer output parses");
        assert_eq!(again.matrix(), rho.matrix());
    }
});
