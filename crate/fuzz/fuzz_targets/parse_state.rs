#![no_main]

use libfuzzer_sys::fuzz_target;
use nrep_core::formats::{parse_n_density, parse_n_state, write_n_density, write_n_state};

// n-state and n-density share the header and line grammar
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(psi) = parse_n_state(text) {
        let again = parse_n_state(&write_n_state(&psi)).expect("writer output parses");
        assert_eq!(again.basis().len(), psi.basis().len());
    }
    if let Ok(sigma) = parse_n_density(text) {
        let again = parse_n_density(&write_n_density(&sigma)).expect("writer output parses");
        assert_eq!(again.matrix(), sigma.matrix());
    }
});
