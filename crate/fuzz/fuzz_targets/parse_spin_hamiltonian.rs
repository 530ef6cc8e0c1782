#![no_main]

use libfuzzer_sys::fuzz_target;
use nrep_core::formats::parse_spin_hamiltonian;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = parse_spin_hamiltonian(text) {
        let again = parse_spin_hamiltonian(&h.to_text()).expect("writer output parses");
        assert_eq!(again, h);
    }
});
