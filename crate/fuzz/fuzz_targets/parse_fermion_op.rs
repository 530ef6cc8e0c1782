#![no_main]

use libfuzzer_sys::fuzz_target;
use nrep_core::formats::{parse_fermion_op, write_fermion_op};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(op) = parse_fermion_op(text) {
        let again = parse_fermion_op(&write_fermion_op(&op)).expect("writer output parses");
        assert_eq!(again, op);
    }
});
