//! Replays the fuzz corpus through the same round-trip checks the fuzz
//! targets make, so the seeds stay meaningful on a stable toolchain.

use std::path::{Path, PathBuf};

use nrep_core::formats::{
    parse_fermion_op, parse_n_density, parse_n_state, parse_spin_hamiltonian, parse_two_rdm,
    parse_witness, write_fermion_op, write_n_density, write_n_state, write_two_rdm,
};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

/// Every seed directory should hold at least one valid and one invalid input.
fn check_mix(target: &str, ok: usize, total: usize) {
    assert!(ok > 0 && ok < total, "{target}: {ok}/{total} seeds parse");
}

#[test]
fn fermion_op_seeds() {
    let all = seeds("parse_fermion_op");
    let mut ok = 0;
    for (p, text) in &all {
        if let Ok(op) = parse_fermion_op(text) {
            ok += 1;
            let again = parse_fermion_op(&write_fermion_op(&op)).unwrap();
            assert_eq!(again, op, "{}", p.display());
        }
    }
    check_mix("parse_fermion_op", ok, all.len());
}

#[test]
fn spin_hamiltonian_seeds() {
    let all = seeds("parse_spin_hamiltonian");
    let mut ok = 0;
    for (p, text) in &all {
        if let Ok(h) = parse_spin_hamiltonian(text) {
            ok += 1;
            assert_eq!(parse_spin_hamiltonian(&h.to_text()).unwrap(), h, "{}", p.display());
        }
    }
    check_mix("parse_spin_hamiltonian", ok, all.len());
}

#[test]
fn two_rdm_seeds() {
    let all = seeds("parse_two_rdm");
    let mut ok = 0;
    for (p, text) in &all {
        if let Ok(rho) = parse_two_rdm(text) {
            ok += 1;
            let again = parse_two_rdm(&write_two_rdm(&rho)).unwrap();
            assert_eq!(again.matrix(), rho.matrix(), "{}", p.display());
        }
    }
    check_mix("parse_two_rdm", ok, all.len());
}

#[test]
fn state_seeds() {
    let all = seeds("parse_state");
    let mut ok = 0;
    for (p, text) in &all {
        if let Ok(psi) = parse_n_state(text) {
            ok += 1;
            let again = parse_n_state(&write_n_state(&psi)).unwrap();
            assert_eq!(again.basis().len(), psi.basis().len(), "{}", p.display());
        }
        if let Ok(sigma) = parse_n_density(text) {
            ok += 1;
            let again = parse_n_density(&write_n_density(&sigma)).unwrap();
            assert_eq!(again.matrix(), sigma.matrix(), "{}", p.display());
        }
    }
    check_mix("parse_state", ok, all.len());
}

#[test]
fn witness_seeds() {
    let all = seeds("parse_witness");
    let mut ok = 0;
    for (_, text) in &all {
        if let Ok(w) = parse_witness(text) {
            ok += 1;
            assert!(w.block_count() > 0);
            let _ = w.marginal(0);
        }
    }
    check_mix("parse_witness", ok, all.len());
}
