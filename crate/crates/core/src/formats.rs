//! Plain-text file formats. Indices in operator and state files are 1-based
//! modes; matrix files use 0-based `row col` with `row <= col`, the lower
//! triangle implied by Hermiticity. Floats are written with 17 significant
//! digits so that write/read/write is bit-stable.
//!
//! ```text
//! fermion-op d=4
//! (1.0000000000000000e0,0.0000000000000000e0) + 1 2 - 1 2
//!
//! two-rdm d=4 N=2
//! 0 0 1.0000000000000000e0 0.0000000000000000e0
//!
//! n-state d=4 N=2
//! 1100 7.0710678118654757e-1 0.0000000000000000e0
//!
//! n-density d=4 N=2
//! 0 0 1.0000000000000000e0 0.0000000000000000e0
//!
//! witness d=4 blocks=2
//! block
//! 1100 1.0 0.0
//! block
//! 1100 1.0 0.0
//!
//! witness d=4 group=2 repeats=18
//! 11001100 1.0 0.0
//! 00110011 1.0 0.0
//! ```
//!
//! `#` starts a comment in every format.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    format_occupation, parse_occupation, FermionOperator, NSectorDensity, NSectorState,
    SlaterBasis, MAX_MODES,
};
use crate::linalg::{self, CMatrix, CVector};
use crate::rdm::TwoRDM;
use crate::verifier::WitnessBlocks;

pub use crate::hamiltonians::parse_spin_hamiltonian;

/// Largest dense matrix a text file may describe.
pub const MAX_TEXT_MATRIX_DIM: usize = 1024;
/// Largest block (or joint group) a witness file may describe, in qubits.
pub const MAX_WITNESS_QUBITS: usize = 10;

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses `key=value` fields after the expected tag.
fn header<'a>(
    line: Option<(usize, &'a str)>,
    tag: &str,
    keys: &[&str],
) -> Result<(usize, Vec<usize>)> {
    let (no, line) = line.ok_or_else(|| Error::parse(1, format!("missing `{tag}` header")))?;
    let mut fields = line.split_whitespace();
    if fields.next() != Some(tag) {
        return Err(Error::parse(no, format!("expected `{tag}` header")));
    }
    let mut values = Vec::with_capacity(keys.len());
    for key in keys {
        let f = fields
            .next()
            .ok_or_else(|| Error::parse(no, format!("missing `{key}=` in header")))?;
        let v = f
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| Error::parse(no, format!("expected `{key}=`, got `{f}`")))?;
        values.push(
            v.parse()
                .map_err(|_| Error::parse(no, format!("bad value `{v}` for `{key}`")))?,
        );
    }
    if fields.next().is_some() {
        return Err(Error::parse(no, "trailing fields in header"));
    }
    Ok((no, values))
}

fn float(no: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::parse(no, format!("bad number `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(no, format!("non-finite number `{s}`")));
    }
    Ok(v)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

// ---- fermionic operators ----

pub fn write_fermion_op(op: &FermionOperator) -> String {
    let mut out = format!("fermion-op d={}\n", op.d());
    for (mono, coef) in op.terms() {
        let modes = |v: &[usize]| {
            v.iter().map(|m| format!(" {}", m + 1)).collect::<String>()
        };
        out.push_str(&format!(
            "({},{}) +{} -{}\n",
            fmt_f(coef.re),
            fmt_f(coef.im),
            modes(mono.creators()),
            modes(mono.annihilators())
        ));
    }
    out
}

pub fn parse_fermion_op(text: &str) -> Result<FermionOperator> {
    let mut it = lines(text);
    let (_, v) = header(it.next(), "fermion-op", &["d"])?;
    let d = v[0];
    if d == 0 || d > MAX_MODES {
        return Err(Error::parse(1, format!("d must be in 1..={MAX_MODES}")));
    }
    let mut op = FermionOperator::zero(d);
    for (no, line) in it {
        let rest = line
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(no, "term must start with `(re,im)`"))?;
        let close = rest.find(')').ok_or_else(|| Error::parse(no, "unclosed coefficient"))?;
        let (re, im) = rest[..close]
            .split_once(',')
            .ok_or_else(|| Error::parse(no, "coefficient must be `(re,im)`"))?;
        let coef = Complex64::new(float(no, re.trim())?, float(no, im.trim())?);
        let body = rest[close + 1..].trim();
        let body = body
            .strip_prefix('+')
            .ok_or_else(|| Error::parse(no, "expected `+` before the creators"))?;
        let (cre, ann) = body
            .split_once('-')
            .ok_or_else(|| Error::parse(no, "expected `-` before the annihilators"))?;
        let modes = |s: &str| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(m) if (1..=d).contains(&m) => Ok(m - 1),
                    _ => Err(Error::parse(no, format!("bad mode `{t}` for d={d}"))),
                })
                .collect()
        };
        let (cre, ann) = (modes(cre)?, modes(ann)?);
        if cre.len() + ann.len() > 8 {
            return Err(Error::parse(no, "terms of degree above 8 are not supported"));
        }
        op = &op + &FermionOperator::term(d, coef, &cre, &ann)?;
    }
    Ok(op.pruned(0.0))
}

// ---- dense Hermitian matrices ----

fn write_upper(m: &CMatrix, out: &mut String) {
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            let z = m[(r, c)];
            out.push_str(&format!("{} {} {} {}\n", r, c, fmt_f(z.re), fmt_f(z.im)));
        }
    }
}

fn read_upper<'a>(it: impl Iterator<Item = (usize, &'a str)>, dim: usize) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(dim, dim);
    let mut seen = vec![false; dim * dim];
    for (no, line) in it {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::parse(no, "expected `row col re im`"));
        }
        let idx = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v < dim => Ok(v),
                _ => Err(Error::parse(no, format!("bad index `{s}` for dimension {dim}"))),
            }
        };
        let (r, c) = (idx(f[0])?, idx(f[1])?);
        if r > c {
            return Err(Error::parse(no, "entries must have row <= col"));
        }
        if std::mem::replace(&mut seen[r * dim + c], true) {
            return Err(Error::parse(no, format!("duplicate entry ({r}, {c})")));
        }
        let z = Complex64::new(float(no, f[2])?, float(no, f[3])?);
        if r == c {
            if z.im.abs() > 1e-12 {
                return Err(Error::parse(no, "diagonal entries must be real"));
            }
            m[(r, r)] = linalg::re(z.re);
        } else {
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
        }
    }
    Ok(m)
}

pub fn write_two_rdm(rho: &TwoRDM) -> String {
    let mut out = format!("two-rdm d={} N={}\n", rho.d(), rho.n());
    write_upper(rho.matrix(), &mut out);
    out
}

pub fn parse_two_rdm(text: &str) -> Result<TwoRDM> {
    let mut it = lines(text);
    let (no, v) = header(it.next(), "two-rdm", &["d", "N"])?;
    let (d, n) = (v[0], v[1]);
    if d < 2 || d > MAX_MODES || n < 2 || n > d {
        return Err(Error::parse(no, format!("need 2 <= N <= d <= {MAX_MODES}, got d={d} N={n}")));
    }
    let m = d * (d - 1) / 2;
    if m > MAX_TEXT_MATRIX_DIM {
        return Err(Error::SectorTooLarge {
            size: m as u128,
            cap: MAX_TEXT_MATRIX_DIM,
        });
    }
    TwoRDM::new(d, n, read_upper(it, m)?)
}

fn sector(d: usize, n: usize, no: usize) -> Result<Arc<SlaterBasis>> {
    if d == 0 || d > MAX_MODES || n > d {
        return Err(Error::parse(no, format!("need N <= d <= {MAX_MODES}, got d={d} N={n}")));
    }
    Ok(Arc::new(SlaterBasis::with_cap(d, n, MAX_TEXT_MATRIX_DIM)?))
}

pub fn write_n_density(sigma: &NSectorDensity) -> String {
    let mut out = format!("n-density d={} N={}\n", sigma.d(), sigma.n());
    write_upper(sigma.matrix(), &mut out);
    out
}

pub fn parse_n_density(text: &str) -> Result<NSectorDensity> {
    let mut it = lines(text);
    let (no, v) = header(it.next(), "n-density", &["d", "N"])?;
    let basis = sector(v[0], v[1], no)?;
    let m = read_upper(it, basis.len())?;
    NSectorDensity::new(basis, m)
}

pub fn write_n_state(psi: &NSectorState) -> String {
    let basis = psi.basis();
    let mut out = format!("n-state d={} N={}\n", basis.d(), basis.n());
    for (k, a) in psi.amplitudes().iter().enumerate() {
        if *a != linalg::ZERO {
            out.push_str(&format!(
                "{} {} {}\n",
                format_occupation(basis.state(k), basis.d()),
                fmt_f(a.re),
                fmt_f(a.im)
            ));
        }
    }
    out
}

/// Amplitude lines `<bits> re im`; the state is normalized on reading.
pub fn parse_n_state(text: &str) -> Result<NSectorState> {
    let mut it = lines(text);
    let (no, v) = header(it.next(), "n-state", &["d", "N"])?;
    let basis = sector(v[0], v[1], no)?;
    let mut amps = CVector::zeros(basis.len());
    for (no, line) in it {
        let (occ, z) = amplitude_line(no, line, basis.d())?;
        let k = basis
            .index_of(occ)
            .ok_or_else(|| Error::parse(no, format!("occupation does not have N={}", basis.n())))?;
        amps[k] += z;
    }
    NSectorState::normalized(basis, amps)
}

fn amplitude_line(no: usize, line: &str, width: usize) -> Result<(u64, Complex64)> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 3 {
        return Err(Error::parse(no, "expected `<bits> re im`"));
    }
    let (occ, len) =
        parse_occupation(f[0]).ok_or_else(|| Error::parse(no, format!("bad bitstring `{}`", f[0])))?;
    if len != width {
        return Err(Error::parse(no, format!("bitstring of length {len}, expected {width}")));
    }
    Ok((occ, Complex64::new(float(no, f[1])?, float(no, f[2])?)))
}

// ---- witnesses ----

/// Block vector indexed with qubit 1 most significant.
fn block_vector<'a>(
    it: &mut std::iter::Peekable<impl Iterator<Item = (usize, &'a str)>>,
    width: usize,
) -> Result<CVector> {
    let mut v = CVector::zeros(1usize << width);
    while let Some(&(no, line)) = it.peek() {
        if line == "block" {
            break;
        }
        it.next();
        let (occ, z) = amplitude_line(no, line, width)?;
        v[crate::fock::full_space_index(occ, width)] += z;
    }
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidState("witness block has zero norm".into()));
    }
    Ok(v / linalg::re(norm))
}

/// Pure block states, either a list of product blocks or one joint state
/// repeated.
pub fn parse_witness(text: &str) -> Result<WitnessBlocks> {
    let mut it = lines(text).peekable();
    let (no, first) = it.next().ok_or_else(|| Error::parse(1, "missing `witness` header"))?;
    let product = first.split_whitespace().nth(2).is_some_and(|f| f.starts_with("blocks="));
    if product {
        let (no, v) = header(Some((no, first)), "witness", &["d", "blocks"])?;
        let (d, blocks) = (v[0], v[1]);
        if d == 0 || d > MAX_WITNESS_QUBITS {
            return Err(Error::QubitCap { qubits: d, cap: MAX_WITNESS_QUBITS });
        }
        if blocks == 0 {
            return Err(Error::parse(no, "witness needs at least one block"));
        }
        let mut states = Vec::new();
        while let Some((no, line)) = it.next() {
            if line != "block" {
                return Err(Error::parse(no, "expected `block`"));
            }
            if states.len() == blocks {
                return Err(Error::parse(no, format!("more than {blocks} blocks")));
            }
            let v = block_vector(&mut it, d)?;
            states.push(&v * v.adjoint());
        }
        if states.len() != blocks {
            return Err(Error::parse(no, format!("header declares {blocks} blocks, found {}", states.len())));
        }
        WitnessBlocks::product(d, states)
    } else {
        let (no, v) = header(Some((no, first)), "witness", &["d", "group", "repeats"])?;
        let (d, group, repeats) = (v[0], v[1], v[2]);
        let qubits = d.saturating_mul(group);
        if d == 0 || group == 0 || qubits > MAX_WITNESS_QUBITS {
            return Err(Error::QubitCap { qubits, cap: MAX_WITNESS_QUBITS });
        }
        if repeats == 0 || repeats > 1 << 16 {
            return Err(Error::parse(no, "repeats must be in 1..=65536"));
        }
        if let Some(&(no, "block")) = it.peek() {
            return Err(Error::parse(no, "joint witness has no `block` sections"));
        }
        let v = block_vector(&mut it, qubits)?;
        WitnessBlocks::entangled(d, group, &v * v.adjoint(), repeats)
    }
}

/// Writes a product witness of pure blocks; mixed blocks are rejected.
pub fn write_witness_product(d: usize, blocks: &[CVector]) -> String {
    let mut out = format!("witness d={d} blocks={}\n", blocks.len());
    for v in blocks {
        out.push_str("block\n");
        write_amplitudes(v, d, &mut out);
    }
    out
}

pub fn write_witness_entangled(d: usize, group: usize, repeats: usize, joint: &CVector) -> String {
    let mut out = format!("witness d={d} group={group} repeats={repeats}\n");
    write_amplitudes(joint, d * group, &mut out);
    out
}

fn write_amplitudes(v: &CVector, width: usize, out: &mut String) {
    for (idx, a) in v.iter().enumerate() {
        if *a != linalg::ZERO {
            let occ = crate::fock::occupation_of_full_index(idx, width);
            out.push_str(&format!("{} {} {}\n", format_occupation(occ, width), fmt_f(a.re), fmt_f(a.im)));
        }
    }
}
