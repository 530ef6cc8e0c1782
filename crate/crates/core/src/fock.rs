//! Fixed-particle-number Fock sectors.
//!
//! Modes are 0-based internally (`mode k` is `a_{k+1}` in 1-based physics
//! notation); text formats use 1-based indices. An occupation bitstring is a
//! `u64` with bit `k` set when mode `k` is occupied, and denotes the Slater
//! state `(a_1^dag)^{n_1} ... (a_d^dag)^{n_d} |vacuum>` with `+1` phase.
//!
//! Ladder operators obey `{a_i, a_j^dag} = delta_ij`. Each elementary
//! `a_i` / `a_i^dag` picks up `(-1)^(occupied modes below i)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

pub type Occupation = u64;

pub const MAX_MODES: usize = 64;
pub const DEFAULT_SECTOR_CAP: usize = 100_000;
/// Full-Fock-space matrices (all sectors at once) are limited to this many modes.
pub const MAX_FULL_SPACE_MODES: usize = 14;

const HERMITIAN_TOL: f64 = 1e-8;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
    }
    acc
}

/// Renders an occupation as a `d`-character string, mode 1 first.
pub fn format_occupation(occ: Occupation, d: usize) -> String {
    (0..d)
        .map(|k| if occ >> k & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a `0`/`1` string, mode 1 first.
pub fn parse_occupation(s: &str) -> Option<(Occupation, usize)> {
    if s.is_empty() || s.len() > MAX_MODES {
        return None;
    }
    let mut occ = 0u64;
    for (k, ch) in s.chars().enumerate() {
        match ch {
            '1' => occ |= 1 << k,
            '0' => {}
            _ => return None,
        }
    }
    Some((occ, s.chars().count()))
}

/// Ordered Slater basis of the `n`-particle sector on `d` modes.
///
/// States are in lexicographic order of their occupied-mode sets, which is
/// lexicographic on bitstrings read with mode 1 as the most significant
/// position: for `d = 4, n = 2` the order is `1100, 1010, 1001, 0110, 0101, 0011`.
#[derive(Clone, Debug)]
pub struct SlaterBasis {
    d: usize,
    n: usize,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl PartialEq for SlaterBasis {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl SlaterBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_cap(d, n, DEFAULT_SECTOR_CAP)
    }

    pub fn with_cap(d: usize, n: usize, cap: usize) -> Result<Self> {
        if d == 0 || d > MAX_MODES {
            return Err(Error::InvalidArguments(format!(
                "mode count d={d} must be in 1..={MAX_MODES}"
            )));
        }
        if n > d {
            return Err(Error::InvalidArguments(format!(
                "particle count N={n} exceeds mode count d={d}"
            )));
        }
        let size = binomial(d, n);
        if size > cap as u128 {
            return Err(Error::SectorTooLarge { size, cap });
        }
        let mut states = Vec::with_capacity(size as usize);
        let mut modes: Vec<usize> = (0..n).collect();
        loop {
            states.push(modes.iter().fold(0u64, |acc, &m| acc | 1 << m));
            // next combination in lexicographic order
            let mut k = n;
            loop {
                if k == 0 {
                    let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
                    return Ok(Self {
                        d,
                        n,
                        states,
                        index,
                    });
                }
                k -= 1;
                if modes[k] < d - n + k {
                    modes[k] += 1;
                    for j in k + 1..n {
                        modes[j] = modes[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, k: usize) -> Occupation {
        self.states[k]
    }

    pub fn index_of(&self, occ: Occupation) -> Option<usize> {
        self.index.get(&occ).copied()
    }
}

/// Enumerates the sector; see [`SlaterBasis`].
pub fn build_basis(d: usize, n: usize) -> Result<SlaterBasis> {
    SlaterBasis::new(d, n)
}

/// Elementary creation (`dagger == true`) or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    /// Acts on an occupation; `None` when the result vanishes.
    pub fn apply(self, occ: Occupation) -> Option<(f64, Occupation)> {
        let bit = 1u64 << self.mode;
        let occupied = occ & bit != 0;
        if occupied == self.dagger {
            return None;
        }
        let below = (occ & (bit - 1)).count_ones();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, occ ^ bit))
    }
}

/// Normal-ordered product `a^dag_{c1} ... a^dag_{cp} a_{j1} ... a_{jq}` with both
/// index lists strictly ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    creators: Vec<usize>,
    annihilators: Vec<usize>,
}

/// Sorts in place, returning the permutation sign, or `None` on a repeated index.
fn sort_with_sign(v: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] >= v[j] {
            if v[j - 1] == v[j] {
                return None;
            }
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

impl Monomial {
    pub fn identity() -> Self {
        Self {
            creators: Vec::new(),
            annihilators: Vec::new(),
        }
    }

    /// Canonicalizes arbitrary index lists. Returns the sign absorbed by
    /// sorting, or `None` if an index repeats (the product is zero).
    pub fn canonical(
        mut creators: Vec<usize>,
        mut annihilators: Vec<usize>,
    ) -> Option<(f64, Monomial)> {
        let s1 = sort_with_sign(&mut creators)?;
        let s2 = sort_with_sign(&mut annihilators)?;
        Some((
            s1 * s2,
            Monomial {
                creators,
                annihilators,
            },
        ))
    }

    pub fn creators(&self) -> &[usize] {
        &self.creators
    }

    pub fn annihilators(&self) -> &[usize] {
        &self.annihilators
    }

    pub fn degree(&self) -> usize {
        self.creators.len() + self.annihilators.len()
    }

    pub fn particle_change(&self) -> isize {
        self.creators.len() as isize - self.annihilators.len() as isize
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.creators
            .iter()
            .chain(&self.annihilators)
            .copied()
            .max()
    }

    /// The product as an ordered ladder list, leftmost first.
    pub fn ladders(&self) -> Vec<Ladder> {
        self.creators
            .iter()
            .map(|&m| Ladder::create(m))
            .chain(self.annihilators.iter().map(|&m| Ladder::annihilate(m)))
            .collect()
    }

    pub fn apply(&self, occ: Occupation) -> Option<(f64, Occupation)> {
        apply_ladders(&self.ladders(), occ)
    }
}

/// Applies a ladder product (rightmost factor first).
pub fn apply_ladders(product: &[Ladder], occ: Occupation) -> Option<(f64, Occupation)> {
    let mut sign = 1.0;
    let mut state = occ;
    for op in product.iter().rev() {
        let (s, next) = op.apply(state)?;
        sign *= s;
        state = next;
    }
    Some((sign, state))
}

/// Applies a normal-ordered monomial to an occupation bitstring.
pub fn apply_monomial(term: &Monomial, occ: Occupation) -> Option<(f64, Occupation)> {
    term.apply(occ)
}

/// Expands an arbitrary ladder product into normal-ordered monomials using
/// the canonical anticommutation relations.
pub fn normal_order(product: &[Ladder]) -> Vec<(f64, Monomial)> {
    let mut out: BTreeMap<Monomial, f64> = BTreeMap::new();
    let mut stack: Vec<(f64, Vec<Ladder>)> = vec![(1.0, product.to_vec())];
    while let Some((coef, ops)) = stack.pop() {
        match ops.windows(2).position(|w| !w[0].dagger && w[1].dagger) {
            Some(k) => {
                // a_i a_j^dag = delta_ij - a_j^dag a_i
                let mut swapped = ops.clone();
                swapped.swap(k, k + 1);
                stack.push((-coef, swapped));
                if ops[k].mode == ops[k + 1].mode {
                    let mut contracted = ops;
                    contracted.drain(k..k + 2);
                    stack.push((coef, contracted));
                }
            }
            None => {
                let split = ops.iter().position(|l| !l.dagger).unwrap_or(ops.len());
                let creators = ops[..split].iter().map(|l| l.mode).collect();
                let annihilators = ops[split..].iter().map(|l| l.mode).collect();
                if let Some((sign, mono)) = Monomial::canonical(creators, annihilators) {
                    *out.entry(mono).or_insert(0.0) += sign * coef;
                }
            }
        }
    }
    out.into_iter().filter(|(_, c)| *c != 0.0).map(|(m, c)| (c, m)).collect()
}

/// Complex linear combination of normal-ordered monomials on `d` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    d: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl FermionOperator {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, value: Complex64) -> Self {
        let mut op = Self::zero(d);
        op.add_term(value, Monomial::identity());
        op
    }

    pub fn identity(d: usize) -> Self {
        Self::constant(d, ONE)
    }

    /// `coef * product`, normal ordered.
    pub fn from_product(d: usize, coef: Complex64, product: &[Ladder]) -> Result<Self> {
        if let Some(bad) = product.iter().find(|l| l.mode >= d) {
            return Err(Error::InvalidArguments(format!(
                "mode {} out of range for d={d}",
                bad.mode + 1
            )));
        }
        let mut op = Self::zero(d);
        for (sign, mono) in normal_order(product) {
            op.add_term(coef * sign, mono);
        }
        Ok(op)
    }

    /// `coef * a^dag_{creators...} a_{annihilators...}` with indices in the given order.
    pub fn term(
        d: usize,
        coef: Complex64,
        creators: &[usize],
        annihilators: &[usize],
    ) -> Result<Self> {
        let product: Vec<Ladder> = creators
            .iter()
            .map(|&m| Ladder::create(m))
            .chain(annihilators.iter().map(|&m| Ladder::annihilate(m)))
            .collect();
        Self::from_product(d, coef, &product)
    }

    pub fn create(d: usize, mode: usize) -> Result<Self> {
        Self::from_product(d, ONE, &[Ladder::create(mode)])
    }

    pub fn annihilate(d: usize, mode: usize) -> Result<Self> {
        Self::from_product(d, ONE, &[Ladder::annihilate(mode)])
    }

    /// `a^dag_mode a_mode`.
    pub fn number(d: usize, mode: usize) -> Result<Self> {
        Self::term(d, ONE, &[mode], &[mode])
    }

    /// `sum_k a^dag_k a_k`.
    pub fn total_number(d: usize) -> Self {
        let mut op = Self::zero(d);
        for k in 0..d {
            op.add_term(ONE, Monomial::canonical(vec![k], vec![k]).unwrap().1);
        }
        op
    }

    pub fn add_term(&mut self, coef: Complex64, mono: Monomial) {
        let entry = self.terms.entry(mono).or_insert(ZERO);
        *entry += coef;
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Complex64 {
        self.terms.get(mono).copied().unwrap_or(ZERO)
    }

    /// Drops terms with `|coef| <= tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            d: self.d,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.d);
        for (mono, coef) in &self.terms {
            let product: Vec<Ladder> = mono
                .annihilators
                .iter()
                .rev()
                .map(|&m| Ladder::create(m))
                .chain(mono.creators.iter().rev().map(|&m| Ladder::annihilate(m)))
                .collect();
            for (sign, m) in normal_order(&product) {
                out.add_term(coef.conj() * sign, m);
            }
        }
        out
    }

    pub fn is_number_conserving(&self) -> bool {
        self.terms.keys().all(|m| m.particle_change() == 0)
    }

    /// Largest `(creators, annihilators)` count over all terms.
    pub fn max_body(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.creators.len().max(m.annihilators.len()))
            .max()
            .unwrap_or(0)
    }

    /// Sum of coefficient moduli.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    fn check_same_d(&self, other: &Self) {
        assert_eq!(self.d, other.d, "fermion operators on different mode counts");
    }
}

impl Add for &FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: &FermionOperator) -> FermionOperator {
        self.check_same_d(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*c, m.clone());
        }
        out
    }
}

impl Add for FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: FermionOperator) -> FermionOperator {
        &self + &rhs
    }
}

impl Sub for &FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: &FermionOperator) -> FermionOperator {
        self + &(-rhs)
    }
}

impl Sub for FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: FermionOperator) -> FermionOperator {
        &self - &rhs
    }
}

impl Neg for &FermionOperator {
    type Output = FermionOperator;
    fn neg(self) -> FermionOperator {
        self.scale(-ONE)
    }
}

impl Neg for FermionOperator {
    type Output = FermionOperator;
    fn neg(self) -> FermionOperator {
        -&self
    }
}

impl Mul for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: &FermionOperator) -> FermionOperator {
        self.check_same_d(rhs);
        let mut out = FermionOperator::zero(self.d);
        for (ml, cl) in &self.terms {
            for (mr, cr) in &rhs.terms {
                let mut product = ml.ladders();
                product.extend(mr.ladders());
                for (sign, m) in normal_order(&product) {
                    out.add_term(cl * cr * sign, m);
                }
            }
        }
        out
    }
}

impl Mul for FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: FermionOperator) -> FermionOperator {
        &self * &rhs
    }
}

impl Mul<Complex64> for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: Complex64) -> FermionOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: f64) -> FermionOperator {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &c in &self.creators {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "a{}^", c + 1)?;
            first = false;
        }
        for &a in &self.annihilators {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "a{}", a + 1)?;
            first = false;
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Dense matrix of `op` from the `basis_in` sector to the `basis_out` sector.
/// Terms whose particle-number change does not match the sectors are skipped.
pub fn operator_matrix(
    op: &FermionOperator,
    basis_in: &SlaterBasis,
    basis_out: &SlaterBasis,
) -> Result<CMatrix> {
    if basis_in.d() != op.d() || basis_out.d() != op.d() {
        return Err(Error::DimensionMismatch(format!(
            "operator on d={} applied between sectors with d={} and d={}",
            op.d(),
            basis_in.d(),
            basis_out.d()
        )));
    }
    let change = basis_out.n() as isize - basis_in.n() as isize;
    let mut m = CMatrix::zeros(basis_out.len(), basis_in.len());
    for (mono, coef) in op.terms() {
        if mono.particle_change() != change {
            continue;
        }
        let ladders = mono.ladders();
        for (col, &occ) in basis_in.states().iter().enumerate() {
            if let Some((sign, out)) = apply_ladders(&ladders, occ) {
                let row = basis_out
                    .index_of(out)
                    .expect("number-consistent image stays in the output sector");
                m[(row, col)] += coef * sign;
            }
        }
    }
    Ok(m)
}

/// Index of an occupation in the full `2^d` Fock space, mode 1 as the most
/// significant qubit (the Jordan-Wigner tensor-product order).
pub fn full_space_index(occ: Occupation, d: usize) -> usize {
    let mut idx = 0usize;
    for k in 0..d {
        idx = (idx << 1) | (occ >> k & 1) as usize;
    }
    idx
}

pub fn occupation_of_full_index(idx: usize, d: usize) -> Occupation {
    let mut occ = 0u64;
    for k in 0..d {
        if idx >> (d - 1 - k) & 1 == 1 {
            occ |= 1 << k;
        }
    }
    occ
}

/// Matrix of `op` on the whole Fock space (all particle numbers), indexed by
/// [`full_space_index`].
pub fn full_space_matrix(op: &FermionOperator) -> Result<CMatrix> {
    let d = op.d();
    if d > MAX_FULL_SPACE_MODES {
        return Err(Error::SectorTooLarge {
            size: 1u128 << d,
            cap: 1 << MAX_FULL_SPACE_MODES,
        });
    }
    let dim = 1usize << d;
    let mut m = CMatrix::zeros(dim, dim);
    for (mono, coef) in op.terms() {
        let ladders = mono.ladders();
        for col in 0..dim {
            let occ = occupation_of_full_index(col, d);
            if let Some((sign, out)) = apply_ladders(&ladders, occ) {
                m[(full_space_index(out, d), col)] += coef * sign;
            }
        }
    }
    Ok(m)
}

/// Exact ground energy and a ground state of a number-conserving Hermitian
/// operator on one sector.
pub fn ground_energy_exact(
    op: &FermionOperator,
    basis: &Arc<SlaterBasis>,
) -> Result<(f64, NSectorState)> {
    if !op.is_number_conserving() {
        return Err(Error::InvalidArguments(
            "ground energy requires a number-conserving operator".into(),
        ));
    }
    let m = operator_matrix(op, basis, basis)?;
    let dev = linalg::hermiticity_deviation(&m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NonHermitian(dev));
    }
    let (values, vectors) = linalg::eigh(&m);
    let state = NSectorState {
        basis: Arc::clone(basis),
        amplitudes: vectors.column(0).into_owned(),
    };
    Ok((values[0], state))
}

/// Pure state on one sector.
#[derive(Clone, Debug)]
pub struct NSectorState {
    basis: Arc<SlaterBasis>,
    amplitudes: CVector,
}

impl NSectorState {
    pub fn new(basis: Arc<SlaterBasis>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a sector of dimension {}",
                amplitudes.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes the amplitudes; rejects the zero vector.
    pub fn normalized(basis: Arc<SlaterBasis>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        Self::new(basis, amplitudes / linalg::re(norm))
    }

    /// Single Slater determinant.
    pub fn slater(basis: Arc<SlaterBasis>, occ: Occupation) -> Result<Self> {
        let k = basis.index_of(occ).ok_or_else(|| {
            Error::InvalidState(format!(
                "occupation {} is not in the d={} N={} sector",
                format_occupation(occ, basis.d()),
                basis.d(),
                basis.n()
            ))
        })?;
        let mut v = CVector::zeros(basis.len());
        v[k] = ONE;
        Ok(Self {
            basis,
            amplitudes: v,
        })
    }

    pub fn basis(&self) -> &Arc<SlaterBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        (self.amplitudes.norm_squared() - 1.0).abs() <= 1e-12
    }

    pub fn density(&self) -> NSectorDensity {
        NSectorDensity {
            basis: Arc::clone(&self.basis),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Mixed state on one sector: Hermitian, PSD, unit trace.
#[derive(Clone, Debug)]
pub struct NSectorDensity {
    basis: Arc<SlaterBasis>,
    matrix: CMatrix,
}

impl NSectorDensity {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;

    /// Validates the density invariants. Hermiticity residue at or below
    /// `HERMITIAN_TOL` is removed by symmetrization.
    pub fn new(basis: Arc<SlaterBasis>, matrix: CMatrix) -> Result<Self> {
        let dim = basis.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density for a sector of dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = linalg::hermiticity_deviation(&matrix);
        if dev > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density is not Hermitian (deviation {dev:e})"
            )));
        }
        let matrix = linalg::hermitian_part(&matrix);
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("density has trace {tr}")));
        }
        let min_eig = linalg::eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min_eig < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!(
                "density has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { basis, matrix })
    }

    /// Wraps a matrix already known to be a density (internal constructions).
    pub(crate) fn from_trusted(basis: Arc<SlaterBasis>, matrix: CMatrix) -> Self {
        Self { basis, matrix }
    }

    pub fn maximally_mixed(basis: Arc<SlaterBasis>) -> Self {
        let dim = basis.len();
        let matrix = CMatrix::identity(dim, dim) / linalg::re(dim as f64);
        Self { basis, matrix }
    }

    pub fn from_state(state: &NSectorState) -> Self {
        state.density()
    }

    /// Convex combination; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &NSectorDensity)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArguments("empty mixture".into()))?;
        let basis = Arc::clone(&first.1.basis);
        let dim = basis.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if *rho.basis != *basis {
                return Err(Error::DimensionMismatch("mixture of different sectors".into()));
            }
            m += rho.matrix.scale(*w);
        }
        Self::new(basis, m)
    }

    pub fn random<R: rand::Rng + ?Sized>(basis: Arc<SlaterBasis>, rank: usize, rng: &mut R) -> Self {
        let matrix = linalg::random_density(basis.len(), rank, rng);
        Self { basis, matrix }
    }

    pub fn basis(&self) -> &Arc<SlaterBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// `tr(rho O)` for an operator on this sector.
    pub fn expectation(&self, op: &FermionOperator) -> Result<Complex64> {
        let m = operator_matrix(op, &self.basis, &self.basis)?;
        Ok(linalg::trace_product(&self.matrix, &m))
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use approx::assert_abs_diff_eq;

    fn occ(s: &str) -> Occupation {
        parse_occupation(s).unwrap().0
    }

    #[test]
    fn basis_examples() {
        let b = build_basis(2, 1).unwrap();
        let names: Vec<String> = b.states().iter().map(|&s| format_occupation(s, 2)).collect();
        assert_eq!(names, ["10", "01"]);
        assert_eq!(build_basis(4, 2).unwrap().len(), 6);
        assert_eq!(build_basis(8, 4).unwrap().len(), 70);
        let b = build_basis(4, 2).unwrap();
        let names: Vec<String> = b.states().iter().map(|&s| format_occupation(s, 4)).collect();
        assert_eq!(names, ["1100", "1010", "1001", "0110", "0101", "0011"]);
    }

    #[test]
    fn basis_edge_sectors() {
        assert_eq!(build_basis(5, 0).unwrap().states(), &[0]);
        assert_eq!(build_basis(5, 5).unwrap().states(), &[0b11111]);
        assert!(matches!(build_basis(3, 4), Err(Error::InvalidArguments(_))));
        assert!(matches!(
            SlaterBasis::with_cap(30, 15, DEFAULT_SECTOR_CAP),
            Err(Error::SectorTooLarge { .. })
        ));
    }

    #[test]
    fn monomial_action_examples() {
        let create1 = Monomial::canonical(vec![0], vec![]).unwrap().1;
        assert_eq!(apply_monomial(&create1, occ("00")), Some((1.0, occ("10"))));
        let ann1 = Monomial::canonical(vec![], vec![0]).unwrap().1;
        assert_eq!(apply_monomial(&ann1, occ("01")), None);

        let forward = apply_ladders(&[Ladder::create(0), Ladder::create(1)], 0).unwrap();
        let backward = apply_ladders(&[Ladder::create(1), Ladder::create(0)], 0).unwrap();
        assert_eq!(forward.1, backward.1);
        assert_eq!(forward.0, -backward.0);
    }

    #[test]
    fn canonical_absorbs_permutation_sign() {
        let (s, m) = Monomial::canonical(vec![2, 0], vec![1, 3]).unwrap();
        assert_eq!(s, -1.0);
        assert_eq!(m.creators(), &[0, 2]);
        assert!(Monomial::canonical(vec![1, 1], vec![]).is_none());
        let op = FermionOperator::term(3, ONE, &[2, 0], &[]).unwrap();
        let expected = FermionOperator::term(3, -ONE, &[0, 2], &[]).unwrap();
        assert_eq!(op, expected);
    }

    #[test]
    fn matrix_examples() {
        let b21 = build_basis(2, 1).unwrap();
        let n1 = FermionOperator::number(2, 0).unwrap();
        let m = operator_matrix(&n1, &b21, &b21).unwrap();
        assert_eq!(m, CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]));

        let hop = &FermionOperator::term(2, ONE, &[0], &[1]).unwrap()
            + &FermionOperator::term(2, ONE, &[1], &[0]).unwrap();
        let m = operator_matrix(&hop, &b21, &b21).unwrap();
        assert_eq!(m, CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));

        let b42 = build_basis(4, 2).unwrap();
        let m = operator_matrix(&FermionOperator::total_number(4), &b42, &b42).unwrap();
        assert_eq!(m, CMatrix::identity(6, 6) * re(2.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let b = build_basis(3, 1).unwrap();
        let op = FermionOperator::number(2, 0).unwrap();
        assert!(matches!(operator_matrix(&op, &b, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ground_energy_examples() {
        let b = Arc::new(build_basis(2, 1).unwrap());
        let (e, psi) = ground_energy_exact(&FermionOperator::number(2, 0).unwrap(), &b).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.amplitudes()[1].norm(), 1.0, epsilon = 1e-12);

        let hop = (&FermionOperator::term(2, ONE, &[0], &[1]).unwrap()
            + &FermionOperator::term(2, ONE, &[1], &[0]).unwrap())
            .scale(-ONE);
        let (e, _) = ground_energy_exact(&hop, &b).unwrap();
        assert_abs_diff_eq!(e, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_energy_rejects_non_hermitian() {
        let b = Arc::new(build_basis(2, 1).unwrap());
        let op = FermionOperator::term(2, ONE, &[0], &[1]).unwrap();
        assert!(matches!(ground_energy_exact(&op, &b), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn double_annihilation_vanishes() {
        let op = FermionOperator::from_product(3, ONE, &[Ladder::annihilate(1), Ladder::annihilate(1)])
            .unwrap();
        assert!(op.is_empty());
    }

    #[test]
    fn adjoint_of_hopping() {
        let op = FermionOperator::term(3, c(0.5, 2.0), &[0], &[2]).unwrap();
        let adj = op.adjoint();
        assert_eq!(adj, FermionOperator::term(3, c(0.5, -2.0), &[2], &[0]).unwrap());
    }

    #[test]
    fn density_validation() {
        let b = Arc::new(build_basis(3, 1).unwrap());
        assert!(NSectorDensity::new(Arc::clone(&b), CMatrix::identity(3, 3)).is_err());
        let mut bad = CMatrix::identity(3, 3) / re(3.0);
        bad[(0, 1)] = c(0.5, 0.0);
        assert!(NSectorDensity::new(Arc::clone(&b), bad).is_err());
        let ok = NSectorDensity::maximally_mixed(Arc::clone(&b));
        assert!(NSectorDensity::new(b, ok.matrix().clone()).is_ok());
    }

    #[test]
    fn full_space_index_round_trip() {
        for idx in 0..32 {
            assert_eq!(full_space_index(occupation_of_full_index(idx, 5), 5), idx);
        }
        assert_eq!(full_space_index(occ("1000"), 4), 8);
    }
}
