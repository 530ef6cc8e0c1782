//! Spin Hamiltonians and their fermionic images.
//!
//! Qubit `i` (0-based) is carried by the mode pair `a_i = 2i`, `b_i = 2i + 1`.
//! In the one-fermion-per-site encoding `|0> = a^dag |vac>` and
//! `|1> = b^dag |vac>`; in the parity encoding `|0> = |vac>` and
//! `|1> = a^dag b^dag |vac>`.
//!
//! Qubit matrices use the tensor-product order with qubit 1 as the most
//! significant index, the same order as [`crate::fock::full_space_index`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FermionOperator, Ladder, Monomial, Occupation};
use crate::linalg::{self, CMatrix, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// `self * other = phase * result`.
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (ONE, I),
            (X, Y) => (linalg::I, Z),
            (Y, X) => (-linalg::I, Z),
            (Y, Z) => (linalg::I, X),
            (Z, Y) => (-linalg::I, X),
            (Z, X) => (linalg::I, Y),
            (X, Z) => (-linalg::I, Y),
        }
    }

    /// Image of the basis state `bit` and the accompanying phase.
    fn act(self, bit: bool) -> (Complex64, bool) {
        match (self, bit) {
            (Pauli::I, b) => (ONE, b),
            (Pauli::X, b) => (ONE, !b),
            (Pauli::Y, false) => (I, true),
            (Pauli::Y, true) => (-I, false),
            (Pauli::Z, false) => (ONE, false),
            (Pauli::Z, true) => (-ONE, true),
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 1 first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        Self(paulis)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn parse(s: &str) -> Option<Self> {
        s.chars().map(Pauli::from_char).collect::<Option<Vec<_>>>().map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn mul(&self, other: &PauliWord) -> (Complex64, PauliWord) {
        let mut phase = ONE;
        let word = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (p, r) = a.mul(b);
                phase *= p;
                r
            })
            .collect();
        (phase, PauliWord(word))
    }

    /// `P |idx> = phase |out>` in the qubit-1-most-significant order.
    pub fn apply(&self, idx: usize) -> (Complex64, usize) {
        let n = self.0.len();
        let mut phase = ONE;
        let mut out = 0usize;
        for (q, &p) in self.0.iter().enumerate() {
            let bit = idx >> (n - 1 - q) & 1 == 1;
            let (ph, b) = p.act(bit);
            phase *= ph;
            out |= (b as usize) << (n - 1 - q);
        }
        (phase, out)
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.0.len();
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (ph, row) = self.apply(col);
            m[(row, col)] += ph;
        }
        m
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli words of weight at most 2.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinHamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliWord)>,
}

impl SpinHamiltonian {
    pub const MAX_WEIGHT: usize = 2;

    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliWord)>) -> Result<Self> {
        for (coef, word) in &terms {
            if word.len() != n_qubits {
                return Err(Error::InvalidArguments(format!(
                    "term `{word}` has length {}, expected {n_qubits}",
                    word.len()
                )));
            }
            if !coef.is_finite() {
                return Err(Error::InvalidArguments(format!(
                    "term `{word}` has a non-finite coefficient"
                )));
            }
            if word.weight() > Self::MAX_WEIGHT {
                return Err(Error::WeightViolation {
                    term: format!("{coef} {word}"),
                    weight: word.weight(),
                });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliWord)] {
        &self.terms
    }

    /// `sum |c|` over all terms.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Adds an idle qubit at the end.
    pub fn padded(&self, extra: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, w)| {
                let mut p = w.0.clone();
                p.extend(std::iter::repeat_n(Pauli::I, extra));
                (*c, PauliWord(p))
            })
            .collect();
        Self {
            n_qubits: self.n_qubits + extra,
            terms,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (coef, word) in &self.terms {
            for col in 0..dim {
                let (ph, row) = word.apply(col);
                m[(row, col)] += ph * coef;
            }
        }
        m
    }

    pub fn ground_energy(&self) -> f64 {
        linalg::eigvalsh(&self.matrix())[0]
    }

    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix())
    }

    /// Text form: `qubits=<n>` header, then `<coef> <word>` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits={}\n", self.n_qubits);
        for (coef, word) in &self.terms {
            out.push_str(&format!("{coef:.16e} {word}\n"));
        }
        out
    }

    /// Random 2-local Hamiltonian: every weight-1 and weight-2 word with a
    /// Gaussian coefficient.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        let mut terms = Vec::new();
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
        for i in 0..n {
            for &p in &paulis {
                let mut w = vec![Pauli::I; n];
                w[i] = p;
                terms.push((rng.sample::<f64, _>(StandardNormal), PauliWord(w)));
            }
            for j in i + 1..n {
                for &p in &paulis {
                    for &q in &paulis {
                        let mut w = vec![Pauli::I; n];
                        w[i] = p;
                        w[j] = q;
                        terms.push((rng.sample::<f64, _>(StandardNormal), PauliWord(w)));
                    }
                }
            }
        }
        Self { n_qubits: n, terms }
    }
}

/// Parses the spin-Hamiltonian text format.
///
/// ```text
/// # comment
/// qubits=2
/// -1.0 ZZ
/// 0.5 xi
/// ```
pub fn parse_spin_hamiltonian(text: &str) -> Result<SpinHamiltonian> {
    let mut declared: Option<(usize, usize)> = None;
    let mut terms: Vec<(usize, f64, PauliWord)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("qubits=") {
            if declared.is_some() || !terms.is_empty() {
                return Err(Error::parse(line_no, "`qubits=` header must come first, once"));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad qubit count `{rest}`")))?;
            if n == 0 || n > 16 {
                return Err(Error::parse(line_no, "qubit count must be in 1..=16"));
            }
            declared = Some((n, line_no));
            continue;
        }
        let mut fields = line.split_whitespace();
        let coef_str = fields.next().unwrap_or("");
        let word_str = fields
            .next()
            .ok_or_else(|| Error::parse(line_no, "expected `<coefficient> <pauli-word>`"))?;
        if fields.next().is_some() {
            return Err(Error::parse(line_no, "trailing fields after the Pauli word"));
        }
        let coef: f64 = coef_str
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad coefficient `{coef_str}`")))?;
        if !coef.is_finite() {
            return Err(Error::parse(line_no, "coefficient must be finite"));
        }
        let word = PauliWord::parse(word_str)
            .ok_or_else(|| Error::parse(line_no, format!("bad Pauli word `{word_str}`")))?;
        if word.len() == 0 || word.len() > 16 {
            return Err(Error::parse(line_no, "Pauli word length must be in 1..=16"));
        }
        terms.push((line_no, coef, word));
    }
    let n = match (declared, terms.first()) {
        (Some((n, _)), _) => n,
        (None, Some((_, _, w))) => w.len(),
        (None, None) => {
            return Err(Error::parse(1, "empty Hamiltonian needs a `qubits=` header"));
        }
    };
    let mut out = Vec::with_capacity(terms.len());
    for (line_no, coef, word) in terms {
        if word.len() != n {
            return Err(Error::parse(
                line_no,
                format!("Pauli word `{word}` has length {}, expected {n}", word.len()),
            ));
        }
        if word.weight() > SpinHamiltonian::MAX_WEIGHT {
            return Err(Error::WeightViolation {
                term: format!("{coef_str} {word}", coef_str = coef),
                weight: word.weight(),
            });
        }
        out.push((coef, word));
    }
    SpinHamiltonian::new(n, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    /// One fermion per site, penalized by `w (1 + P_i) / 2`.
    OnePerSite,
    /// Zero or two fermions per site, penalized by `eps (1 - P_i) / 2`.
    Parity,
}

/// Qubit-to-mode layout of an encoded Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingMap {
    n_qubits: usize,
    penalty: f64,
    encoding: Encoding,
}

impl EncodingMap {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn d(&self) -> usize {
        2 * self.n_qubits
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    /// `(a_i, b_i)` mode indices of qubit `i`.
    pub fn site_modes(&self, qubit: usize) -> (usize, usize) {
        (2 * qubit, 2 * qubit + 1)
    }

    /// Encoded occupations of all computational basis states, in qubit order.
    pub fn encoded_states(&self) -> Vec<Occupation> {
        let n = self.n_qubits;
        (0..1usize << n)
            .map(|z| {
                let bits: Vec<bool> = (0..n).map(|q| z >> (n - 1 - q) & 1 == 1).collect();
                match self.encoding {
                    Encoding::OnePerSite => encode_basis_state(&bits),
                    Encoding::Parity => encode_basis_state_parity(&bits),
                }
            })
            .collect()
    }
}

/// Occupation of the encoded computational basis state `z` (qubit 1 first):
/// mode `a_i` occupied iff `z_i = 0`, mode `b_i` iff `z_i = 1`.
pub fn encode_basis_state(z: &[bool]) -> Occupation {
    z.iter().enumerate().fold(0u64, |acc, (i, &bit)| {
        acc | 1 << (2 * i + bit as usize)
    })
}

/// Parity encoding: site `i` empty iff `z_i = 0`, doubly occupied iff `z_i = 1`.
pub fn encode_basis_state_parity(z: &[bool]) -> Occupation {
    z.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &bit)| if bit { acc | 0b11 << (2 * i) } else { acc })
}

/// Weight guaranteed sufficient for the one-per-site penalty:
/// `2 * sum |c| + 1`.
pub fn default_penalty(h: &SpinHamiltonian) -> f64 {
    2.0 * h.coefficient_norm() + 1.0
}

pub const DEFAULT_PARITY_PENALTY: f64 = 0.5;

fn site_image(d: usize, qubit: usize, p: Pauli, parity: bool) -> FermionOperator {
    let (a, b) = (2 * qubit, 2 * qubit + 1);
    let t = |coef: Complex64, ops: &[Ladder]| FermionOperator::from_product(d, coef, ops).unwrap();
    let (ca, cb, aa, ab) = (
        Ladder::create(a),
        Ladder::create(b),
        Ladder::annihilate(a),
        Ladder::annihilate(b),
    );
    match p {
        Pauli::I => FermionOperator::identity(d),
        Pauli::X => {
            let mut op = t(ONE, &[ca, ab]) + t(ONE, &[cb, aa]);
            if parity {
                op = op + t(ONE, &[ab, aa]) + t(ONE, &[ca, cb]);
            }
            op
        }
        Pauli::Y => {
            let mut op = t(I, &[cb, aa]) + t(-I, &[ca, ab]);
            if parity {
                op = op + t(I, &[ca, cb]) + t(-I, &[ab, aa]);
            }
            op
        }
        Pauli::Z => FermionOperator::identity(d) + t(linalg::re(-2.0), &[cb, ab]),
    }
}

/// `P_i = (2 n_a - 1)(2 n_b - 1)`.
pub fn site_projector(d: usize, qubit: usize) -> FermionOperator {
    let (a, b) = (2 * qubit, 2 * qubit + 1);
    let one = FermionOperator::identity(d);
    let fa = &(&FermionOperator::number(d, a).unwrap() * 2.0) - &one;
    let fb = &(&FermionOperator::number(d, b).unwrap() * 2.0) - &one;
    &fa * &fb
}

fn word_image(word: &PauliWord, parity: bool) -> FermionOperator {
    let d = 2 * word.len();
    word.paulis()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .fold(FermionOperator::identity(d), |acc, (q, &p)| {
            &acc * &site_image(d, q, p, parity)
        })
}

fn encode(h: &SpinHamiltonian, parity: bool) -> FermionOperator {
    let d = 2 * h.n_qubits();
    let mut op = FermionOperator::zero(d);
    for (coef, word) in h.terms() {
        op = &op + &(&word_image(word, parity) * *coef);
    }
    op
}

/// Fermionic image in the one-fermion-per-site encoding, plus the penalty
/// `w * sum_i (1 + P_i) / 2`, which vanishes on the encoded subspace and
/// costs `w` per badly occupied site.
pub fn spin_to_fermion(h: &SpinHamiltonian, w: f64) -> Result<(FermionOperator, EncodingMap)> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::InvalidArguments(format!(
            "penalty weight must be positive and finite, got {w}"
        )));
    }
    for (coef, word) in h.terms() {
        if word.weight() > SpinHamiltonian::MAX_WEIGHT {
            return Err(Error::WeightViolation {
                term: format!("{coef} {word}"),
                weight: word.weight(),
            });
        }
    }
    let d = 2 * h.n_qubits();
    let mut op = encode(h, false);
    let one = FermionOperator::identity(d);
    for q in 0..h.n_qubits() {
        let bad_site = &(&one + &site_projector(d, q)) * (0.5 * w);
        op = &op + &bad_site;
    }
    let map = EncodingMap {
        n_qubits: h.n_qubits(),
        penalty: w,
        encoding: Encoding::OnePerSite,
    };
    Ok((op.pruned(0.0), map))
}

/// Zero-or-two-fermion encoding with penalty `eps * sum_i (1 - P_i) / 2`.
/// The result does not conserve particle number.
pub fn spin_to_fermion_parity(h: &SpinHamiltonian, eps: f64) -> Result<(FermionOperator, EncodingMap)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArguments(format!(
            "penalty constant must be positive and finite, got {eps}"
        )));
    }
    let d = 2 * h.n_qubits();
    let mut op = encode(h, true);
    let one = FermionOperator::identity(d);
    for q in 0..h.n_qubits() {
        let odd_site = &(&one - &site_projector(d, q)) * (0.5 * eps);
        op = &op + &odd_site;
    }
    let map = EncodingMap {
        n_qubits: h.n_qubits(),
        penalty: eps,
        encoding: Encoding::Parity,
    };
    Ok((op.pruned(0.0), map))
}

/// Rewrites every one-body term `a^dag_i a_j` as
/// `(1 / (N - 1)) sum_k a^dag_i a^dag_k a_k a_j`, which agrees with it on the
/// `N`-particle sector. Constants and two-body terms pass through.
pub fn two_body_normal_form(op: &FermionOperator, n: usize) -> Result<FermionOperator> {
    if n < 2 {
        return Err(Error::InvalidArguments(format!(
            "two-body rewriting needs N >= 2, got {n}"
        )));
    }
    let d = op.d();
    let mut out = FermionOperator::zero(d);
    let scale = 1.0 / (n as f64 - 1.0);
    for (mono, coef) in op.terms() {
        match (mono.creators(), mono.annihilators()) {
            ([], []) | ([_, _], [_, _]) => out.add_term(*coef, mono.clone()),
            (&[i], &[j]) => {
                for k in 0..d {
                    let product = [
                        Ladder::create(i),
                        Ladder::create(k),
                        Ladder::annihilate(k),
                        Ladder::annihilate(j),
                    ];
                    out = &out + &FermionOperator::from_product(d, coef * scale, &product)?;
                }
            }
            _ => {
                return Err(Error::InvalidArguments(format!(
                    "term `{mono}` is not a constant, one-body or two-body number-conserving term"
                )));
            }
        }
    }
    Ok(out.pruned(0.0))
}

/// Complex combination of Pauli words, at most one term per word.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl QubitOperator {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_word(coef: Complex64, word: PauliWord) -> Self {
        let mut op = Self::zero(word.len());
        op.add_term(coef, word);
        op
    }

    pub fn add_term(&mut self, coef: Complex64, word: PauliWord) {
        assert_eq!(word.len(), self.n_qubits);
        *self.terms.entry(word).or_insert(ZERO) += coef;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliWord, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c.conj())).collect(),
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (word, coef) in &self.terms {
            for col in 0..dim {
                let (ph, row) = word.apply(col);
                m[(row, col)] += ph * coef;
            }
        }
        m
    }
}

impl Add for &QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: &QubitOperator) -> QubitOperator {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(*c, w.clone());
        }
        out
    }
}

impl Mul for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: &QubitOperator) -> QubitOperator {
        let mut out = QubitOperator::zero(self.n_qubits);
        for (wl, cl) in &self.terms {
            for (wr, cr) in &rhs.terms {
                let (ph, w) = wl.mul(wr);
                out.add_term(cl * cr * ph, w);
            }
        }
        out
    }
}

/// `A_i = -(Z ... Z)_{k<i} (x) |0><1|_i`, or its adjoint.
pub fn jordan_wigner_ladder(d: usize, ladder: Ladder) -> QubitOperator {
    let mut base = vec![Pauli::Z; ladder.mode];
    base.extend(std::iter::repeat_n(Pauli::I, d - ladder.mode));
    let mut with_x = base.clone();
    with_x[ladder.mode] = Pauli::X;
    let mut with_y = base;
    with_y[ladder.mode] = Pauli::Y;
    // |0><1| = (X + iY)/2, |1><0| = (X - iY)/2
    let y_coef = if ladder.dagger { -0.5 * I } else { 0.5 * I };
    let mut op = QubitOperator::zero(d);
    op.add_term(linalg::re(-0.5), PauliWord(with_x));
    op.add_term(-y_coef, PauliWord(with_y));
    op
}

/// Jordan-Wigner image on `d` qubits.
///
/// Each ladder carries the global minus sign of `A_i`, so a monomial of
/// degree `k` maps to `(-1)^k` times its Fock-space matrix; even-degree
/// operators (all number-conserving ones) are reproduced exactly.
pub fn jordan_wigner(op: &FermionOperator) -> QubitOperator {
    let d = op.d();
    let mut out = QubitOperator::zero(d);
    for (mono, coef) in op.terms() {
        let mut img = QubitOperator::from_word(*coef, PauliWord::identity(d));
        for ladder in mono.ladders() {
            img = &img * &jordan_wigner_ladder(d, ladder);
        }
        out = &out + &img;
    }
    out.pruned(1e-15)
}

/// Restricts a sector matrix to the span of the listed occupations.
pub fn restrict_to_states(
    m: &CMatrix,
    basis: &crate::fock::SlaterBasis,
    states: &[Occupation],
) -> Result<CMatrix> {
    let idx: Vec<usize> = states
        .iter()
        .map(|&s| {
            basis
                .index_of(s)
                .ok_or_else(|| Error::DimensionMismatch("encoded state outside the sector".into()))
        })
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]))
}

/// Restricts a full-Fock-space matrix to the span of the listed occupations.
pub fn restrict_full_space(m: &CMatrix, d: usize, states: &[Occupation]) -> CMatrix {
    let idx: Vec<usize> = states
        .iter()
        .map(|&s| crate::fock::full_space_index(s, d))
        .collect();
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Canonical monomial helper used by tests and the CLI.
pub fn monomial(creators: &[usize], annihilators: &[usize]) -> Option<(f64, Monomial)> {
    Monomial::canonical(creators.to_vec(), annihilators.to_vec())
}
