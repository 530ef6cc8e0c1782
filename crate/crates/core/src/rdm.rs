//! Reduced density matrices and the pair-observable coordinate system.
//!
//! Pairs `I = {i1 < i2}` are ordered lexicographically. The pair state is
//! `|I> = a^dag_I |vac>` with `a_I = a_{i2} a_{i1}`, so it coincides with the
//! two-particle Slater state of the same occupation. The 2-RDM of an
//! `N`-particle density is
//!
//! ```text
//! rho_{I,K} = c_N tr(sigma a^dag_K a_I),    c_N = 2 / (N (N - 1)),
//! ```
//!
//! which has unit trace and equals `sigma` itself at `N = 2`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    apply_ladders, binomial, operator_matrix, FermionOperator, Ladder, NSectorDensity,
    Occupation, SlaterBasis,
};
use crate::linalg::{self, CMatrix, I, ONE, ZERO};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// `2 / (N (N - 1))`.
pub fn pair_normalization(n: usize) -> f64 {
    2.0 / (n as f64 * (n as f64 - 1.0))
}

/// Number of observables `2 C(m, 2) + m - 1` with `m = C(d, 2)`.
pub fn observable_count(d: usize) -> usize {
    let m = d * (d - 1) / 2;
    m * (m - 1) + m - 1
}

/// Lexicographically ordered unordered mode pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairBasis {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairBasis {
    pub fn new(d: usize) -> Self {
        let pairs = (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .collect();
        Self { d, pairs }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    /// Position of `{i, j}` (either order); `None` when `i == j`.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i == j || i >= self.d || j >= self.d {
            return None;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // pairs starting below a: sum_{t<a} (d - 1 - t)
        Some(a * (2 * self.d - a - 1) / 2 + (b - a - 1))
    }

    pub fn occupation(&self, k: usize) -> Occupation {
        let (a, b) = self.pairs[k];
        1 << a | 1 << b
    }
}

/// Sparse table of `<row| a^dag_K a_I |col>` on one sector.
///
/// Maps sector densities to 2-RDMs (`reduce`) and pair-space Hermitian
/// matrices back to sector operators (`lift`), adjoint to each other:
/// `tr(G reduce(sigma)) = c_N tr(sigma lift(G))`.
#[derive(Clone, Debug)]
pub struct PairLift {
    basis: Arc<SlaterBasis>,
    m: usize,
    entries: Vec<(u32, u32, u32, u32, f64)>,
}

impl PairLift {
    pub fn new(basis: Arc<SlaterBasis>) -> Result<Self> {
        let d = basis.d();
        let n = basis.n();
        if n < 2 {
            return Err(Error::InvalidArguments(format!(
                "pair quantities need N >= 2, got N={n}"
            )));
        }
        let pb = PairBasis::new(d);
        let mut entries = Vec::new();
        for (col, &occ) in basis.states().iter().enumerate() {
            for (ki, &(i1, i2)) in pb.pairs().iter().enumerate() {
                if occ >> i1 & 1 == 0 || occ >> i2 & 1 == 0 {
                    continue;
                }
                let rest = occ & !(1 << i1 | 1 << i2);
                for (kk, &(k1, k2)) in pb.pairs().iter().enumerate() {
                    if rest >> k1 & 1 == 1 || rest >> k2 & 1 == 1 {
                        continue;
                    }
                    let product = [
                        Ladder::create(k1),
                        Ladder::create(k2),
                        Ladder::annihilate(i2),
                        Ladder::annihilate(i1),
                    ];
                    if let Some((sign, out)) = apply_ladders(&product, occ) {
                        let row = basis.index_of(out).expect("image stays in the sector");
                        entries.push((row as u32, col as u32, kk as u32, ki as u32, sign));
                    }
                }
            }
        }
        Ok(Self {
            m: pb.len(),
            basis,
            entries,
        })
    }

    pub fn basis(&self) -> &Arc<SlaterBasis> {
        &self.basis
    }

    pub fn pair_dim(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// `R(sigma)_{I,K} = c_N tr(sigma a^dag_K a_I)`.
    pub fn reduce(&self, sigma: &CMatrix) -> CMatrix {
        let c = pair_normalization(self.n());
        let mut r = CMatrix::zeros(self.m, self.m);
        for &(row, col, k, i, sign) in &self.entries {
            r[(i as usize, k as usize)] += sigma[(col as usize, row as usize)] * sign;
        }
        r * linalg::re(c)
    }

    /// Sector matrix of `sum_{I,K} G_{K,I} a^dag_K a_I`.
    pub fn lift(&self, g: &CMatrix) -> CMatrix {
        let dim = self.basis.len();
        let mut out = CMatrix::zeros(dim, dim);
        for &(row, col, k, i, sign) in &self.entries {
            out[(row as usize, col as usize)] += g[(k as usize, i as usize)] * sign;
        }
        out
    }
}

/// Two-particle reduced density matrix over the pair basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoRDM {
    d: usize,
    n: usize,
    matrix: CMatrix,
}

fn check_pair_dims(d: usize, n: usize, matrix: &CMatrix) -> Result<usize> {
    if d < 2 || n < 2 || n > d {
        return Err(Error::InvalidArguments(format!(
            "2-RDM needs 2 <= N <= d, got d={d} N={n}"
        )));
    }
    let m = d * (d - 1) / 2;
    if matrix.nrows() != m || matrix.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for a pair basis of size {m}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(m)
}

impl TwoRDM {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(d: usize, n: usize, matrix: CMatrix) -> Result<Self> {
        check_pair_dims(d, n, &matrix)?;
        let dev = linalg::hermiticity_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "2-RDM is not Hermitian (deviation {dev:e})"
            )));
        }
        let matrix = linalg::hermitian_part(&matrix);
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("2-RDM has trace {tr}")));
        }
        let min = linalg::eigvalsh(&matrix)[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "2-RDM has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { d, n, matrix })
    }

    pub fn maximally_mixed(d: usize, n: usize) -> Result<Self> {
        let m = d * (d - 1) / 2;
        Self::new(d, n, CMatrix::identity(m, m) / linalg::re(m as f64))
    }

    /// Rank-one projector onto the pair `{i, j}` (0-based modes).
    pub fn pair_projector(d: usize, n: usize, i: usize, j: usize) -> Result<Self> {
        let pb = PairBasis::new(d);
        let k = pb
            .index_of(i, j)
            .ok_or_else(|| Error::InvalidArguments(format!("bad pair ({i}, {j})")))?;
        let mut m = CMatrix::zeros(pb.len(), pb.len());
        m[(k, k)] = ONE;
        Self::new(d, n, m)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn pair_basis(&self) -> PairBasis {
        PairBasis::new(self.d)
    }

    /// Same matrix, claimed for a different particle number.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n < 2 || n > self.d {
            return Err(Error::InvalidArguments(format!(
                "2-RDM needs 2 <= N <= d, got d={} N={n}",
                self.d
            )));
        }
        Ok(Self {
            d: self.d,
            n,
            matrix: self.matrix.clone(),
        })
    }
}

/// 2-RDM of an `N`-particle density.
pub fn two_rdm(sigma: &NSectorDensity) -> Result<TwoRDM> {
    let lift = PairLift::new(Arc::clone(sigma.basis()))?;
    Ok(TwoRDM {
        d: sigma.d(),
        n: sigma.n(),
        matrix: linalg::hermitian_part(&lift.reduce(sigma.matrix())),
    })
}

/// One-body density `gamma_{ij} = <a^dag_i a_j>`, trace `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneRDM {
    n: usize,
    matrix: CMatrix,
}

impl OneRDM {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch("1-RDM must be square".into()));
        }
        let dev = linalg::hermiticity_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "1-RDM is not Hermitian (deviation {dev:e})"
            )));
        }
        Ok(Self {
            n,
            matrix: linalg::hermitian_part(&matrix),
        })
    }

    pub fn from_diagonal(n: usize, diag: &[f64]) -> Self {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| linalg::re(x)),
        ));
        Self { n, matrix: m }
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }
}

pub fn one_rdm(sigma: &NSectorDensity) -> OneRDM {
    let basis = sigma.basis();
    let d = basis.d();
    let rho = sigma.matrix();
    let mut g = CMatrix::zeros(d, d);
    for (col, &occ) in basis.states().iter().enumerate() {
        for j in (0..d).filter(|&j| occ >> j & 1 == 1) {
            for i in 0..d {
                if let Some((sign, out)) =
                    apply_ladders(&[Ladder::create(i), Ladder::annihilate(j)], occ)
                {
                    let row = basis.index_of(out).expect("hopping stays in the sector");
                    g[(i, j)] += rho[(col, row)] * sign;
                }
            }
        }
    }
    OneRDM {
        n: basis.n(),
        matrix: linalg::hermitian_part(&g),
    }
}

/// One-body density obtained by contracting a 2-RDM over one mode,
/// `gamma_{ij} = (1 / (N - 1)) sum_k <a^dag_i a^dag_k a_k a_j>`.
pub fn contracted_one_rdm(rho: &TwoRDM) -> OneRDM {
    let d = rho.d;
    let pb = PairBasis::new(d);
    let s = |lower: bool| if lower { 1.0 } else { -1.0 };
    let scale = rho.n as f64 / 2.0;
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = ZERO;
            for k in (0..d).filter(|&k| k != i && k != j) {
                let row = pb.index_of(j, k).unwrap();
                let col = pb.index_of(i, k).unwrap();
                acc += rho.matrix[(row, col)] * (s(i < k) * s(j < k));
            }
            g[(i, j)] = acc * scale;
        }
    }
    OneRDM {
        n: rho.n,
        matrix: linalg::hermitian_part(&g),
    }
}

/// Ensemble representability of a 1-RDM: spectrum in `[0, 1]` and trace `N`.
pub fn coleman_check(gamma: &OneRDM) -> bool {
    let tr = linalg::trace(&gamma.matrix).re;
    if (tr - gamma.n as f64).abs() > 1e-8 {
        return false;
    }
    gamma
        .eigenvalues()
        .iter()
        .all(|&x| (-1e-10..=1.0 + 1e-10).contains(&x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    X,
    Y,
    Z,
}

/// The observable set: `X_IJ`, `Y_IJ` for pair pairs `I < J`, then `Z_I` for all
/// pairs but the last. Together with the identity it spans the Hermitian
/// pair-space matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableBasis {
    pairs: PairBasis,
    off_diagonal: Vec<(usize, usize)>,
}

impl ObservableBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidArguments(format!(
                "observable basis needs d >= 3, got d={d}"
            )));
        }
        let pairs = PairBasis::new(d);
        let m = pairs.len();
        let off_diagonal = (0..m).flat_map(|p| (p + 1..m).map(move |q| (p, q))).collect();
        Ok(Self {
            pairs,
            off_diagonal,
        })
    }

    pub fn d(&self) -> usize {
        self.pairs.d()
    }

    pub fn pair_basis(&self) -> &PairBasis {
        &self.pairs
    }

    /// `m = C(d, 2)`.
    pub fn pair_dim(&self) -> usize {
        self.pairs.len()
    }

    /// `ell`.
    pub fn len(&self) -> usize {
        2 * self.off_diagonal.len() + self.pairs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Kind and pair indices `(I, J)` of observable `k` (`J == I` for `Z`).
    pub fn label(&self, k: usize) -> (ObservableKind, usize, usize) {
        let h = self.off_diagonal.len();
        if k < h {
            let (p, q) = self.off_diagonal[k];
            (ObservableKind::X, p, q)
        } else if k < 2 * h {
            let (p, q) = self.off_diagonal[k - h];
            (ObservableKind::Y, p, q)
        } else {
            (ObservableKind::Z, k - 2 * h, k - 2 * h)
        }
    }

    /// Human-readable name with 1-based modes, e.g. `X[12,34]`.
    pub fn name(&self, k: usize) -> String {
        let (kind, p, q) = self.label(k);
        let fmt = |t: usize| {
            let (a, b) = self.pairs.pair(t);
            format!("{}{}", a + 1, b + 1)
        };
        match kind {
            ObservableKind::X => format!("X[{},{}]", fmt(p), fmt(q)),
            ObservableKind::Y => format!("Y[{},{}]", fmt(p), fmt(q)),
            ObservableKind::Z => format!("Z[{}]", fmt(p)),
        }
    }

    fn pair_op(&self, coef: Complex64, k: usize, i: usize) -> FermionOperator {
        let (k1, k2) = self.pairs.pair(k);
        let (i1, i2) = self.pairs.pair(i);
        FermionOperator::from_product(
            self.d(),
            coef,
            &[
                Ladder::create(k1),
                Ladder::create(k2),
                Ladder::annihilate(i2),
                Ladder::annihilate(i1),
            ],
        )
        .expect("modes in range")
    }

    /// Observable `k` as a fermionic operator.
    pub fn operator(&self, k: usize) -> FermionOperator {
        let (kind, p, q) = self.label(k);
        match kind {
            ObservableKind::X => &self.pair_op(ONE, p, q) + &self.pair_op(ONE, q, p),
            ObservableKind::Y => &self.pair_op(-I, p, q) + &self.pair_op(I, q, p),
            ObservableKind::Z => self.pair_op(ONE, p, p),
        }
    }

    pub fn operators(&self) -> Vec<FermionOperator> {
        (0..self.len()).map(|k| self.operator(k)).collect()
    }

    /// Matrix of observable `k` on the two-particle (pair) space.
    pub fn pair_matrix(&self, k: usize) -> CMatrix {
        let m = self.pair_dim();
        let mut out = CMatrix::zeros(m, m);
        let (kind, p, q) = self.label(k);
        match kind {
            ObservableKind::X => {
                out[(p, q)] = ONE;
                out[(q, p)] = ONE;
            }
            ObservableKind::Y => {
                out[(p, q)] = -I;
                out[(q, p)] = I;
            }
            ObservableKind::Z => out[(p, p)] = ONE,
        }
        out
    }

    /// Matrix of observable `k` on an arbitrary sector.
    pub fn sector_matrix(&self, k: usize, basis: &SlaterBasis) -> Result<CMatrix> {
        operator_matrix(&self.operator(k), basis, basis)
    }

    /// `alpha_S = tr(S rho)` for a Hermitian pair-space matrix.
    pub fn coordinates(&self, rho: &CMatrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.off_diagonal.iter().map(|&(p, q)| 2.0 * rho[(p, q)].re));
        out.extend(self.off_diagonal.iter().map(|&(p, q)| -2.0 * rho[(p, q)].im));
        out.extend((0..self.pair_dim() - 1).map(|p| rho[(p, p)].re));
        out
    }

    /// The Hermitian trace-one matrix with the given coordinates.
    pub fn matrix_from_coordinates(&self, alpha: &[f64]) -> CMatrix {
        let m = self.pair_dim();
        let h = self.off_diagonal.len();
        let mut rho = CMatrix::zeros(m, m);
        for (k, &(p, q)) in self.off_diagonal.iter().enumerate() {
            let v = linalg::c(alpha[k], -alpha[h + k]) * 0.5;
            rho[(p, q)] = v;
            rho[(q, p)] = v.conj();
        }
        let mut rest = 1.0;
        for p in 0..m - 1 {
            rho[(p, p)] = linalg::re(alpha[2 * h + p]);
            rest -= alpha[2 * h + p];
        }
        rho[(m - 1, m - 1)] = linalg::re(rest);
        rho
    }

    /// Expansion `G = sum_S gamma_S S + g0 * 1` of a Hermitian pair matrix.
    pub fn expand(&self, g: &CMatrix) -> (Vec<f64>, f64) {
        let m = self.pair_dim();
        let last = g[(m - 1, m - 1)].re;
        let mut gamma = Vec::with_capacity(self.len());
        gamma.extend(self.off_diagonal.iter().map(|&(p, q)| g[(p, q)].re));
        gamma.extend(self.off_diagonal.iter().map(|&(p, q)| -g[(p, q)].im));
        gamma.extend((0..m - 1).map(|p| g[(p, p)].re - last));
        (gamma, last)
    }

    /// `sum_S gamma_S S` as a pair-space matrix.
    pub fn combine(&self, gamma: &[f64]) -> CMatrix {
        let m = self.pair_dim();
        let h = self.off_diagonal.len();
        let mut g = CMatrix::zeros(m, m);
        for (k, &(p, q)) in self.off_diagonal.iter().enumerate() {
            let v = linalg::c(gamma[k], -gamma[h + k]);
            g[(p, q)] = v;
            g[(q, p)] = v.conj();
        }
        for p in 0..m - 1 {
            g[(p, p)] = linalg::re(gamma[2 * h + p]);
        }
        g
    }

    /// Rank of `S` together with the identity, as real vectors in the
    /// `m^2`-dimensional space of Hermitian pair matrices.
    pub fn span_rank(&self) -> usize {
        let m = self.pair_dim();
        let mut cols: Vec<CMatrix> = (0..self.len()).map(|k| self.pair_matrix(k)).collect();
        cols.push(CMatrix::identity(m, m));
        let a = DMatrix::<f64>::from_fn(2 * m * m, cols.len(), |r, c| {
            let z = cols[c][(r / 2 / m, r / 2 % m)];
            if r % 2 == 0 { z.re } else { z.im }
        });
        let sv = a.singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > max * 1e-10).count()
    }
}

pub fn observable_basis(d: usize) -> Result<ObservableBasis> {
    ObservableBasis::new(d)
}

/// Coordinates `alpha` of a 2-RDM in the observable basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationVector {
    d: usize,
    n: usize,
    values: Vec<f64>,
}

impl ExpectationVector {
    /// Any real vector of length `ell`; entries outside `[-1, 1]` are allowed
    /// (ellipsoid centers), they simply describe points outside `K`.
    pub fn new(d: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidArguments(format!("d={d} must be at least 3")));
        }
        let ell = observable_count(d);
        if values.len() != ell {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates, expected {ell} for d={d}",
                values.len()
            )));
        }
        Ok(Self { d, n, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub fn expectation_vector(rho: &TwoRDM) -> Result<ExpectationVector> {
    let basis = ObservableBasis::new(rho.d)?;
    ExpectationVector::new(rho.d, rho.n, basis.coordinates(&rho.matrix))
}

/// The Hermitian trace-one pair matrix with the given coordinates. It is a
/// valid [`TwoRDM`] only when positive semidefinite.
pub fn rdm_from_alpha(alpha: &ExpectationVector) -> CMatrix {
    ObservableBasis::new(alpha.d)
        .expect("validated at construction")
        .matrix_from_coordinates(&alpha.values)
}

/// `tr |A - B|`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(linalg::trace_norm(&linalg::hermitian_part(&(a - b))))
}

/// `D_ij = <a^dag_i a^dag_j a_j a_i>`, read off the 2-RDM diagonal.
pub fn diagonal_elements(rho: &TwoRDM) -> DMatrix<f64> {
    let pb = PairBasis::new(rho.d);
    let scale = 1.0 / pair_normalization(rho.n);
    let mut out = DMatrix::zeros(rho.d, rho.d);
    for (k, &(i, j)) in pb.pairs().iter().enumerate() {
        let v = rho.matrix[(k, k)].re * scale;
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    out
}

/// `(1 / N) sum_k a_k sigma a^dag_k`: an `(N - 1)`-particle density with the
/// same 2-RDM.
pub fn trace_out_particle(sigma: &NSectorDensity) -> Result<NSectorDensity> {
    let basis = sigma.basis();
    let (d, n) = (basis.d(), basis.n());
    if n == 0 {
        return Err(Error::InvalidArguments("no particle to trace out".into()));
    }
    let lower = Arc::new(SlaterBasis::with_cap(d, n - 1, usize::MAX)?);
    let mut out = CMatrix::zeros(lower.len(), lower.len());
    for k in 0..d {
        let a = operator_matrix(&FermionOperator::annihilate(d, k)?, basis, &lower)?;
        out += &a * sigma.matrix() * a.adjoint();
    }
    out /= linalg::re(n as f64);
    NSectorDensity::new(lower, linalg::hermitian_part(&out))
}

/// Number of pair indices `I` (by position) disjoint from a pair.
pub fn disjoint_pairs(pb: &PairBasis, k: usize) -> Vec<usize> {
    let occ = pb.occupation(k);
    (0..pb.len()).filter(|&l| pb.occupation(l) & occ == 0).collect()
}

/// `binomial(d, 2)` as usize.
pub fn pair_count(d: usize) -> usize {
    binomial(d, 2) as usize
}

/// Lookup from occupation to pair index, for callers holding bitstrings.
pub fn pair_index_map(pb: &PairBasis) -> HashMap<Occupation, usize> {
    (0..pb.len()).map(|k| (pb.occupation(k), k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, parse_occupation, NSectorState};
    use crate::linalg::{c, re};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn occ(s: &str) -> Occupation {
        parse_occupation(s).unwrap().0
    }

    fn slater(d: usize, n: usize, s: &str) -> NSectorDensity {
        let b = Arc::new(build_basis(d, n).unwrap());
        NSectorState::slater(b, occ(s)).unwrap().density()
    }

    /// `c_N tr(sigma a^dag_k a^dag_l a_j a_i)` through the generic operator path.
    fn brute_two_rdm(sigma: &NSectorDensity) -> CMatrix {
        let d = sigma.d();
        let pb = PairBasis::new(d);
        let c_n = pair_normalization(sigma.n());
        CMatrix::from_fn(pb.len(), pb.len(), |r, col| {
            let (i, j) = pb.pair(r);
            let (k, l) = pb.pair(col);
            let op = FermionOperator::from_product(
                d,
                ONE,
                &[
                    Ladder::create(k),
                    Ladder::create(l),
                    Ladder::annihilate(j),
                    Ladder::annihilate(i),
                ],
            )
            .unwrap();
            sigma.expectation(&op).unwrap() * c_n
        })
    }

    #[test]
    fn pair_index_formula() {
        let pb = PairBasis::new(5);
        for (k, &(i, j)) in pb.pairs().iter().enumerate() {
            assert_eq!(pb.index_of(i, j), Some(k));
            assert_eq!(pb.index_of(j, i), Some(k));
        }
        assert_eq!(pb.index_of(2, 2), None);
    }

    #[test]
    fn two_rdm_examples() {
        let rho = two_rdm(&slater(4, 2, "1100")).unwrap();
        let mut expected = CMatrix::zeros(6, 6);
        expected[(0, 0)] = ONE;
        assert_eq!(rho.matrix(), &expected);

        let rho = two_rdm(&slater(4, 3, "1110")).unwrap();
        let pb = PairBasis::new(4);
        for k in 0..6 {
            let (_, j) = pb.pair(k);
            let want = if j <= 2 { 1.0 / 3.0 } else { 0.0 };
            assert_abs_diff_eq!(rho.matrix()[(k, k)].re, want, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(linalg::frobenius(&(rho.matrix() - CMatrix::from_diagonal(&rho.matrix().diagonal()))), 0.0);
        assert!(pb.index_of(0, 1).is_some());
    }

    #[test]
    fn two_rdm_matches_operator_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (d, n) in [(4, 2), (5, 3), (6, 3), (6, 4)] {
            let b = Arc::new(build_basis(d, n).unwrap());
            let sigma = NSectorDensity::random(b, 3, &mut rng);
            let fast = two_rdm(&sigma).unwrap();
            let slow = brute_two_rdm(&sigma);
            assert!(linalg::frobenius(&(fast.matrix() - slow)) < 1e-12);
            assert_abs_diff_eq!(linalg::trace(fast.matrix()).re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lift_is_adjoint_of_reduce() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = Arc::new(build_basis(6, 3).unwrap());
        let lift = PairLift::new(Arc::clone(&b)).unwrap();
        let sigma = linalg::random_density(b.len(), 4, &mut rng);
        let g = linalg::random_hermitian(15, 1.0, &mut rng);
        let lhs = linalg::trace_product(&g, &lift.reduce(&sigma));
        let rhs = linalg::trace_product(&sigma, &lift.lift(&g)) * pair_normalization(3);
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-12);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-12);
    }

    #[test]
    fn one_rdm_examples() {
        let g = one_rdm(&slater(4, 2, "1100"));
        let diag: Vec<f64> = g.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, [1.0, 1.0, 0.0, 0.0]);

        let b = Arc::new(build_basis(4, 2).unwrap());
        let mut v = crate::linalg::CVector::zeros(6);
        v[b.index_of(occ("1100")).unwrap()] = re(1.0);
        v[b.index_of(occ("0011")).unwrap()] = re(1.0);
        let psi = NSectorState::normalized(b, v).unwrap();
        let g = one_rdm(&psi.density());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(g.matrix()[(i, j)].re, want, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(linalg::trace(g.matrix()).re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn coleman_examples() {
        assert!(coleman_check(&OneRDM::from_diagonal(2, &[1.0, 1.0, 0.0, 0.0])));
        assert!(!coleman_check(&OneRDM::from_diagonal(2, &[1.5, 0.5, 0.0, 0.0])));
        assert!(coleman_check(&OneRDM::from_diagonal(2, &[0.5; 4])));
        assert!(!coleman_check(&OneRDM::from_diagonal(3, &[0.5; 4])));
    }

    #[test]
    fn contracted_one_rdm_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (d, n) in [(4, 2), (5, 3), (6, 4), (6, 2)] {
            let b = Arc::new(build_basis(d, n).unwrap());
            let sigma = NSectorDensity::random(b, 2, &mut rng);
            let direct = one_rdm(&sigma);
            let contracted = contracted_one_rdm(&two_rdm(&sigma).unwrap());
            assert!(linalg::frobenius(&(direct.matrix() - contracted.matrix())) < 1e-12);
        }
    }

    #[test]
    fn observable_basis_examples() {
        let s = observable_basis(4).unwrap();
        assert_eq!(s.pair_dim(), 6);
        assert_eq!(s.len(), 35);
        assert_eq!(s.span_rank(), 36);
        assert!(observable_basis(2).is_err());
        let b = build_basis(4, 2).unwrap();
        for k in 30..35 {
            let m = s.sector_matrix(k, &b).unwrap();
            for r in 0..6 {
                for col in 0..6 {
                    let z = m[(r, col)];
                    if r != col {
                        assert_eq!(z, ZERO);
                    } else {
                        assert!(z == ZERO || z == ONE);
                    }
                }
            }
        }
        assert_eq!(s.name(0), "X[12,13]");
        assert_eq!(s.name(34), "Z[24]");
    }

    #[test]
    fn pair_matrix_matches_operator_on_two_particle_sector() {
        let s = observable_basis(5).unwrap();
        let b = build_basis(5, 2).unwrap();
        for k in 0..s.len() {
            let direct = s.sector_matrix(k, &b).unwrap();
            assert_eq!(direct, s.pair_matrix(k), "observable {}", s.name(k));
        }
    }

    #[test]
    fn observable_spectra_in_unit_interval() {
        let s = observable_basis(5).unwrap();
        let b = build_basis(5, 3).unwrap();
        for k in (0..s.len()).step_by(7) {
            let ev = linalg::eigvalsh(&s.sector_matrix(k, &b).unwrap());
            assert!(ev[0] >= -1.0 - 1e-12 && ev[ev.len() - 1] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn expectation_vector_examples() {
        let rho = TwoRDM::pair_projector(4, 2, 0, 1).unwrap();
        let a = expectation_vector(&rho).unwrap();
        assert_eq!(a.values()[30], 1.0);
        assert!(a.values()[31..].iter().all(|&x| x == 0.0));

        let mixed = TwoRDM::maximally_mixed(4, 2).unwrap();
        let a = expectation_vector(&mixed).unwrap();
        assert!(a.values()[..30].iter().all(|&x| x == 0.0));
        assert!(a.values()[30..].iter().all(|&x| (x - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn rdm_from_alpha_examples() {
        let zero = ExpectationVector::new(4, 2, vec![0.0; 35]).unwrap();
        let m = rdm_from_alpha(&zero);
        // all Z_I vanish except the implicit last pair
        assert_abs_diff_eq!(m[(5, 5)].re, 1.0);
        let mut alpha = vec![0.0; 35];
        alpha[30] = 1.0;
        let m = rdm_from_alpha(&ExpectationVector::new(4, 2, alpha.clone()).unwrap());
        let s = observable_basis(4).unwrap();
        let back: Vec<f64> = (0..35)
            .map(|k| linalg::trace_product(&s.pair_matrix(k), &m).re)
            .collect();
        assert_eq!(back, alpha);
        assert_abs_diff_eq!(linalg::trace(&m).re, 1.0);
    }

    #[test]
    fn coordinates_match_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = observable_basis(5).unwrap();
        let rho = linalg::random_density(10, 4, &mut rng);
        let fast = s.coordinates(&rho);
        for k in 0..s.len() {
            let slow = linalg::trace_product(&s.pair_matrix(k), &rho).re;
            assert_abs_diff_eq!(fast[k], slow, epsilon = 1e-14);
        }
        let back = s.matrix_from_coordinates(&fast);
        assert!(linalg::frobenius(&(back - &rho)) < 1e-14);
    }

    #[test]
    fn expand_and_combine_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = observable_basis(4).unwrap();
        let g = linalg::random_hermitian(6, 1.0, &mut rng);
        let (gamma, g0) = s.expand(&g);
        let rebuilt = s.combine(&gamma) + CMatrix::identity(6, 6) * re(g0);
        assert!(linalg::frobenius(&(rebuilt - &g)) < 1e-14);
        let rho = linalg::random_density(6, 2, &mut rng);
        let alpha = s.coordinates(&rho);
        let lin: f64 = gamma.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>() + g0;
        assert_abs_diff_eq!(lin, linalg::trace_product(&g, &rho).re, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let p = TwoRDM::pair_projector(4, 2, 0, 1).unwrap();
        let q = TwoRDM::pair_projector(4, 2, 2, 3).unwrap();
        let mixed = TwoRDM::maximally_mixed(4, 2).unwrap();
        assert_abs_diff_eq!(trace_distance(p.matrix(), p.matrix()).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(p.matrix(), q.matrix()).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            trace_distance(p.matrix(), mixed.matrix()).unwrap(),
            5.0 / 3.0,
            epsilon = 1e-12
        );
        assert!(trace_distance(p.matrix(), &CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn diagonal_elements_examples() {
        let dm = diagonal_elements(&two_rdm(&slater(4, 2, "1100")).unwrap());
        assert_eq!(dm[(0, 1)], 1.0);
        assert_eq!(dm[(1, 0)], 1.0);
        assert_eq!(dm.sum(), 2.0);

        let dm = diagonal_elements(&two_rdm(&slater(5, 3, "11100")).unwrap());
        for i in 0..5 {
            for j in 0..5 {
                let want = if i != j && i < 3 && j < 3 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dm[(i, j)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn tracing_out_a_particle_keeps_the_two_rdm() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = Arc::new(build_basis(7, 4).unwrap());
        let sigma = NSectorDensity::random(b, 3, &mut rng);
        let lower = trace_out_particle(&sigma).unwrap();
        assert_eq!(lower.n(), 3);
        let r1 = two_rdm(&sigma).unwrap();
        let r2 = two_rdm(&lower).unwrap();
        assert!(linalg::frobenius(&(r1.matrix() - r2.matrix())) < 1e-12);
    }

    #[test]
    fn two_rdm_validation() {
        let mut m = CMatrix::identity(6, 6) / re(6.0);
        assert!(TwoRDM::new(4, 2, m.clone()).is_ok());
        assert!(TwoRDM::new(4, 1, m.clone()).is_err());
        m[(0, 1)] = c(0.3, 0.0);
        assert!(TwoRDM::new(4, 2, m).is_err());
        assert!(TwoRDM::new(4, 2, CMatrix::identity(5, 5)).is_err());
    }
}
