//! Dense complex linear algebra shared by every module.
//!
//! Everything here works on `nalgebra` dense matrices of `Complex64`. Sector
//! dimensions are capped, so dense storage and full eigendecompositions are
//! the norm; the shifted power iteration is kept for sectors past the point
//! where a full decomposition stops being cheap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Above this dimension `lowest_eigenpair` switches to power iteration.
pub const DENSE_EIGEN_LIMIT: usize = 256;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest entrywise modulus of `m - m^dagger`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending and
/// eigenvectors as the matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Minimum eigenvalue and a unit eigenvector of a Hermitian matrix.
pub fn lowest_eigenpair(m: &CMatrix) -> (f64, CVector) {
    if m.nrows() > DENSE_EIGEN_LIMIT {
        if let Some(pair) = shifted_power_min(m, 1e-10, 20_000, 0x5eed) {
            return pair;
        }
    }
    let (values, vectors) = eigh(m);
    (values[0], vectors.column(0).into_owned())
}

/// Minimum eigenpair by power iteration on `shift * 1 - m`, where the shift is
/// a Gershgorin upper bound on the spectrum. Returns `None` when the residual
/// `|| m v - lambda v ||` has not dropped below `tol` within `max_iter` steps.
pub fn shifted_power_min(
    m: &CMatrix,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Option<(f64, CVector)> {
    let n = m.nrows();
    let shift = (0..n)
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVector::from_fn(n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    v /= re(v.norm());
    for _ in 0..max_iter {
        let mv = m * &v;
        let lambda = v.dotc(&mv).re;
        let residual = (&mv - &v * re(lambda)).norm();
        if residual <= tol {
            return Some((lambda, v));
        }
        let mut next = &v * re(shift) - mv;
        let norm = next.norm();
        if norm == 0.0 {
            return Some((lambda, v));
        }
        next /= re(norm);
        v = next;
    }
    None
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Frobenius-nearest density matrix (PSD, unit trace) to a Hermitian matrix:
/// eigenvalues are projected onto the simplex, eigenvectors are kept.
pub fn nearest_density(h: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(h);
    let clipped = project_onto_simplex(&values);
    let n = h.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &w) in clipped.iter().enumerate() {
        if w > 0.0 {
            let col = vectors.column(k);
            out += (&col * col.adjoint()).scale(w);
        }
    }
    out
}

/// `sum |lambda|` over the spectrum of a Hermitian matrix.
pub fn trace_norm(h: &CMatrix) -> f64 {
    eigvalsh(h).iter().map(|x| x.abs()).sum()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Haar-ish random unit vector from i.i.d. complex Gaussians.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let mut v = CVector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v /= re(n);
    v
}

/// Random density matrix of the given rank (Ginibre construction).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let rank = rank.clamp(1, dim.max(1));
    let g = CMatrix::from_fn(dim, rank, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let t = trace(&rho).re;
    hermitian_part(&(rho / re(t)))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    hermitian_part(&g).scale(scale)
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / re(d.norm()) } else { ONE };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Smallest and largest singular values of a real matrix.
pub fn singular_value_range(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.singular_values();
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sv.iter().copied().fold(0.0, f64::max);
    (min, max)
}
