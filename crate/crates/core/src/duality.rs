//! Particle-hole duality between the 2-particle and the `(d-2)`-particle
//! sectors.
//!
//! Hole observables are the pair observables with creators and annihilators
//! exchanged: `X'_IJ = a_I a_J^dag + a_J a_I^dag`, `Y'_IJ = -i a_I a_J^dag +
//! i a_J a_I^dag` and `Z'_I = a_I a_I^dag`. The pair `I` occupied in a
//! 2-particle state corresponds to the pair `I` empty in a `(d-2)`-particle
//! state, and under that correspondence particle expectations of the first
//! equal hole expectations of the second.
//!
//! Particle coordinates on the `(d-2)` sector are those of its 2-RDM (scaled
//! by `c_N`), hole coordinates are plain expectations `tr(S' tau)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    apply_ladders, operator_matrix, FermionOperator, Ladder, NSectorDensity, Occupation,
    SlaterBasis,
};
use crate::linalg::{self, CMatrix, I, ONE};
use crate::rdm::{
    pair_normalization, ExpectationVector, ObservableBasis, ObservableKind, PairLift,
};

/// Hole counterparts of [`ObservableBasis`], in the same order.
#[derive(Clone, Debug)]
pub struct HoleObservableBasis {
    particles: ObservableBasis,
}

impl HoleObservableBasis {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            particles: ObservableBasis::new(d)?,
        })
    }

    pub fn d(&self) -> usize {
        self.particles.d()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn particle_basis(&self) -> &ObservableBasis {
        &self.particles
    }

    /// Primed name, e.g. `X'[12,34]`.
    pub fn name(&self, k: usize) -> String {
        let name = self.particles.name(k);
        format!("{}'{}", &name[..1], &name[1..])
    }

    /// `coef * a_K a_I^dag`.
    fn hole_op(&self, coef: Complex64, k: usize, i: usize) -> FermionOperator {
        let pb = self.particles.pair_basis();
        let (k1, k2) = pb.pair(k);
        let (i1, i2) = pb.pair(i);
        FermionOperator::from_product(
            self.d(),
            coef,
            &[
                Ladder::annihilate(k2),
                Ladder::annihilate(k1),
                Ladder::create(i1),
                Ladder::create(i2),
            ],
        )
        .expect("modes in range")
    }

    pub fn operator(&self, k: usize) -> FermionOperator {
        let (kind, p, q) = self.particles.label(k);
        match kind {
            ObservableKind::X => &self.hole_op(ONE, p, q) + &self.hole_op(ONE, q, p),
            ObservableKind::Y => &self.hole_op(-I, p, q) + &self.hole_op(I, q, p),
            ObservableKind::Z => self.hole_op(ONE, p, p),
        }
    }

    /// `Z'_L` for any pair, including the last one.
    pub fn pair_hole_number(&self, l: usize) -> FermionOperator {
        self.hole_op(ONE, l, l)
    }

    pub fn sector_matrices(&self, basis: &SlaterBasis) -> Result<Vec<CMatrix>> {
        (0..self.len())
            .map(|k| operator_matrix(&self.operator(k), basis, basis))
            .collect()
    }
}

/// Sign of `a_K |full>` for the pair `K`, which is the phase that makes the
/// complement map carry particle expectations to hole expectations.
fn complement_phase(k: (usize, usize), d: usize) -> f64 {
    let full: Occupation = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    let (sign, _) = apply_ladders(&[Ladder::annihilate(k.1), Ladder::annihilate(k.0)], full)
        .expect("full state has every mode");
    sign
}

/// Maps a 2-particle density to the `(d-2)`-particle density with the
/// complementary occupations.
pub fn slater_complement(sigma2: &NSectorDensity) -> Result<NSectorDensity> {
    let d = sigma2.d();
    if sigma2.n() != 2 {
        return Err(Error::InvalidArguments(format!(
            "complement map takes a 2-particle density, got N={}",
            sigma2.n()
        )));
    }
    if d < 4 {
        return Err(Error::InvalidArguments(format!("complement map needs d >= 4, got d={d}")));
    }
    let target = Arc::new(SlaterBasis::new(d, d - 2)?);
    let full: Occupation = (1u64 << d) - 1;
    let src = sigma2.basis();
    let m = src.len();
    // position and phase of each complemented state
    let image: Vec<(usize, f64)> = (0..m)
        .map(|k| {
            let occ = src.state(k);
            let pair = (occ.trailing_zeros() as usize, 63 - occ.leading_zeros() as usize);
            let idx = target.index_of(full & !occ).expect("complement lies in the sector");
            (idx, complement_phase(pair, d))
        })
        .collect();
    let mut tau = CMatrix::zeros(m, m);
    for (r, &(ri, rs)) in image.iter().enumerate() {
        for (c, &(ci, cs)) in image.iter().enumerate() {
            tau[(ri, ci)] = sigma2.matrix()[(r, c)] * (rs * cs);
        }
    }
    NSectorDensity::new(target, tau)
}

/// `alpha'_S = tr(S' tau)` in [`HoleObservableBasis`] order.
pub fn hole_expectation_vector(tau: &NSectorDensity) -> Result<ExpectationVector> {
    let holes = HoleObservableBasis::new(tau.d())?;
    let values = holes
        .sector_matrices(tau.basis())?
        .iter()
        .map(|s| linalg::trace_product(s, tau.matrix()).re)
        .collect();
    ExpectationVector::new(tau.d(), tau.n(), values)
}

/// `x -> matrix x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    pub matrix: DMatrix<f64>,
    pub offset: Vec<f64>,
}

impl CoordinateMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.matrix * nalgebra::DVector::from_column_slice(x);
        v.iter().zip(&self.offset).map(|(a, b)| a + b).collect()
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// `(smallest, largest)` singular value of the linear part.
    pub fn singular_range(&self) -> (f64, f64) {
        let sv = self.matrix.clone().singular_values();
        let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sv.iter().copied().fold(0.0, f64::max);
        (lo, hi)
    }

    /// `tr(M^T M)` of the linear part.
    pub fn frobenius_squared(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum()
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &CoordinateMap) -> CoordinateMap {
        let matrix = &self.matrix * &inner.matrix;
        let offset = self.apply(&inner.offset);
        CoordinateMap { matrix, offset }
    }

    /// Plain text: a `rows cols` header, the matrix rows, then the offset.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.matrix.nrows(), self.matrix.ncols());
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> =
                self.matrix.row(r).iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let off: Vec<String> = self.offset.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&off.join(" "));
        out.push('\n');
        out
    }
}

/// Particle and hole coordinates of every element of a Hermitian basis of
/// the `(d-2)` sector, plus its trace.
struct DualitySystem {
    particle: Vec<Vec<f64>>,
    hole: Vec<Vec<f64>>,
    trace: Vec<f64>,
}

fn hermitian_basis(dim: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(dim * dim);
    for p in 0..dim {
        let mut e = CMatrix::zeros(dim, dim);
        e[(p, p)] = ONE;
        out.push(e);
        for q in p + 1..dim {
            let mut x = CMatrix::zeros(dim, dim);
            x[(p, q)] = ONE;
            x[(q, p)] = ONE;
            out.push(x);
            let mut y = CMatrix::zeros(dim, dim);
            y[(p, q)] = -I;
            y[(q, p)] = I;
            out.push(y);
        }
    }
    out
}

fn duality_system(d: usize) -> Result<DualitySystem> {
    if d < 5 {
        return Err(Error::InvalidArguments(format!("duality maps need d >= 5, got d={d}")));
    }
    let n = d - 2;
    let sector = Arc::new(SlaterBasis::new(d, n)?);
    let lift = PairLift::new(Arc::clone(&sector))?;
    let particles = ObservableBasis::new(d)?;
    let holes = HoleObservableBasis::new(d)?.sector_matrices(&sector)?;
    let mut sys = DualitySystem {
        particle: Vec::new(),
        hole: Vec::new(),
        trace: Vec::new(),
    };
    for h in hermitian_basis(sector.len()) {
        sys.particle.push(particles.coordinates(&lift.reduce(&h)));
        sys.hole.push(holes.iter().map(|s| linalg::trace_product(s, &h).re).collect());
        sys.trace.push(linalg::trace(&h).re);
    }
    Ok(sys)
}

/// Least-squares fit of `to = M from + offset * tr` over the basis rows.
fn fit(from: &[Vec<f64>], to: &[Vec<f64>], trace: &[f64]) -> Result<CoordinateMap> {
    let rows = from.len();
    let ell = from[0].len();
    let design = DMatrix::from_fn(rows, ell + 1, |r, c| if c < ell { from[r][c] } else { trace[r] });
    let rhs = DMatrix::from_fn(rows, ell, |r, c| to[r][c]);
    let svd = design.clone().svd(true, true);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smin <= 1e-10 * smax {
        return Err(Error::RankDeficient(smin));
    }
    let w = svd.solve(&rhs, 0.0).map_err(|e| Error::InvalidArguments(e.to_string()))?;
    let residual = (&design * &w - &rhs).amax();
    if residual > 1e-8 {
        return Err(Error::OutsideSpan(residual));
    }
    let matrix = w.rows(0, ell).transpose();
    let offset = w.row(ell).iter().copied().collect();
    Ok(CoordinateMap { matrix, offset })
}

/// `alpha(tau) = A alpha'(tau) + offset` on the `(d-2)`-particle sector.
pub fn build_map_a(d: usize) -> Result<CoordinateMap> {
    let sys = duality_system(d)?;
    fit(&sys.hole, &sys.particle, &sys.trace)
}

/// `alpha'(tau) = B alpha(tau) + offset`, the inverse of [`build_map_a`].
pub fn build_map_b(d: usize) -> Result<CoordinateMap> {
    let sys = duality_system(d)?;
    fit(&sys.particle, &sys.hole, &sys.trace)
}

/// Both maps from one system build.
pub fn build_maps(d: usize) -> Result<(CoordinateMap, CoordinateMap)> {
    let sys = duality_system(d)?;
    Ok((
        fit(&sys.hole, &sys.particle, &sys.trace)?,
        fit(&sys.particle, &sys.hole, &sys.trace)?,
    ))
}

/// Radius of a ball around the maximally mixed point, in observable
/// coordinates, inside the set of pair densities. A coordinate move `v`
/// moves the matrix by at most `s v` in Frobenius norm, where `s` is the
/// largest singular value of the coordinate-to-matrix map, and the mixed
/// state tolerates any Hermitian move of operator norm `1/m`.
pub fn pair_inner_radius(d: usize) -> Result<f64> {
    let basis = ObservableBasis::new(d)?;
    let m = basis.pair_dim();
    let origin = basis.matrix_from_coordinates(&vec![0.0; basis.len()]);
    let cols: Vec<CMatrix> = (0..basis.len())
        .map(|k| {
            let mut e = vec![0.0; basis.len()];
            e[k] = 1.0;
            basis.matrix_from_coordinates(&e) - &origin
        })
        .collect();
    let map = DMatrix::<f64>::from_fn(2 * m * m, cols.len(), |r, c| {
        let z = cols[c][(r / 2 / m, r / 2 % m)];
        if r % 2 == 0 { z.re } else { z.im }
    });
    let s = map.singular_values().iter().copied().fold(0.0, f64::max);
    Ok(1.0 / (m as f64 * s))
}

/// Certified inner radius of `K_{d-2}` around its maximally mixed point:
/// the pair-density inner radius times `sigma_min(A)`.
pub fn inner_ball_certificate(d: usize) -> Result<f64> {
    let a = build_map_a(d)?;
    let (smin, _) = a.singular_range();
    Ok(pair_inner_radius(d)? * smin)
}

/// Polynomial bound on `tr(B^T B)`: every entry of `B` is at most
/// `1 / c_N = C(N, 2)` in magnitude with `N = d - 2`, so the trace is at most
/// `ell^2 C(N, 2)^2`.
pub fn hole_map_bound(d: usize) -> f64 {
    let ell = crate::rdm::observable_count(d) as f64;
    ell * ell / pair_normalization(d - 2).powi(2)
}

/// Maximum deviation between rows of `A` and the closed-form rows obtained
/// from the operator identities, per case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolicCheck {
    /// `I = J`: `a_I^dag a_I = sum_{L disjoint from I} a_L a_L^dag`.
    pub equal: f64,
    /// `I, J` disjoint: `a_I^dag a_J = a_J a_I^dag`.
    pub disjoint: f64,
    /// `I = {c, i}`, `J = {c, j}`: `a_I^dag a_J` is a signed sum of
    /// `a_L a_K^dag` over `K = {i, k}`, `L = {j, k}`.
    pub overlapping: f64,
}

impl SymbolicCheck {
    pub fn max(&self) -> f64 {
        self.equal.max(self.disjoint).max(self.overlapping)
    }
}

/// Closed-form row of `A` (with offset) for each particle observable.
pub fn symbolic_rows(d: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let basis = ObservableBasis::new(d)?;
    let pb = basis.pair_basis();
    let m = pb.len();
    let ell = basis.len();
    let c = pair_normalization(d - 2);
    let h = m * (m - 1) / 2;
    let off_index = |p: usize, q: usize| -> usize {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        // position of (p, q) in the lexicographic list of index pairs
        p * (2 * m - p - 1) / 2 + (q - p - 1)
    };
    let occ = |k: usize| pb.occupation(k);
    let index_of_occupation = |o: Occupation| {
        pb.index_of(o.trailing_zeros() as usize, 63 - o.leading_zeros() as usize)
            .expect("two modes")
    };
    let pair_ladders = |k: usize, dagger: bool| {
        let (a, b) = pb.pair(k);
        if dagger {
            [Ladder::create(a), Ladder::create(b)]
        } else {
            [Ladder::annihilate(b), Ladder::annihilate(a)]
        }
    };
    // matrix element <out| product |in> on a basis state with holes `holes_in`
    let element = |product: &[Ladder], holes_in: Occupation| -> Option<(f64, Occupation)> {
        let full: Occupation = (1u64 << d) - 1;
        apply_ladders(product, full & !holes_in).map(|(s, o)| (s, full & !o))
    };
    let mut rows = Vec::with_capacity(ell);
    for k in 0..ell {
        let (kind, p, q) = basis.label(k);
        let mut row = vec![0.0; ell];
        let mut offset = 0.0;
        if kind == ObservableKind::Z {
            for l in (0..m).filter(|&l| occ(l) & occ(p) == 0) {
                if l == m - 1 {
                    // Z'_last = 1 - sum of the others on the two-hole sector
                    offset += c;
                    for r in row.iter_mut().skip(2 * h) {
                        *r -= c;
                    }
                } else {
                    row[2 * h + l] += c;
                }
            }
            rows.push((row, offset));
            continue;
        }
        let (oi, oj) = (occ(p), occ(q));
        // a_P^dag a_Q = sum_t eps_t a_{L_t} a_{K_t}^dag
        let mut terms: Vec<(f64, usize, usize)> = Vec::new();
        if oi & oj == 0 {
            terms.push((1.0, q, p));
        } else {
            let shared = oi & oj;
            for kmode in (0..d).filter(|&t| (oi | oj) >> t & 1 == 0) {
                let kk = index_of_occupation((oi & !shared) | 1 << kmode);
                let ll = index_of_occupation((oj & !shared) | 1 << kmode);
                let holes_in = occ(kk);
                let mut product = Vec::new();
                product.extend(pair_ladders(p, true));
                product.extend(pair_ladders(q, false));
                let (s1, out1) = element(&product, holes_in).expect("allowed transition");
                let mut hole = Vec::new();
                hole.extend(pair_ladders(ll, false));
                hole.extend(pair_ladders(kk, true));
                let (s2, out2) = element(&hole, holes_in).expect("allowed transition");
                debug_assert_eq!(out1, out2);
                terms.push((s1 * s2, ll, kk));
            }
        }
        for (eps, l, kk) in terms {
            // a_L a_K^dag + h.c. = X'_{LK}; -i a_L a_K^dag + h.c. = Y'_{LK}
            let idx = off_index(l, kk);
            match kind {
                ObservableKind::X => row[idx] += c * eps,
                _ => row[h + idx] += c * eps * if l < kk { 1.0 } else { -1.0 },
            }
        }
        rows.push((row, offset));
    }
    Ok(rows)
}

/// Compares `A` against [`symbolic_rows`], case by case.
pub fn symbolic_check(d: usize, a: &CoordinateMap) -> Result<SymbolicCheck> {
    let basis = ObservableBasis::new(d)?;
    let pb = basis.pair_basis();
    let rows = symbolic_rows(d)?;
    let mut out = SymbolicCheck {
        equal: 0.0,
        disjoint: 0.0,
        overlapping: 0.0,
    };
    for (k, (row, offset)) in rows.iter().enumerate() {
        let dev = row
            .iter()
            .enumerate()
            .map(|(c, x)| (a.matrix[(k, c)] - x).abs())
            .fold((a.offset[k] - offset).abs(), f64::max);
        let (kind, p, q) = basis.label(k);
        let slot = if kind == ObservableKind::Z {
            &mut out.equal
        } else if pb.occupation(p) & pb.occupation(q) == 0 {
            &mut out.disjoint
        } else {
            &mut out.overlapping
        };
        *slot = slot.max(dev);
    }
    Ok(out)
}

/// `a_j a_i^dag = sum_{k != i, j} a_k a_j a_i^dag a_k^dag` on the
/// `(d-2)` sector; returns the largest matrix deviation over `i != j`.
pub fn hole_hopping_identity(d: usize) -> Result<f64> {
    if d < 5 {
        return Err(Error::InvalidArguments(format!("identity needs d >= 5, got d={d}")));
    }
    let sector = SlaterBasis::new(d, d - 2)?;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (0..d).filter(|&j| j != i) {
            let lhs = FermionOperator::from_product(
                d,
                ONE,
                &[Ladder::annihilate(j), Ladder::create(i)],
            )?;
            let mut rhs = FermionOperator::zero(d);
            for k in (0..d).filter(|&k| k != i && k != j) {
                rhs = &rhs
                    + &FermionOperator::from_product(
                        d,
                        ONE,
                        &[
                            Ladder::annihilate(k),
                            Ladder::annihilate(j),
                            Ladder::create(i),
                            Ladder::create(k),
                        ],
                    )?;
            }
            let diff = operator_matrix(&(&lhs - &rhs), &sector, &sector)?;
            worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}

/// `sum_L a_L^dag a_L` on the `N` sector, which is `C(N, 2)` times the
/// identity; returns the constant read off the matrix.
pub fn pair_number_constant(d: usize, n: usize) -> Result<f64> {
    let basis = ObservableBasis::new(d)?;
    let pb = basis.pair_basis();
    let sector = SlaterBasis::new(d, n)?;
    let mut total = FermionOperator::zero(d);
    for l in 0..pb.len() {
        let (a, b) = pb.pair(l);
        total = &total
            + &FermionOperator::from_product(
                d,
                ONE,
                &[
                    Ladder::create(a),
                    Ladder::create(b),
                    Ladder::annihilate(b),
                    Ladder::annihilate(a),
                ],
            )?;
    }
    let m = operator_matrix(&total, &sector, &sector)?;
    let value = m[(0, 0)].re;
    let diff = &m - CMatrix::identity(m.nrows(), m.ncols()) * linalg::re(value);
    let dev = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::InvalidArguments(format!(
            "pair number is not constant on the sector (deviation {dev:e})"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::oracle::contraction_expectations;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complement_examples() {
        let pairs = Arc::new(build_basis(4, 2).unwrap());
        let sigma = NSectorDensity::from_state(
            &crate::fock::NSectorState::slater(Arc::clone(&pairs), 0b0011).unwrap(),
        );
        let tau = slater_complement(&sigma).unwrap();
        let k = tau.basis().index_of(0b1100).unwrap();
        assert!((tau.matrix()[(k, k)].re - 1.0).abs() < 1e-15);

        let mixed = NSectorDensity::maximally_mixed(Arc::clone(&pairs));
        let tau = slater_complement(&mixed).unwrap();
        let dim = tau.basis().len() as f64;
        let expect = CMatrix::identity(6, 6) / linalg::re(dim);
        assert!((tau.matrix() - expect).iter().all(|z| z.norm() < 1e-15));

        let three = Arc::new(build_basis(4, 3).unwrap());
        assert!(slater_complement(&NSectorDensity::maximally_mixed(three)).is_err());
    }

    #[test]
    fn hole_expectation_examples() {
        let sector = Arc::new(build_basis(4, 2).unwrap());
        let holes = HoleObservableBasis::new(4).unwrap();
        let z12 = holes.len() - 5;
        assert_eq!(holes.name(z12), "Z'[12]");
        let slater = |occ| {
            NSectorDensity::from_state(
                &crate::fock::NSectorState::slater(Arc::clone(&sector), occ).unwrap(),
            )
        };
        let a = hole_expectation_vector(&slater(0b1100)).unwrap();
        assert!((a.values()[z12] - 1.0).abs() < 1e-15);
        let b = hole_expectation_vector(&slater(0b0011)).unwrap();
        assert!(b.values()[z12].abs() < 1e-15);
    }

    #[test]
    fn particle_and_hole_expectations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs = Arc::new(build_basis(5, 2).unwrap());
        for _ in 0..10 {
            let sigma = NSectorDensity::random(Arc::clone(&pairs), 4, &mut rng);
            let alpha = contraction_expectations(&sigma).unwrap();
            let holes = hole_expectation_vector(&slater_complement(&sigma).unwrap()).unwrap();
            for (x, y) in alpha.values().iter().zip(holes.values()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn maps_are_mutually_inverse_at_d5() {
        let (a, b) = build_maps(5).unwrap();
        let id = b.compose(&a);
        let ell = a.dim();
        assert!((id.matrix - DMatrix::<f64>::identity(ell, ell)).amax() < 1e-8);
        assert!(id.offset.iter().all(|x| x.abs() < 1e-8));
        let entry = 1.0 / pair_normalization(3);
        assert!(b.matrix.iter().all(|x| x.abs() <= entry + 1e-9));
        assert!(b.frobenius_squared() <= hole_map_bound(5));
        let check = symbolic_check(5, &a).unwrap();
        assert!(check.max() < 1e-10, "{check:?}");
    }

    #[test]
    fn map_reproduces_particle_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = build_map_a(5).unwrap();
        let sector = Arc::new(build_basis(5, 3).unwrap());
        for _ in 0..10 {
            let tau = NSectorDensity::random(Arc::clone(&sector), 3, &mut rng);
            let alpha = contraction_expectations(&tau).unwrap();
            let holes = hole_expectation_vector(&tau).unwrap();
            let mapped = a.apply(holes.values());
            for (x, y) in alpha.values().iter().zip(&mapped) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identities_and_constants() {
        assert!(hole_hopping_identity(5).unwrap() < 1e-14);
        for n in 2..=5 {
            let expect = (n * (n - 1) / 2) as f64;
            assert!((pair_number_constant(5, n).unwrap() - expect).abs() < 1e-12);
        }
        assert!(build_map_a(4).is_err());
    }

    #[test]
    fn pair_radius_closed_form() {
        for d in [4, 5] {
            let m = (d * (d - 1) / 2) as f64;
            let r = pair_inner_radius(d).unwrap();
            assert!((r - 1.0 / (m * m.sqrt())).abs() < 1e-12);
        }
    }
}
