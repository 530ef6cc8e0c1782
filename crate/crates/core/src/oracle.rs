//! Membership and projection oracle for the set `K` of `N`-representable
//! 2-RDMs.
//!
//! Distances are Frobenius (Hilbert-Schmidt) distances between trace-one
//! pair matrices. The projection runs conditional gradient over sector
//! densities `sigma`, minimizing `f(sigma) = ||R(sigma) - rho_t||_F^2`, where
//! `R` is the 2-RDM map. Every iterate also yields a certified lower bound on
//! the distance, from the duality gap and from the support function
//! `h_K(G) = c_N lambda_max(lift(G))`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{NSectorDensity, SlaterBasis, DEFAULT_SECTOR_CAP};
use crate::linalg::{self, CMatrix};
use crate::rdm::{
    contracted_one_rdm, coleman_check, pair_normalization, ExpectationVector, ObservableBasis,
    PairLift, TwoRDM,
};

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// Projected-gradient steps between certificate evaluations.
const CERTIFY_EVERY: usize = 4;

/// Stopping rules for [`Projector::frank_wolfe`].
#[derive(Clone, Debug)]
pub struct ProjectionOptions {
    /// Stop once `distance - lower_bound <= tol` or the gap is at most `tol^2`.
    pub tol: f64,
    pub max_iter: usize,
    /// Stop as soon as the distance upper bound falls to this value.
    pub stop_below: Option<f64>,
    /// Stop as soon as the certified lower bound reaches this value.
    pub stop_above: Option<f64>,
    /// Record the running minimum gap every `log_stride` iterations.
    pub log_stride: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            stop_below: None,
            stop_above: None,
            log_stride: 1,
        }
    }
}

impl ProjectionOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionResult {
    /// Sector density whose 2-RDM is the returned nearest point.
    pub witness: NSectorDensity,
    /// `R(witness)`, a point of `K`.
    pub nearest_rdm: CMatrix,
    pub nearest: ExpectationVector,
    /// `||R(witness) - rho_t||_F`, an upper bound on the true distance.
    pub distance: f64,
    /// Certified lower bound on the true distance.
    pub lower_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    /// `false` when the iteration budget ran out first.
    pub converged: bool,
    /// `(iteration, running minimum gap)`.
    pub gap_log: Vec<(usize, f64)>,
}

/// Oracle bound to one `(d, N)` sector. Construction precomputes the pair
/// lift; projections may then run concurrently.
#[derive(Clone, Debug)]
pub struct Projector {
    lift: PairLift,
    observables: ObservableBasis,
    /// Lipschitz constant of the gradient of `f`.
    lipschitz: f64,
}

impl Projector {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_cap(d, n, DEFAULT_SECTOR_CAP)
    }

    pub fn with_cap(d: usize, n: usize, cap: usize) -> Result<Self> {
        if n < 2 || n > d {
            return Err(Error::InvalidArguments(format!(
                "oracle needs 2 <= N <= d, got d={d} N={n}"
            )));
        }
        let basis = Arc::new(SlaterBasis::with_cap(d, n, cap)?);
        let lift = PairLift::new(basis)?;
        let lipschitz = 2.0 * reduce_norm_squared(&lift) * 1.05;
        Ok(Self {
            lift,
            observables: ObservableBasis::new(d)?,
            lipschitz,
        })
    }

    pub fn d(&self) -> usize {
        self.observables.d()
    }

    pub fn n(&self) -> usize {
        self.lift.n()
    }

    pub fn basis(&self) -> &Arc<SlaterBasis> {
        self.lift.basis()
    }

    pub fn observables(&self) -> &ObservableBasis {
        &self.observables
    }

    pub fn pair_lift(&self) -> &PairLift {
        &self.lift
    }

    /// `max_{rho in K} tr(G rho)` and a sector vector attaining it.
    pub fn support(&self, g: &CMatrix) -> (f64, linalg::CVector) {
        let (lambda, v) = linalg::lowest_eigenpair(&-self.lift.lift(g));
        (-lambda * pair_normalization(self.n()), v)
    }

    /// 2-RDM of a sector density given as a raw matrix.
    pub fn reduce(&self, sigma: &CMatrix) -> CMatrix {
        linalg::hermitian_part(&self.lift.reduce(sigma))
    }

    fn result(
        &self,
        sigma: CMatrix,
        p: CMatrix,
        target: &CMatrix,
        lower: f64,
        gap: f64,
        iterations: usize,
        converged: bool,
        gap_log: Vec<(usize, f64)>,
    ) -> ProjectionResult {
        let distance = linalg::frobenius(&(&p - target));
        let nearest = ExpectationVector::new(self.d(), self.n(), self.observables.coordinates(&p))
            .expect("length matches the basis");
        ProjectionResult {
            witness: NSectorDensity::from_trusted(Arc::clone(self.basis()), sigma),
            nearest_rdm: p,
            nearest,
            distance,
            lower_bound: lower.min(distance),
            gap,
            iterations,
            converged,
            gap_log,
        }
    }

    /// Projection of a Hermitian trace-one pair matrix onto `K`. At `N = 2`
    /// `K` is the full density set and the projection is computed in closed
    /// form; otherwise this is [`Projector::projected_gradient`].
    pub fn project(
        &self,
        target: &CMatrix,
        opts: &ProjectionOptions,
        warm: Option<&CMatrix>,
    ) -> Result<ProjectionResult> {
        self.check_target(target)?;
        if self.n() == 2 {
            let p = linalg::nearest_density(target);
            return Ok(self.result(p.clone(), p, target, 0.0, 0.0, 0, true, Vec::new())
                .with_exact_lower_bound());
        }
        self.projected_gradient(target, opts, warm)
    }

    fn check_target(&self, target: &CMatrix) -> Result<()> {
        let m = self.observables.pair_dim();
        if target.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "{:?} target for a pair basis of size {m}",
                target.shape()
            )));
        }
        let dev = linalg::hermiticity_deviation(target);
        if dev > 1e-10 {
            return Err(Error::NonHermitian(dev));
        }
        Ok(())
    }

    /// Duality gap and distance lower bound at the iterate with 2-RDM `p`.
    /// Also returns the minimizing vertex of the linearized objective.
    fn certify(&self, p: &CMatrix, target: &CMatrix) -> Certificate {
        let c_n = pair_normalization(self.n());
        let r = p - target;
        let f = linalg::frobenius(&r).powi(2);
        let dist = f.sqrt();
        let (lambda, v) = linalg::lowest_eigenpair(&self.lift.lift(&r));
        let gap = (2.0 * (linalg::trace_product(&r, p).re - c_n * lambda)).max(0.0);
        let mut lower = (f - gap).max(0.0).sqrt();
        if dist > 0.0 {
            // tr(G rho_t) - h_K(G) for G = rho_t - p
            let margin = c_n * lambda - linalg::trace_product(&r, target).re;
            lower = lower.max(margin / dist);
        }
        Certificate {
            r,
            dist,
            gap,
            lower,
            vertex: v,
        }
    }

    fn should_stop(opts: &ProjectionOptions, dist: f64, lower: f64, gap: f64) -> bool {
        gap <= opts.tol * opts.tol
            || dist - lower <= opts.tol
            || opts.stop_below.is_some_and(|t| dist <= t)
            || opts.stop_above.is_some_and(|t| lower >= t)
    }

    fn start(&self, warm: Option<&CMatrix>) -> Result<CMatrix> {
        let dim = self.basis().len();
        match warm {
            Some(w) if w.shape() == (dim, dim) => Ok(w.clone()),
            Some(_) => Err(Error::DimensionMismatch("warm start has the wrong dimension".into())),
            None => Ok(CMatrix::identity(dim, dim) / linalg::re(dim as f64)),
        }
    }

    /// Accelerated projected gradient on sector densities with adaptive
    /// restart. Each step projects onto the density set by eigenvalue
    /// clipping; the stopping test uses the same certificates as
    /// [`Projector::frank_wolfe`].
    pub fn projected_gradient(
        &self,
        target: &CMatrix,
        opts: &ProjectionOptions,
        warm: Option<&CMatrix>,
    ) -> Result<ProjectionResult> {
        self.check_target(target)?;
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArguments("projection tolerance must be positive".into()));
        }
        let target = linalg::hermitian_part(target);
        let c_n = pair_normalization(self.n());
        let step = 1.0 / self.lipschitz;
        let mut sigma = self.start(warm)?;
        let mut p = self.reduce(&sigma);
        let mut prev = sigma.clone();
        let mut momentum = 1.0f64;
        let mut lower = 0.0f64;
        let mut best_gap = f64::INFINITY;
        let mut gap_log = Vec::new();
        let stride = opts.log_stride.max(1);
        let mut f_prev = f64::INFINITY;
        for iter in 0..opts.max_iter {
            let f = linalg::frobenius(&(&p - &target)).powi(2);
            if iter % CERTIFY_EVERY == 0 {
                let cert = self.certify(&p, &target);
                let gap = cert.gap;
                lower = lower.max(cert.lower);
                best_gap = best_gap.min(gap);
                if Self::should_stop(opts, cert.dist, lower, gap) {
                    return Ok(self.result(sigma, p, &target, lower, gap, iter, true, gap_log));
                }
            }
            if iter % stride == 0 {
                gap_log.push((iter, best_gap));
            }
            if f > f_prev {
                momentum = 1.0;
            }
            f_prev = f;
            let next_momentum = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
            let beta = (momentum - 1.0) / next_momentum;
            momentum = next_momentum;
            let y = &sigma + (&sigma - &prev).scale(beta);
            let ry = self.reduce(&y) - &target;
            let grad = self.lift.lift(&ry).scale(2.0 * c_n);
            let next = linalg::nearest_density(&(y - grad.scale(step)));
            prev = std::mem::replace(&mut sigma, next);
            p = self.reduce(&sigma);
        }
        let cert = self.certify(&p, &target);
        lower = lower.max(cert.lower);
        Ok(self.result(sigma, p, &target, lower, cert.gap, opts.max_iter, false, gap_log))
    }

    /// Conditional-gradient projection, optionally warm-started from a sector
    /// density.
    pub fn frank_wolfe(
        &self,
        target: &CMatrix,
        opts: &ProjectionOptions,
        warm: Option<&CMatrix>,
    ) -> Result<ProjectionResult> {
        self.check_target(target)?;
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArguments("projection tolerance must be positive".into()));
        }
        let target = linalg::hermitian_part(target);
        let mut sigma = self.start(warm)?;
        let mut p = self.reduce(&sigma);
        let mut lower = 0.0f64;
        let mut best_gap = f64::INFINITY;
        let mut gap_log = Vec::new();
        let stride = opts.log_stride.max(1);
        for iter in 0..opts.max_iter {
            let cert = self.certify(&p, &target);
            let gap = cert.gap;
            lower = lower.max(cert.lower);
            best_gap = best_gap.min(gap);
            if iter % stride == 0 {
                gap_log.push((iter, best_gap));
            }
            if Self::should_stop(opts, cert.dist, lower, gap) {
                return Ok(self.result(sigma, p, &target, lower, gap, iter, true, gap_log));
            }
            let v = cert.vertex;
            let vv = &v * v.adjoint();
            let q = self.reduce(&vv);
            let dq = &q - &p;
            let denom = linalg::frobenius(&dq).powi(2);
            if denom <= f64::EPSILON * f64::EPSILON {
                return Ok(self.result(sigma, p, &target, lower, gap, iter, true, gap_log));
            }
            let step = (-linalg::trace_product(&cert.r, &dq).re / denom).clamp(0.0, 1.0);
            if step == 0.0 {
                return Ok(self.result(sigma, p, &target, lower, gap, iter, true, gap_log));
            }
            sigma = sigma.scale(1.0 - step) + vv.scale(step);
            p = p.scale(1.0 - step) + q.scale(step);
        }
        Ok(self.result(sigma, p, &target, lower, best_gap, opts.max_iter, false, gap_log))
    }
}

struct Certificate {
    r: CMatrix,
    dist: f64,
    gap: f64,
    lower: f64,
    vertex: linalg::CVector,
}

/// Squared operator norm of the 2-RDM map (Frobenius to Frobenius), by power
/// iteration on its normal operator.
fn reduce_norm_squared(lift: &PairLift) -> f64 {
    let dim = lift.basis().len();
    let c_n = pair_normalization(lift.n());
    let mut x = CMatrix::from_fn(dim, dim, |i, j| linalg::re(1.0 + ((i * 7 + j * 13) % 5) as f64));
    x = linalg::hermitian_part(&x);
    let mut est = 0.0;
    for _ in 0..200 {
        let y = lift.lift(&lift.reduce(&x)).scale(c_n);
        let norm = linalg::frobenius(&y);
        if norm == 0.0 {
            return 1.0;
        }
        est = norm / linalg::frobenius(&x);
        x = y / linalg::re(norm);
    }
    est
}

impl ProjectionResult {
    fn with_exact_lower_bound(mut self) -> Self {
        self.lower_bound = self.distance;
        self
    }
}

/// `alpha_S = c_N tr(sigma S)` for every observable, i.e. the coordinates of
/// the 2-RDM of `sigma`.
pub fn contraction_expectations(sigma: &NSectorDensity) -> Result<ExpectationVector> {
    let lift = PairLift::new(Arc::clone(sigma.basis()))?;
    let basis = ObservableBasis::new(sigma.d())?;
    let p = linalg::hermitian_part(&lift.reduce(sigma.matrix()));
    ExpectationVector::new(sigma.d(), sigma.n(), basis.coordinates(&p))
}

/// Projection of a coordinate vector onto `K`.
pub fn project_onto_k(
    alpha: &ExpectationVector,
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult> {
    let projector = Projector::new(alpha.d(), alpha.n())?;
    let target = projector.observables().matrix_from_coordinates(alpha.values());
    let opts = ProjectionOptions {
        tol,
        max_iter,
        ..ProjectionOptions::default()
    };
    projector.project(&target, &opts, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColemanVerdict {
    Pass,
    Fail,
}

/// Coleman's criterion on the 1-RDM contracted from `rho`. `Fail` certifies
/// that `rho` is not `N`-representable; `Pass` is inconclusive.
pub fn coleman_precheck(rho: &TwoRDM) -> ColemanVerdict {
    if coleman_check(&contracted_one_rdm(rho)) {
        ColemanVerdict::Pass
    } else {
        ColemanVerdict::Fail
    }
}

#[derive(Clone, Debug)]
pub struct RepresentabilityInstance {
    pub rho: TwoRDM,
    pub beta: f64,
}

impl RepresentabilityInstance {
    pub fn new(rho: TwoRDM, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArguments(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        Ok(Self { rho, beta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Yes,
    No,
    Borderline,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Yes => "YES",
            VerdictKind::No => "NO",
            VerdictKind::Borderline => "BORDERLINE",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Frobenius distance upper bound.
    pub distance: f64,
    pub lower_bound: f64,
    pub beta: f64,
    pub iterations: usize,
    pub coleman: ColemanVerdict,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "verdict={} distance={:.16e} beta={:.16e} iters={}",
            self.kind, self.distance, self.beta, self.iterations
        )
    }
}

/// Trace-norm thresholds `(yes, no)` expressed as Frobenius distances for a
/// pair space of dimension `m`. Uses `||X||_F <= ||X||_1 <= sqrt(m) ||X||_F`,
/// each in the conservative direction.
pub fn frobenius_thresholds(beta: f64, m: usize) -> (f64, f64) {
    (beta / (4.0 * (m as f64).sqrt()), beta / 2.0)
}

/// Decides the promise problem: `YES` when the trace distance to `K` is at
/// most `beta / 4`, `NO` when it is certainly at least `beta / 2` (or when
/// Coleman's criterion fails), `BORDERLINE` otherwise.
pub fn is_representable(instance: &RepresentabilityInstance) -> Result<Verdict> {
    is_representable_with(instance, &ProjectionOptions::default())
}

pub fn is_representable_with(
    instance: &RepresentabilityInstance,
    opts: &ProjectionOptions,
) -> Result<Verdict> {
    let rho = &instance.rho;
    let projector = Projector::new(rho.d(), rho.n())?;
    decide(&projector, instance, opts)
}

/// [`is_representable_with`] on a prebuilt projector.
pub fn decide(
    projector: &Projector,
    instance: &RepresentabilityInstance,
    opts: &ProjectionOptions,
) -> Result<Verdict> {
    let rho = &instance.rho;
    if projector.d() != rho.d() || projector.n() != rho.n() {
        return Err(Error::DimensionMismatch("projector built for another sector".into()));
    }
    let coleman = coleman_precheck(rho);
    let (yes_at, no_at) = frobenius_thresholds(instance.beta, projector.observables().pair_dim());
    let opts = ProjectionOptions {
        stop_below: Some(yes_at),
        stop_above: Some(no_at + opts.tol),
        ..opts.clone()
    };
    let res = projector.project(rho.matrix(), &opts, None)?;
    let kind = if coleman == ColemanVerdict::Fail || res.lower_bound >= no_at {
        VerdictKind::No
    } else if res.distance <= yes_at {
        VerdictKind::Yes
    } else {
        VerdictKind::Borderline
    };
    Ok(Verdict {
        kind,
        distance: res.distance,
        lower_bound: res.lower_bound,
        beta: instance.beta,
        iterations: res.iterations,
        coleman,
    })
}

/// `<normal, alpha> <= offset` for every `alpha` in `K`, with `normal` a unit
/// vector in observable coordinates.
#[derive(Clone, Debug)]
pub struct SeparatingHyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// `<normal, alpha_target> - offset`, in coordinate units.
    pub margin: f64,
    /// The same cut measured in Frobenius units; approximates the distance.
    pub rdm_margin: f64,
}

impl SeparatingHyperplane {
    pub fn evaluate(&self, alpha: &[f64]) -> f64 {
        self.normal.iter().zip(alpha).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

/// Hyperplane cutting `target` off `K`, built from its projection. The
/// offset is the exact support value, so the cut is valid for all of `K`.
pub fn separating_hyperplane(
    projector: &Projector,
    target: &ExpectationVector,
    opts: &ProjectionOptions,
) -> Result<SeparatingHyperplane> {
    let basis = projector.observables();
    let t = basis.matrix_from_coordinates(target.values());
    let res = projector.project(&t, opts, None)?;
    if res.distance <= 2.0 * opts.tol {
        return Err(Error::PointInside {
            distance: res.distance,
            tol: opts.tol,
        });
    }
    let g = &t - &res.nearest_rdm;
    hyperplane_from_direction(projector, &g, target.values())
        .ok_or(Error::PointInside {
            distance: res.distance,
            tol: opts.tol,
        })
}

/// Cut with normal direction `g` (a Hermitian pair matrix). `None` if `g`
/// has no component along the observables.
pub fn hyperplane_from_direction(
    projector: &Projector,
    g: &CMatrix,
    target: &[f64],
) -> Option<SeparatingHyperplane> {
    let basis = projector.observables();
    let (gamma, g0) = basis.expand(g);
    let norm = gamma.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let (h, _) = projector.support(g);
    let normal: Vec<f64> = gamma.iter().map(|x| x / norm).collect();
    let offset = (h - g0) / norm;
    let value: f64 = normal.iter().zip(target).map(|(a, b)| a * b).sum();
    let margin = value - offset;
    let rdm_margin = margin * norm / linalg::frobenius(g);
    Some(SeparatingHyperplane {
        normal,
        offset,
        margin,
        rdm_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::rdm::{expectation_vector, two_rdm};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn contraction_matches_operator_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = Arc::new(build_basis(5, 3).unwrap());
        let sigma = NSectorDensity::random(Arc::clone(&b), 2, &mut rng);
        let fast = contraction_expectations(&sigma).unwrap();
        let obs = ObservableBasis::new(5).unwrap();
        let c = pair_normalization(3);
        for k in (0..obs.len()).step_by(3) {
            let slow = sigma.expectation(&obs.operator(k)).unwrap().re * c;
            assert_abs_diff_eq!(fast.values()[k], slow, epsilon = 1e-12);
        }
        let via_rdm = expectation_vector(&two_rdm(&sigma).unwrap()).unwrap();
        for (a, b) in fast.values().iter().zip(via_rdm.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_has_no_off_diagonal_coordinates() {
        let b = Arc::new(build_basis(5, 3).unwrap());
        let a = contraction_expectations(&NSectorDensity::maximally_mixed(b)).unwrap();
        let h = 45;
        assert!(a.values()[..2 * h].iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn projection_of_a_member_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let proj = Projector::new(6, 3).unwrap();
        let sigma = NSectorDensity::random(Arc::clone(proj.basis()), 4, &mut rng);
        let target = two_rdm(&sigma).unwrap();
        let res = proj
            .project(target.matrix(), &ProjectionOptions::default(), None)
            .unwrap();
        assert!(res.converged);
        assert!(res.distance <= 1e-4, "distance {}", res.distance);
    }

    #[test]
    fn both_solvers_bracket_the_same_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let proj = Projector::new(5, 3).unwrap();
        let sigma = NSectorDensity::random(Arc::clone(proj.basis()), 2, &mut rng);
        let mut t = two_rdm(&sigma).unwrap().matrix().clone();
        t[(0, 0)] += linalg::re(0.4);
        t[(9, 9)] -= linalg::re(0.4);
        let opts = ProjectionOptions::default();
        let pg = proj.projected_gradient(&t, &opts, None).unwrap();
        let fw = proj.frank_wolfe(&t, &opts, None).unwrap();
        assert!(pg.converged && fw.converged);
        assert!(pg.lower_bound <= fw.distance + 1e-12);
        assert!(fw.lower_bound <= pg.distance + 1e-12);
        assert!((pg.distance - fw.distance).abs() <= 2e-4);
    }

    #[test]
    fn frank_wolfe_matches_closed_form_at_two_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let proj = Projector::new(4, 2).unwrap();
        for _ in 0..5 {
            let h = linalg::random_hermitian(6, 0.3, &mut rng);
            let shift = (1.0 - linalg::trace(&h).re) / 6.0;
            let t = h + CMatrix::identity(6, 6) * linalg::re(shift);
            let exact = linalg::frobenius(&(linalg::nearest_density(&t) - &t));
            let fw = proj.frank_wolfe(&t, &ProjectionOptions::default(), None).unwrap();
            assert!(fw.distance >= exact - 1e-9);
            assert!(fw.lower_bound <= exact + 1e-9);
            assert!(fw.distance - fw.lower_bound <= 1e-4 + 1e-12);
        }
    }

    #[test]
    fn pushed_past_pair_bound_is_far() {
        let proj = Projector::new(6, 3).unwrap();
        let mixed = TwoRDM::maximally_mixed(6, 3).unwrap();
        let mut alpha = expectation_vector(&mixed).unwrap().into_values();
        let z12 = proj.observables().len() - proj.observables().pair_dim() + 1;
        alpha[z12] += 2.0;
        let target = ExpectationVector::new(6, 3, alpha).unwrap();
        let res = project_onto_k(&target, 1e-4, DEFAULT_MAX_ITER).unwrap();
        assert!(res.lower_bound >= 1.0 - 1e-4, "lower {}", res.lower_bound);
    }

    #[test]
    fn verdict_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = Arc::new(build_basis(8, 4).unwrap());
        let sigma = NSectorDensity::random(b, 3, &mut rng);
        let inst = RepresentabilityInstance::new(two_rdm(&sigma).unwrap(), 0.1).unwrap();
        assert_eq!(is_representable(&inst).unwrap().kind, VerdictKind::Yes);

        let proj = TwoRDM::pair_projector(6, 3, 0, 1).unwrap();
        assert_eq!(coleman_precheck(&proj), ColemanVerdict::Fail);
        let inst = RepresentabilityInstance::new(proj, 0.5).unwrap();
        let v = is_representable(&inst).unwrap();
        assert_eq!(v.kind, VerdictKind::No);
        assert!(v.to_string().starts_with("verdict=NO distance="));

        let t = linalg::random_density(6, 2, &mut rng);
        let inst = RepresentabilityInstance::new(TwoRDM::new(4, 2, t).unwrap(), 0.1).unwrap();
        assert_eq!(is_representable(&inst).unwrap().kind, VerdictKind::Yes);
    }

    #[test]
    fn coleman_precheck_examples() {
        for (d, n) in [(4, 2), (5, 3), (6, 4)] {
            let mixed = TwoRDM::maximally_mixed(d, n).unwrap();
            assert_eq!(coleman_precheck(&mixed), ColemanVerdict::Pass);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = Arc::new(build_basis(6, 3).unwrap());
        let sigma = NSectorDensity::random(b, 2, &mut rng);
        assert_eq!(coleman_precheck(&two_rdm(&sigma).unwrap()), ColemanVerdict::Pass);
    }

    #[test]
    fn hyperplane_separates_target_from_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let proj = Projector::new(5, 3).unwrap();
        let mixed = TwoRDM::maximally_mixed(5, 3).unwrap();
        let mut alpha = expectation_vector(&mixed).unwrap().into_values();
        let z12 = proj.observables().len() - proj.observables().pair_dim() + 1;
        alpha[z12] += 2.0;
        let target = ExpectationVector::new(5, 3, alpha).unwrap();
        let cut = separating_hyperplane(&proj, &target, &ProjectionOptions::default()).unwrap();
        assert!(cut.margin > 0.0);
        let top = cut
            .normal
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(top, z12);
        for _ in 0..50 {
            let s = NSectorDensity::random(Arc::clone(proj.basis()), 2, &mut rng);
            let a = contraction_expectations(&s).unwrap();
            assert!(cut.evaluate(a.values()) <= 1e-9);
        }
    }

    #[test]
    fn inside_point_has_no_hyperplane() {
        let proj = Projector::new(5, 3).unwrap();
        let mixed = TwoRDM::maximally_mixed(5, 3).unwrap();
        let a = expectation_vector(&mixed).unwrap();
        assert!(matches!(
            separating_hyperplane(&proj, &a, &ProjectionOptions::default()),
            Err(Error::PointInside { .. })
        ));
    }
}
