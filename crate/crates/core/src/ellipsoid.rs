//! Ground energies through the representability oracle: a linear objective
//! over `K` minimized by the ellipsoid method.
//!
//! The feasible set is `K` in observable coordinates. At each center the
//! oracle either certifies a separating hyperplane (exact support value, so
//! the cut is deep and valid) or returns a point of `K` within `tol_feas` of
//! the center, which is recorded as a feasible value and followed by an
//! objective cut.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{operator_matrix, FermionOperator, NSectorDensity, SlaterBasis};
use crate::hamiltonians::{default_penalty, spin_to_fermion, two_body_normal_form, SpinHamiltonian};
use crate::linalg::{self, CMatrix};
use crate::oracle::{ProjectionOptions, Projector};
use crate::rdm::{observable_count, pair_normalization, ExpectationVector, ObservableBasis};

/// `E(sigma) = gamma . alpha(sigma) + c0` for every `N`-particle density.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearObjective {
    pub d: usize,
    pub n: usize,
    pub gamma: Vec<f64>,
    pub c0: f64,
}

impl LinearObjective {
    pub fn value(&self, alpha: &[f64]) -> f64 {
        dot(&self.gamma, alpha) + self.c0
    }

    pub fn one_norm(&self) -> f64 {
        self.gamma.iter().map(|x| x.abs()).sum()
    }

    pub fn two_norm(&self) -> f64 {
        self.gamma.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expands a number-conserving Hermitian operator of at most two-body terms
/// as a linear objective over the `N`-particle 2-RDM coordinates.
///
/// One-body terms are first rewritten as two-body terms (exact on the
/// sector). With `G` the operator's two-particle matrix expanded as
/// `sum_S g_S S + g0`, the sector energy is `(g . alpha + g0) / c_N` plus the
/// constant term.
pub fn decompose_objective(
    h: &FermionOperator,
    basis: &ObservableBasis,
    n: usize,
) -> Result<LinearObjective> {
    let d = basis.d();
    if h.d() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator on d={} for an observable basis on d={d}",
            h.d()
        )));
    }
    if n < 2 || n > d {
        return Err(Error::InvalidArguments(format!("need 2 <= N <= d, got N={n}")));
    }
    if !h.is_number_conserving() || h.max_body() > 2 {
        return Err(Error::InvalidArguments(
            "objective must be number-conserving with at most two-body terms".into(),
        ));
    }
    let h = two_body_normal_form(h, n)?;
    let mut constant = 0.0;
    let mut two_body = FermionOperator::zero(d);
    for (mono, coef) in h.terms() {
        if mono.degree() == 0 {
            if coef.im.abs() > 1e-10 {
                return Err(Error::NonHermitian(coef.im.abs()));
            }
            constant += coef.re;
        } else {
            two_body.add_term(*coef, mono.clone());
        }
    }
    let pairs = SlaterBasis::with_cap(d, 2, usize::MAX)?;
    let g = operator_matrix(&two_body, &pairs, &pairs)?;
    let dev = linalg::hermiticity_deviation(&g);
    if dev > 1e-10 {
        return Err(Error::NonHermitian(dev));
    }
    let g = linalg::hermitian_part(&g);
    let (gamma, g0) = basis.expand(&g);
    let residual = linalg::frobenius(
        &(basis.combine(&gamma) + CMatrix::identity(g.nrows(), g.nrows()) * linalg::re(g0) - &g),
    );
    if residual > 1e-10 {
        return Err(Error::OutsideSpan(residual));
    }
    let c = pair_normalization(n);
    Ok(LinearObjective {
        d,
        n,
        gamma: gamma.iter().map(|x| x / c).collect(),
        c0: g0 / c + constant,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutKind {
    Feasible,
    Infeasible,
}

impl fmt::Display for CutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutKind::Feasible => "FEAS",
            CutKind::Infeasible => "INFEAS",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub center_norm: f64,
    pub volume_log: f64,
    pub cut: CutKind,
    pub best_value: f64,
}

pub const TRACE_HEADER: &str = "iter,center_norm,volume_log,cut_type,best_value";

impl fmt::Display for TraceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{:.16e},{:.16e},{},{:.16e}",
            self.iter, self.center_norm, self.volume_log, self.cut, self.best_value
        )
    }
}

/// Center and shape `P` of `{x : (x - c)^T P^{-1} (x - c) <= 1}`.
#[derive(Clone, Debug)]
pub struct EllipsoidState {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    pub iteration: usize,
    /// `log(volume / initial volume)`.
    pub volume_log: f64,
}

/// Largest coordinate dimension the dense shape matrix is built for.
pub const MAX_ELLIPSOID_DIM: usize = 2048;

/// Smallest eigenvalue allowed in the shape matrix.
const EIGEN_FLOOR: f64 = 1e-14;

impl EllipsoidState {
    /// Ball of radius `radius` around the origin.
    pub fn ball(dim: usize, radius: f64) -> Self {
        Self {
            center: DVector::zeros(dim),
            shape: DMatrix::identity(dim, dim) * (radius * radius),
            iteration: 0,
            volume_log: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `sqrt(a^T P a)`: half-width of the ellipsoid along `a` (scaled by `|a|`).
    pub fn width(&self, a: &DVector<f64>) -> f64 {
        (a.dot(&(&self.shape * a))).max(0.0).sqrt()
    }

    /// Applies the cut `a . x <= b`. Returns the cut depth, or `None` when
    /// the cut leaves nothing of the ellipsoid (depth >= 1).
    pub fn cut(&mut self, a: &DVector<f64>, b: f64) -> Result<Option<f64>> {
        let n = self.dim() as f64;
        let pa = &self.shape * a;
        let apa = a.dot(&pa);
        if !(apa > 0.0) || !apa.is_finite() {
            return Err(Error::DegenerateShape);
        }
        let width = apa.sqrt();
        let depth = ((a.dot(&self.center) - b) / width).max(0.0);
        if depth >= 1.0 {
            return Ok(None);
        }
        let tau = (1.0 + n * depth) / (n + 1.0);
        let delta = n * n * (1.0 - depth * depth) / (n * n - 1.0);
        let sigma = 2.0 * (1.0 + n * depth) / ((n + 1.0) * (1.0 + depth));
        self.center -= &pa * (tau / width);
        self.shape -= (&pa * pa.transpose()) * (sigma / apa);
        self.shape *= delta;
        // symmetrize
        let t = self.shape.transpose();
        self.shape += t;
        self.shape *= 0.5;
        self.volume_log += 0.5 * (n * delta.ln() + (1.0 - sigma).ln());
        self.iteration += 1;
        Ok(Some(depth))
    }

    /// Raises eigenvalues below the floor back to it.
    pub fn regularize(&mut self) -> Result<()> {
        let eig = self.shape.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateShape);
        }
        if eig.eigenvalues.iter().all(|&x| x >= EIGEN_FLOOR) {
            return Ok(());
        }
        let floored = eig.eigenvalues.map(|x| x.max(EIGEN_FLOOR));
        self.shape = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
        Ok(())
    }
}

/// Per-iteration volume factor guaranteed by a central cut.
pub fn volume_decrease_bound(dim: usize) -> f64 {
    -1.0 / (2.0 * (dim as f64 + 1.0))
}

/// Iterations after which the volume argument guarantees an `eps`-optimal
/// feasible center: the ellipsoid must shrink from the radius `big` ball to
/// below a ball of radius `small * eps_rel`.
pub fn iteration_budget(dim: usize, big: f64, small: f64, eps_rel: f64) -> usize {
    let n = dim as f64;
    let shrink = n * (big / (small * eps_rel.min(1.0))).ln().max(1.0);
    (2.0 * (n + 1.0) * shrink).ceil() as usize
}

/// Inner radius of `K` around the maximally mixed point used for the budget:
/// `1 / (m sqrt(m))` with `m = C(d, 2)`.
pub fn inner_radius_bound(d: usize) -> f64 {
    let m = (d * (d - 1) / 2) as f64;
    1.0 / (m * m.sqrt())
}

#[derive(Clone, Debug)]
pub struct EllipsoidConfig {
    /// Absolute accuracy; `None` uses `1e-2 * sum |gamma|`.
    pub eps: Option<f64>,
    /// `None` uses [`iteration_budget`].
    pub max_iter: Option<usize>,
    /// Record one trace row every `trace_stride` iterations (0 disables).
    pub trace_stride: usize,
    /// Iteration budget of each projection.
    pub oracle_max_iter: usize,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        Self {
            eps: None,
            max_iter: None,
            trace_stride: 0,
            oracle_max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EllipsoidResult {
    /// Best feasible value found.
    pub value: f64,
    /// Certified lower bound on the minimum over `K`.
    pub lower_bound: f64,
    pub argmin: ExpectationVector,
    /// Sector density whose 2-RDM attains `argmin`.
    pub witness: NSectorDensity,
    pub iterations: usize,
    /// `value - lower_bound <= eps` was reached within the budget.
    pub converged: bool,
    pub eps: f64,
    pub volume_log: f64,
    pub trace: Vec<TraceRow>,
}

fn feasible_tolerance(obj: &LinearObjective, eps: f64) -> f64 {
    // alpha moves by at most sqrt(2) times the Frobenius move
    (eps / (4.0 * std::f64::consts::SQRT_2 * obj.two_norm().max(1e-300))).clamp(1e-9, 1e-2)
}

/// Minimizes `obj` over `K_N` with the ellipsoid method.
pub fn minimize_over_k(obj: &LinearObjective, config: &EllipsoidConfig) -> Result<EllipsoidResult> {
    if obj.gamma.len() > MAX_ELLIPSOID_DIM {
        return Err(Error::SectorTooLarge {
            size: obj.gamma.len() as u128,
            cap: MAX_ELLIPSOID_DIM,
        });
    }
    let projector = Projector::new(obj.d, obj.n)?;
    minimize_with(&projector, obj, config)
}

/// [`minimize_over_k`] on a prebuilt projector.
pub fn minimize_with(
    projector: &Projector,
    obj: &LinearObjective,
    config: &EllipsoidConfig,
) -> Result<EllipsoidResult> {
    let basis = projector.observables();
    let ell = basis.len();
    if obj.gamma.len() != ell || projector.d() != obj.d || projector.n() != obj.n {
        return Err(Error::DimensionMismatch("objective does not match the projector".into()));
    }
    let eps = config.eps.unwrap_or(1e-2 * obj.one_norm());
    if obj.two_norm() == 0.0 {
        // constant objective: any state is optimal
        let witness = NSectorDensity::maximally_mixed(Arc::clone(projector.basis()));
        let p = projector.reduce(witness.matrix());
        return Ok(EllipsoidResult {
            value: obj.c0,
            lower_bound: obj.c0,
            argmin: ExpectationVector::new(obj.d, obj.n, basis.coordinates(&p))?,
            witness,
            iterations: 0,
            converged: true,
            eps,
            volume_log: 0.0,
            trace: Vec::new(),
        });
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArguments(format!("eps must be positive, got {eps}")));
    }
    let radius = (ell as f64).sqrt();
    let budget = config.max_iter.unwrap_or_else(|| {
        iteration_budget(ell, radius, inner_radius_bound(obj.d), eps / obj.one_norm())
    });
    let tol_feas = feasible_tolerance(obj, eps);
    let opts = ProjectionOptions {
        tol: tol_feas / 2.0,
        max_iter: config.oracle_max_iter,
        stop_below: Some(tol_feas),
        stop_above: None,
        log_stride: usize::MAX,
    };
    let gamma = DVector::from_column_slice(&obj.gamma);
    let gamma_width = |e: &EllipsoidState| e.width(&gamma);
    let mut state = EllipsoidState::ball(ell, radius);
    let mut best: Option<(f64, CMatrix, CMatrix)> = None;
    // smallest objective-cut threshold, in gamma . alpha units
    let mut cut_floor = f64::INFINITY;
    let mut warm: Option<CMatrix> = None;
    let mut trace = Vec::new();
    let mut lower = f64::NEG_INFINITY;
    let regularize_every = ell.max(16);
    let mut converged = false;
    while state.iteration < budget {
        let center: Vec<f64> = state.center.iter().copied().collect();
        let target = basis.matrix_from_coordinates(&center);
        let res = projector.project(&target, &opts, warm.as_ref())?;
        warm = Some(res.witness.matrix().clone());
        let alpha_p = basis.coordinates(&res.nearest_rdm);
        let value_p = obj.value(&alpha_p);
        if best.as_ref().is_none_or(|b| value_p < b.0) {
            best = Some((value_p, res.nearest_rdm.clone(), res.witness.matrix().clone()));
        }
        let best_value = best.as_ref().map(|b| b.0).unwrap_or(f64::INFINITY);
        let (a, b, kind) = if res.distance <= tol_feas {
            let threshold = dot(&obj.gamma, &center).min(best_value - obj.c0);
            cut_floor = cut_floor.min(threshold);
            (gamma.clone(), threshold, CutKind::Feasible)
        } else {
            let g = &target - &res.nearest_rdm;
            let (h, _) = projector.support(&g);
            let (coef, g0) = basis.expand(&g);
            let a = DVector::from_vec(coef);
            let b = h - g0;
            if a.dot(&state.center) - b <= 0.0 {
                // no certified separation: fall back to an objective cut at the
                // feasible point, which is always valid
                let threshold = best_value - obj.c0;
                cut_floor = cut_floor.min(threshold);
                (gamma.clone(), threshold, CutKind::Feasible)
            } else {
                (a, b, CutKind::Infeasible)
            }
        };
        let before = state.volume_log;
        let outcome = state.cut(&a, b)?;
        if outcome.is_some() {
            let drop = state.volume_log - before;
            if drop > volume_decrease_bound(ell) + 1e-9 {
                return Err(Error::DegenerateShape);
            }
        }
        if state.iteration % regularize_every == 0 {
            state.regularize()?;
        }
        let envelope = dot(&obj.gamma, state.center.as_slice()) - gamma_width(&state);
        let floor = if outcome.is_none() && kind == CutKind::Feasible {
            // nothing of the ellipsoid is better than the cut threshold
            cut_floor.min(b)
        } else {
            cut_floor.min(envelope)
        };
        lower = lower.max(floor + obj.c0).min(best_value);
        if config.trace_stride > 0 && state.iteration % config.trace_stride == 0 {
            trace.push(TraceRow {
                iter: state.iteration,
                center_norm: state.center.norm(),
                volume_log: state.volume_log,
                cut: kind,
                best_value,
            });
        }
        if best_value - lower <= eps || outcome.is_none() {
            converged = best_value - lower <= eps;
            if outcome.is_none() && kind == CutKind::Infeasible {
                return Err(Error::DegenerateShape);
            }
            break;
        }
    }
    let (value, p, sigma) = best.ok_or(Error::DegenerateShape)?;
    Ok(EllipsoidResult {
        value,
        lower_bound: lower,
        argmin: ExpectationVector::new(obj.d, obj.n, basis.coordinates(&p))?,
        witness: NSectorDensity::new(Arc::clone(projector.basis()), sigma)?,
        iterations: state.iteration,
        converged,
        eps,
        volume_log: state.volume_log,
        trace,
    })
}

/// Full reduction for a spin Hamiltonian: one-per-site encoding with the
/// default penalty, two-body rewriting, expansion over the observables and
/// ellipsoid minimization on the `N = n_qubits` sector. A one-qubit
/// Hamiltonian is padded with an idle qubit, since the observables need at
/// least three modes.
#[derive(Clone, Debug)]
pub struct OracleEnergy {
    pub value: f64,
    pub objective: LinearObjective,
    pub fermion_op: FermionOperator,
    pub result: EllipsoidResult,
}

pub fn ground_energy_via_oracle(h: &SpinHamiltonian, config: &EllipsoidConfig) -> Result<OracleEnergy> {
    let h = if h.n_qubits() < 2 {
        h.padded(2 - h.n_qubits())
    } else {
        h.clone()
    };
    let (op, map) = spin_to_fermion(&h, default_penalty(&h))?;
    let n = map.n_qubits();
    let basis = ObservableBasis::new(map.d())?;
    let objective = decompose_objective(&op, &basis, n)?;
    let result = minimize_over_k(&objective, config)?;
    Ok(OracleEnergy {
        value: result.value,
        objective,
        fermion_op: op,
        result,
    })
}

/// `ell` for the sector an `n`-qubit Hamiltonian maps to.
pub fn dimension_for_qubits(n_qubits: usize) -> usize {
    observable_count(2 * n_qubits.max(2))
}
