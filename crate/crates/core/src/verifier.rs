//! Monte-Carlo simulation of the verification protocol.
//!
//! A witness is a sequence of blocks of `d` qubits, each block meant to hold
//! one copy of an `N`-fermion state under the occupation-number encoding
//! (qubit `k` is mode `k`, mode 1 first). The verifier checks the particle
//! number of every block, estimates the observable coordinates by the
//! ancilla gadget (an eigenvalue is drawn with its Born probability, then a
//! coin with bias equal to the rescaled eigenvalue), and accepts when every
//! estimate is within `t` of the claimed coordinates.
//!
//! Sampling is aggregated: the shot counts per eigenvector are a multinomial
//! draw and the coin flips for each eigenvector a binomial draw, which is
//! exactly the distribution of the summed single-shot outcomes.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::fock::{full_space_index, NSectorDensity, SlaterBasis};
use crate::hamiltonians::jordan_wigner;
use crate::linalg::{self, CMatrix, CVector};
use crate::rdm::{expectation_vector, pair_normalization, ObservableBasis, TwoRDM};

/// Largest number of qubits simulated jointly.
pub const DEFAULT_QUBIT_CAP: usize = 20;
/// Failure probability budget of the honest run used for calibration.
pub const CALIBRATION_FAILURE: f64 = 0.05;
pub const DEFAULT_PURITY_EPS: f64 = 0.1;

/// How the blocks are stored.
#[derive(Clone, Debug)]
pub enum BlockLayout {
    /// Independent blocks, one density matrix each.
    Product(Vec<Arc<CMatrix>>),
    /// `repeats` independent copies of a joint state over `group` blocks.
    Entangled {
        group: usize,
        joint: Arc<CMatrix>,
        repeats: usize,
    },
}

#[derive(Clone, Debug)]
pub struct WitnessBlocks {
    d: usize,
    layout: BlockLayout,
}

impl WitnessBlocks {
    pub fn product(d: usize, blocks: Vec<CMatrix>) -> Result<Self> {
        check_cap(d, DEFAULT_QUBIT_CAP)?;
        let dim = 1usize << d;
        for b in &blocks {
            check_density(b, dim)?;
        }
        Ok(Self {
            d,
            layout: BlockLayout::Product(blocks.into_iter().map(Arc::new).collect()),
        })
    }

    pub fn entangled(d: usize, group: usize, joint: CMatrix, repeats: usize) -> Result<Self> {
        if group == 0 || repeats == 0 {
            return Err(Error::InvalidArguments("entangled witness needs at least one block".into()));
        }
        check_cap(d * group, DEFAULT_QUBIT_CAP)?;
        check_density(&joint, 1usize << (d * group))?;
        Ok(Self {
            d,
            layout: BlockLayout::Entangled {
                group,
                joint: Arc::new(joint),
                repeats,
            },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn block_count(&self) -> usize {
        match &self.layout {
            BlockLayout::Product(b) => b.len(),
            BlockLayout::Entangled { group, repeats, .. } => group * repeats,
        }
    }

    /// Qubits of the largest jointly simulated group.
    pub fn joint_qubits(&self) -> usize {
        match &self.layout {
            BlockLayout::Product(_) => self.d,
            BlockLayout::Entangled { group, .. } => self.d * group,
        }
    }

    /// Reduced state of block `b`.
    pub fn marginal(&self, b: usize) -> CMatrix {
        match &self.layout {
            BlockLayout::Product(blocks) => (*blocks[b]).clone(),
            BlockLayout::Entangled { group, joint, .. } => {
                partial_block(joint, self.d, *group, b % group)
            }
        }
    }

    /// Jointly simulated groups as `(first block, state)`.
    fn groups(&self) -> Vec<(usize, usize, Arc<CMatrix>)> {
        match &self.layout {
            BlockLayout::Product(blocks) => {
                blocks.iter().enumerate().map(|(b, s)| (b, 1, Arc::clone(s))).collect()
            }
            BlockLayout::Entangled {
                group,
                joint,
                repeats,
            } => (0..*repeats).map(|r| (r * group, *group, Arc::clone(joint))).collect(),
        }
    }
}

fn check_cap(qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        return Err(Error::QubitCap { qubits, cap });
    }
    Ok(())
}

fn check_density(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "block state of size {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    let tr = linalg::trace(m);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidState(format!("block trace {tr}")));
    }
    if linalg::hermiticity_deviation(m) > 1e-9 {
        return Err(Error::InvalidState("block state is not Hermitian".into()));
    }
    Ok(())
}

/// Reduced density of block `pos` in a joint state over `group` blocks of
/// `d` qubits (block 0 holds the most significant qubits).
fn partial_block(joint: &CMatrix, d: usize, group: usize, pos: usize) -> CMatrix {
    let bd = 1usize << d;
    let after = 1usize << (d * (group - pos - 1));
    let before = 1usize << (d * pos);
    let mut out = CMatrix::zeros(bd, bd);
    for x in 0..before {
        for z in 0..after {
            for i in 0..bd {
                for j in 0..bd {
                    let r = (x * bd + i) * after + z;
                    let c = (x * bd + j) * after + z;
                    out[(i, j)] += joint[(r, c)];
                }
            }
        }
    }
    out
}

/// Occupation-number encoding of a sector density on `d` qubits.
pub fn encode_density(sigma: &NSectorDensity) -> CMatrix {
    let d = sigma.d();
    let dim = 1usize << d;
    let basis = sigma.basis();
    let idx: Vec<usize> = basis.states().iter().map(|&o| full_space_index(o, d)).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for (r, &ir) in idx.iter().enumerate() {
        for (c, &ic) in idx.iter().enumerate() {
            out[(ir, ic)] = sigma.matrix()[(r, c)];
        }
    }
    out
}

/// `blocks` independent copies of the encoding of `sigma`.
pub fn honest_witness(sigma: &NSectorDensity, blocks: usize) -> Result<WitnessBlocks> {
    check_cap(sigma.d(), DEFAULT_QUBIT_CAP)?;
    let enc = Arc::new(encode_density(sigma));
    Ok(WitnessBlocks {
        d: sigma.d(),
        layout: BlockLayout::Product(vec![enc; blocks]),
    })
}

/// Measures the total occupation of a block. Returns the outcome, its
/// probability and the renormalized post-measurement state.
pub fn measure_particle_number<R: Rng + ?Sized>(
    block: &CMatrix,
    rng: &mut R,
) -> (usize, f64, CMatrix) {
    let probs = weight_distribution(block);
    let n = sample_index(&probs, rng);
    (n, probs[n], project_weight(block, n))
}

/// Probability of each total occupation `0..=qubits`.
pub fn weight_distribution(block: &CMatrix) -> Vec<f64> {
    let dim = block.nrows();
    let qubits = dim.trailing_zeros() as usize;
    let mut probs = vec![0.0; qubits + 1];
    for i in 0..dim {
        probs[i.count_ones() as usize] += block[(i, i)].re.max(0.0);
    }
    probs
}

fn project_weight(block: &CMatrix, n: usize) -> CMatrix {
    let dim = block.nrows();
    let keep = |i: usize| i.count_ones() as usize == n;
    let mut out = CMatrix::from_fn(dim, dim, |r, c| {
        if keep(r) && keep(c) { block[(r, c)] } else { linalg::ZERO }
    });
    let tr = linalg::trace(&out).re;
    if tr > 0.0 {
        out /= linalg::re(tr);
    }
    out
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Multinomial draw by successive conditional binomials.
fn multinomial<R: Rng + ?Sized>(shots: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut out = vec![0; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let p = p.max(0.0);
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = binomial(left, q, rng);
        out[i] = k;
        left -= k;
        mass -= p;
    }
    if left > 0 {
        // rounding left some mass unassigned; give it to the likeliest outcome
        let i = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        out[i] += left;
    }
    out
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// A Hermitian observable prepared for the ancilla gadget: eigenvectors and
/// eigenvalues rescaled into `[0, 1]` by `(lambda - lo) / (hi - lo)`.
#[derive(Clone, Debug)]
pub struct GadgetObservable {
    vectors: CMatrix,
    scaled: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl GadgetObservable {
    pub fn new(op: &CMatrix) -> Result<Self> {
        let dev = linalg::hermiticity_deviation(op);
        if dev > 1e-10 {
            return Err(Error::NonHermitian(dev));
        }
        let (values, vectors) = linalg::eigh(&linalg::hermitian_part(op));
        let lo = values.first().copied().unwrap_or(0.0);
        let mut hi = values.last().copied().unwrap_or(0.0);
        if hi - lo < 1e-12 {
            // a multiple of the identity; any unit range works
            hi = lo + 1.0;
        }
        let scaled = values.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect();
        Ok(Self {
            vectors,
            scaled,
            lo,
            hi,
        })
    }

    pub fn dim(&self) -> usize {
        self.scaled.len()
    }

    /// `hi - lo`: the estimate's range.
    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn rescaled_eigenvalues(&self) -> &[f64] {
        &self.scaled
    }

    /// Born probabilities of the eigenvectors.
    pub fn probabilities(&self, state: &CMatrix) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let v = self.vectors.column(i);
                (v.adjoint() * state * v)[(0, 0)].re.max(0.0)
            })
            .collect()
    }

    pub fn exact(&self, state: &CMatrix) -> f64 {
        let p = self.probabilities(state);
        let mean: f64 = p.iter().zip(&self.scaled).map(|(p, l)| p * l).sum();
        self.lo + (self.hi - self.lo) * mean
    }

    /// De-rescaled value of a count of ancilla ones.
    fn value(&self, ones: u64, shots: u64) -> f64 {
        self.lo + (self.hi - self.lo) * ones as f64 / shots as f64
    }
}

/// Gadget estimate of `<O>` from `shots` runs; the standard error is at most
/// `range / (2 sqrt(shots))`.
pub fn sample_observable<R: Rng + ?Sized>(
    state: &CMatrix,
    op: &GadgetObservable,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArguments("shots must be positive".into()));
    }
    if state.nrows() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for an observable of dimension {}",
            state.nrows(),
            op.dim()
        )));
    }
    let counts = multinomial(shots, &op.probabilities(state), rng);
    let ones: u64 = counts
        .iter()
        .zip(&op.scaled)
        .map(|(&n, &l)| binomial(n, l, rng))
        .sum();
    Ok(op.value(ones, shots))
}

#[derive(Clone, Debug)]
pub struct VerifierConfig {
    pub rho: TwoRDM,
    pub beta: f64,
    /// Total shots per observable, split evenly over its blocks.
    pub shots: u64,
    /// Largest allowed deviation per coordinate.
    pub threshold: f64,
}

impl VerifierConfig {
    pub fn new(rho: TwoRDM, beta: f64, shots: u64, threshold: f64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidArguments("shots must be positive".into()));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidArguments(format!("threshold must be in (0, 1), got {threshold}")));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidArguments(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            rho,
            beta,
            shots,
            threshold,
        })
    }

    /// Threshold `t = (beta / m) / (4 sqrt(ell))`, and shots from the
    /// Hoeffding bound so that an honest run fails with probability at most
    /// [`CALIBRATION_FAILURE`] over all coordinates.
    ///
    /// A witness at trace distance `beta` moves the pair matrix by at least
    /// `beta / sqrt(m)` in Frobenius norm and the coordinates by at least
    /// `beta / m` in Euclidean norm, so some coordinate by at least `4 t`.
    pub fn calibrated(rho: TwoRDM, beta: f64) -> Result<Self> {
        let d = rho.d();
        let basis = ObservableBasis::new(d)?;
        let m = basis.pair_dim() as f64;
        let ell = basis.len() as f64;
        let t = calibrated_threshold(beta, m, ell);
        let range = observable_schedule(d, rho.n())?
            .iter()
            .map(|o| o.range())
            .fold(0.0, f64::max);
        let shots = (range * range * (2.0 * ell / CALIBRATION_FAILURE).ln() / (2.0 * t * t)).ceil();
        Self::new(rho, beta, shots as u64, t)
    }

    pub fn d(&self) -> usize {
        self.rho.d()
    }

    pub fn n(&self) -> usize {
        self.rho.n()
    }
}

pub fn calibrated_threshold(beta: f64, m: f64, ell: f64) -> f64 {
    beta / m / (4.0 * ell.sqrt())
}

/// Gadget observables `c_N JW(S)` in observable order; their expectations on
/// an encoded `N`-fermion block are the 2-RDM coordinates.
pub fn observable_schedule(d: usize, n: usize) -> Result<Vec<GadgetObservable>> {
    let basis = ObservableBasis::new(d)?;
    let c = pair_normalization(n);
    basis
        .operators()
        .iter()
        .map(|op| GadgetObservable::new(&(jordan_wigner(op).matrix() * linalg::re(c))))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifierOutcome {
    pub seed: u64,
    pub accepted: bool,
    /// Every block had the right particle number.
    pub number_ok: bool,
    pub estimates: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_dev: f64,
    pub blocks: usize,
    pub shots: u64,
}

impl fmt::Display for VerifierOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seed={} accepted={} max_dev={:.16e} blocks={} shots={}",
            self.seed, self.accepted, self.max_dev, self.blocks, self.shots
        )
    }
}

/// Observable table and claimed coordinates shared by every run.
#[derive(Clone, Debug)]
pub struct Verifier {
    config: VerifierConfig,
    observables: Vec<GadgetObservable>,
    claimed: Vec<f64>,
}

impl Verifier {
    pub fn new(config: VerifierConfig) -> Result<Self> {
        let observables = observable_schedule(config.d(), config.n())?;
        let claimed = expectation_vector(&config.rho)?.into_values();
        Ok(Self {
            config,
            observables,
            claimed,
        })
    }

    pub fn config(&self) -> &VerifierConfig {
        &self.config
    }

    pub fn observable_count(&self) -> usize {
        self.observables.len()
    }

    pub fn claimed(&self) -> &[f64] {
        &self.claimed
    }

    /// One run with its own seeded generator.
    pub fn run(&self, witness: &WitnessBlocks, seed: u64) -> Result<VerifierOutcome> {
        let ell = self.observables.len();
        let d = self.config.d();
        let n = self.config.n();
        if witness.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "witness blocks of {} qubits for d={d}",
                witness.d()
            )));
        }
        let blocks = witness.block_count();
        if blocks < ell {
            return Err(Error::InsufficientBlocks { need: ell, have: blocks });
        }
        check_cap(witness.joint_qubits(), DEFAULT_QUBIT_CAP)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // block b measures observable b mod ell
        let per_block: Vec<u64> = (0..ell)
            .map(|k| {
                let count = (blocks - k).div_ceil(ell) as u64;
                self.config.shots.div_ceil(count)
            })
            .collect();
        let mut ones = vec![0u64; ell];
        let mut taken = vec![0u64; ell];
        let mut number_ok = true;
        for (first, group, state) in witness.groups() {
            let Some(post) = number_check(&state, d, group, n, &mut rng) else {
                number_ok = false;
                break;
            };
            let obs: Vec<usize> = (first..first + group).map(|b| b % ell).collect();
            let shots = obs.iter().map(|&k| per_block[k]).max().unwrap_or(1);
            let counts = joint_gadget(&post, &obs.iter().map(|&k| &self.observables[k]).collect::<Vec<_>>(), shots, &mut rng);
            for (j, &k) in obs.iter().enumerate() {
                ones[k] += counts[j];
                taken[k] += shots;
            }
        }
        if !number_ok {
            return Ok(VerifierOutcome {
                seed,
                accepted: false,
                number_ok,
                estimates: Vec::new(),
                deviations: Vec::new(),
                max_dev: f64::INFINITY,
                blocks,
                shots: self.config.shots,
            });
        }
        let estimates: Vec<f64> = (0..ell).map(|k| self.observables[k].value(ones[k], taken[k])).collect();
        let deviations: Vec<f64> = estimates.iter().zip(&self.claimed).map(|(e, c)| (e - c).abs()).collect();
        let max_dev = deviations.iter().copied().fold(0.0, f64::max);
        Ok(VerifierOutcome {
            seed,
            accepted: max_dev <= self.config.threshold,
            number_ok,
            estimates,
            deviations,
            max_dev,
            blocks,
            shots: self.config.shots,
        })
    }

    /// `runs` runs with seeds `seed, seed + 1, ...`.
    pub fn run_many(&self, witness: &WitnessBlocks, runs: usize, seed: u64) -> Result<RunSummary> {
        let outcomes = (0..runs as u64)
            .map(|r| self.run(witness, seed.wrapping_add(r)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunSummary::new(outcomes))
    }
}

/// Particle-number measurement of every block of a group; `None` on a wrong
/// outcome, otherwise the post-measurement joint state.
fn number_check<R: Rng + ?Sized>(
    state: &CMatrix,
    d: usize,
    group: usize,
    n: usize,
    rng: &mut R,
) -> Option<CMatrix> {
    let dim = state.nrows();
    let block_mask = (1usize << d) - 1;
    let weights = |i: usize| -> Vec<usize> {
        (0..group)
            .map(|p| ((i >> (d * (group - 1 - p))) & block_mask).count_ones() as usize)
            .collect()
    };
    let diag: Vec<f64> = (0..dim).map(|i| state[(i, i)].re.max(0.0)).collect();
    let outcome = weights(sample_index(&diag, rng));
    if outcome.iter().any(|&w| w != n) {
        return None;
    }
    let keep: Vec<bool> = (0..dim).map(|i| weights(i) == outcome).collect();
    let mut post = CMatrix::from_fn(dim, dim, |r, c| {
        if keep[r] && keep[c] { state[(r, c)] } else { linalg::ZERO }
    });
    let tr = linalg::trace(&post).re;
    post /= linalg::re(tr);
    Some(post)
}

/// Ancilla ones per block when each block of a joint state runs its own
/// gadget, `shots` times.
fn joint_gadget<R: Rng + ?Sized>(
    state: &CMatrix,
    obs: &[&GadgetObservable],
    shots: u64,
    rng: &mut R,
) -> Vec<u64> {
    if obs.len() == 1 {
        let counts = multinomial(shots, &obs[0].probabilities(state), rng);
        return vec![counts.iter().zip(&obs[0].scaled).map(|(&c, &l)| binomial(c, l, rng)).sum()];
    }
    // state * (V_1 (x) ... (x) V_k), one factor at a time
    let mut m = state.clone();
    let mut stride = 1;
    for o in obs.iter().rev() {
        m = right_apply(&m, &o.vectors, stride);
        stride *= o.dim();
    }
    let mut u = obs[0].vectors.clone();
    for o in &obs[1..] {
        u = linalg::kron(&u, &o.vectors);
    }
    let probs: Vec<f64> = (0..m.ncols())
        .map(|i| u.column(i).iter().zip(m.column(i).iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().re.max(0.0))
        .collect();
    let counts = multinomial(shots, &probs, rng);
    let mut ones = vec![0u64; obs.len()];
    for (idx, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mut rest = idx;
        for j in (0..obs.len()).rev() {
            let dim = obs[j].dim();
            ones[j] += binomial(count, obs[j].scaled[rest % dim], rng);
            rest /= dim;
        }
    }
    ones
}

/// `m * (I (x) f (x) I)` where `f` acts on the column digit of weight
/// `stride`.
fn right_apply(m: &CMatrix, f: &CMatrix, stride: usize) -> CMatrix {
    let dim = f.nrows();
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let j = (c / stride) % dim;
        let base = c - j * stride;
        (0..dim).map(|a| m[(r, base + a * stride)] * f[(a, j)]).sum()
    })
}

/// One run of the protocol; see [`Verifier::run`].
pub fn verify(config: &VerifierConfig, witness: &WitnessBlocks, seed: u64) -> Result<VerifierOutcome> {
    Verifier::new(config.clone())?.run(witness, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub outcomes: Vec<VerifierOutcome>,
    pub frequency: f64,
}

impl RunSummary {
    pub fn new(outcomes: Vec<VerifierOutcome>) -> Self {
        let accepted = outcomes.iter().filter(|o| o.accepted).count();
        let frequency = if outcomes.is_empty() {
            0.0
        } else {
            accepted as f64 / outcomes.len() as f64
        };
        Self {
            outcomes,
            frequency,
        }
    }

    /// Binomial standard error of the frequency.
    pub fn standard_error(&self) -> f64 {
        let n = self.outcomes.len().max(1) as f64;
        (self.frequency * (1.0 - self.frequency) / n).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryReport {
    pub entangled: RunSummary,
    pub product: RunSummary,
    /// Three combined standard errors, floored at one run's weight.
    pub noise: f64,
}

impl AdversaryReport {
    /// The entangled witness did not beat the product one beyond noise.
    pub fn within_noise(&self) -> bool {
        self.entangled.frequency <= self.product.frequency + self.noise
    }
}

/// Runs the same protocol on a block-entangled witness and on a product
/// witness of matching distance.
pub fn entangled_adversary_test(
    config: &VerifierConfig,
    entangled: &WitnessBlocks,
    product: &WitnessBlocks,
    runs: usize,
    seed: u64,
) -> Result<AdversaryReport> {
    if !matches!(entangled.layout(), BlockLayout::Entangled { .. }) {
        return Err(Error::InvalidArguments("expected a block-entangled witness".into()));
    }
    let verifier = Verifier::new(config.clone())?;
    let e = verifier.run_many(entangled, runs, seed)?;
    let p = verifier.run_many(product, runs, seed)?;
    let se = (e.standard_error().powi(2) + p.standard_error().powi(2)).sqrt();
    let noise = (3.0 * se).max(1.0 / runs.max(1) as f64);
    Ok(AdversaryReport {
        entangled: e,
        product: p,
        noise,
    })
}

/// Joint state of `group` blocks entangled as `sum_i c_i |b_i>^{(x) group}`.
pub fn ghz_blocks(d: usize, group: usize, branches: &[(f64, CVector)]) -> Result<CMatrix> {
    check_cap(d * group, DEFAULT_QUBIT_CAP)?;
    let dim = 1usize << d;
    let mut psi = CVector::zeros(1usize << (d * group));
    for (amp, v) in branches {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!("branch of size {}", v.len())));
        }
        let mut t = v.clone();
        for _ in 1..group {
            t = t.kronecker(v);
        }
        psi += t * linalg::re(*amp);
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidState("zero joint state".into()));
    }
    psi /= linalg::re(norm);
    Ok(&psi * psi.adjoint())
}

/// Encoded Slater state as a block vector.
pub fn encoded_slater(d: usize, occ: u64) -> CVector {
    let mut v = CVector::zeros(1usize << d);
    v[full_space_index(occ, d)] = linalg::ONE;
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityOutcome {
    pub overlap_estimate: f64,
    pub exact_overlap: f64,
    /// `sqrt(tr rho^2 tr sigma^2)`.
    pub bound: f64,
    pub pure_and_equal: bool,
}

/// Swap test between two block states: the ancilla reads 0 with probability
/// `(1 + tr(rho sigma)) / 2`. Verdict "pure and equal" iff the overlap
/// estimate is at least `1 - eps / 2`.
pub fn purity_overlap_test<R: Rng + ?Sized>(
    rho: &CMatrix,
    sigma: &CMatrix,
    shots: u64,
    eps: f64,
    rng: &mut R,
) -> Result<PurityOutcome> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch("states of different sizes".into()));
    }
    if shots == 0 {
        return Err(Error::InvalidArguments("shots must be positive".into()));
    }
    let (exact, bound) = overlap_bound(rho, sigma);
    let p0 = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let zeros = binomial(shots, p0, rng);
    let estimate = 2.0 * zeros as f64 / shots as f64 - 1.0;
    Ok(PurityOutcome {
        overlap_estimate: estimate,
        exact_overlap: exact,
        bound,
        pure_and_equal: estimate >= 1.0 - eps / 2.0,
    })
}

/// `(tr(rho sigma), sqrt(tr rho^2 tr sigma^2))`, computed directly.
pub fn overlap_bound(rho: &CMatrix, sigma: &CMatrix) -> (f64, f64) {
    let overlap = linalg::trace_product(rho, sigma).re;
    let pr = linalg::trace_product(rho, rho).re;
    let ps = linalg::trace_product(sigma, sigma).re;
    (overlap, (pr * ps).sqrt())
}

/// Sector density of `N` fermions re-read from an encoded block restricted
/// to weight `N` (the inverse of [`encode_density`] on that subspace).
pub fn decode_block(block: &CMatrix, basis: Arc<SlaterBasis>) -> Result<NSectorDensity> {
    let d = basis.d();
    let idx: Vec<usize> = basis.states().iter().map(|&o| full_space_index(o, d)).collect();
    let m = CMatrix::from_fn(idx.len(), idx.len(), |r, c| block[(idx[r], idx[c])]);
    NSectorDensity::new(basis, m)
}
