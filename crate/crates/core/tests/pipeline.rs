use std::sync::Arc;

use nrep_core::ellipsoid::{
    decompose_objective, ground_energy_via_oracle, minimize_over_k, volume_decrease_bound,
    EllipsoidConfig,
};
use nrep_core::fock::{build_basis, ground_energy_exact, FermionOperator, Ladder, NSectorDensity, NSectorState};
use nrep_core::hamiltonians::parse_spin_hamiltonian;
use nrep_core::linalg::{self, c, CMatrix};
use nrep_core::oracle::{is_representable, RepresentabilityInstance, VerdictKind};
use nrep_core::rdm::{observable_basis, rdm_from_alpha, two_rdm, TwoRDM};
use nrep_core::verifier::{
    encode_density, encoded_slater, entangled_adversary_test, ghz_blocks, honest_witness,
    measure_particle_number, observable_schedule, purity_overlap_test, sample_observable,
    weight_distribution, GadgetObservable, Verifier, VerifierConfig, WitnessBlocks,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian_two_body(d: usize, rng: &mut ChaCha8Rng) -> FermionOperator {
    let mut op = FermionOperator::zero(d);
    for _ in 0..6 {
        let (i, j) = (rng.random_range(0..d), rng.random_range(0..d));
        let hop = FermionOperator::from_product(
            d,
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            &[Ladder::create(i), Ladder::annihilate(j)],
        )
        .unwrap();
        op = &op + &(&hop + &hop.adjoint());
        let (k, l) = (rng.random_range(0..d), rng.random_range(0..d));
        let pair = FermionOperator::from_product(
            d,
            c(rng.random_range(-1.0..1.0), 0.0),
            &[Ladder::create(i), Ladder::create(k), Ladder::annihilate(l), Ladder::annihilate(j)],
        )
        .unwrap();
        op = &op + &(&pair + &pair.adjoint());
    }
    op
}

#[test]
fn ellipsoid_brackets_the_sector_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (d, n) in [(4, 2), (4, 3), (5, 2), (5, 3)] {
        let op = random_hermitian_two_body(d, &mut rng);
        let basis = Arc::new(build_basis(d, n).unwrap());
        let (exact, _) = ground_energy_exact(&op, &basis).unwrap();
        let obj = decompose_objective(&op, &observable_basis(d).unwrap(), n).unwrap();
        let res = minimize_over_k(&obj, &EllipsoidConfig { trace_stride: 1, ..EllipsoidConfig::default() }).unwrap();
        assert!(res.converged, "d={d} n={n}");
        // the best point is an actual state, so it cannot beat the minimum
        assert!(res.value >= exact - 1e-9, "d={d} n={n}: {} < {exact}", res.value);
        assert!(res.lower_bound <= exact + 1e-9);
        assert!(res.value - exact <= res.eps);
        let witness_energy = res.witness.expectation(&op).unwrap().re;
        assert!((witness_energy - res.value).abs() <= 1e-8);

        let drop = volume_decrease_bound(obj.gamma.len());
        assert!(res.trace.windows(2).all(|w| w[1].volume_log - w[0].volume_log <= drop + 1e-12));
        assert!(res.trace.windows(2).all(|w| w[1].best_value <= w[0].best_value));

        let rho = TwoRDM::new(d, n, rdm_from_alpha(&res.argmin)).unwrap();
        let verdict = is_representable(&RepresentabilityInstance::new(rho, 0.05).unwrap()).unwrap();
        assert_eq!(verdict.kind, VerdictKind::Yes);
    }
}

#[test]
fn transverse_ising_pair_via_oracle() {
    let h = parse_spin_hamiltonian("qubits=2\n-1 ZZ\n-1 XI\n").unwrap();
    let res = ground_energy_via_oracle(&h, &EllipsoidConfig::default()).unwrap();
    let eps = 1e-2 * res.objective.one_norm();
    assert!((res.value + 2f64.sqrt()).abs() <= eps);
    assert!(res.result.lower_bound <= -2f64.sqrt() + 1e-9);
}

#[test]
fn single_qubit_is_padded() {
    let h = parse_spin_hamiltonian("qubits=1\n0.5 X\n-0.25 Z\n").unwrap();
    let res = ground_energy_via_oracle(&h, &EllipsoidConfig::default()).unwrap();
    let exact = h.ground_energy();
    assert!((res.value - exact).abs() <= 1e-2 * res.objective.one_norm());
}

#[test]
fn gadget_estimates_are_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let shots = 100_000;
    for k in 0..20 {
        let dim = 2 + k % 7;
        let op = linalg::random_hermitian(dim, 1.0, &mut rng);
        let state = linalg::random_density(dim, 1 + k % dim, &mut rng);
        let g = GadgetObservable::new(&op).unwrap();
        let exact = linalg::trace_product(&op, &state).re;
        assert!((g.exact(&state) - exact).abs() < 1e-12);
        let est = sample_observable(&state, &g, shots, &mut rng).unwrap();
        let se = g.range() * 0.5 / (shots as f64).sqrt();
        assert!((est - exact).abs() <= 4.0 * se, "k={k}: {est} vs {exact}");
    }
}

#[test]
fn number_projection_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let block = linalg::random_density(16, 3, &mut rng);
        let probs = weight_distribution(&block);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let (n, _, post) = measure_particle_number(&block, &mut rng);
        let again = weight_distribution(&post);
        assert!((again[n] - 1.0).abs() <= 1e-12);
        let (n2, p2, post2) = measure_particle_number(&post, &mut rng);
        assert_eq!(n2, n);
        assert!((p2 - 1.0).abs() <= 1e-12);
        assert!((post2 - &post).iter().all(|z| z.norm() <= 1e-12));
    }
}

#[test]
fn honest_blocks_have_fixed_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let basis = Arc::new(build_basis(5, 3).unwrap());
    let sigma = NSectorDensity::random(basis, 4, &mut rng);
    let w = honest_witness(&sigma, 3).unwrap();
    for b in 0..3 {
        let probs = weight_distribution(&w.marginal(b));
        assert!((probs[3] - 1.0).abs() <= 1e-12);
    }
    // every schedule observable reproduces a coordinate of the 2-RDM
    let enc = encode_density(&sigma);
    let rho = two_rdm(&sigma).unwrap();
    let alpha = nrep_core::rdm::expectation_vector(&rho).unwrap();
    for (o, a) in observable_schedule(5, 3).unwrap().iter().zip(alpha.values()) {
        assert!((o.exact(&enc) - a).abs() <= 1e-12);
    }
}

fn slater(d: usize, n: usize, occ: u64) -> NSectorDensity {
    let basis = Arc::new(build_basis(d, n).unwrap());
    NSectorDensity::from_state(&NSectorState::slater(basis, occ).unwrap())
}

#[test]
fn entangled_witnesses_gain_nothing() {
    let (good, bad) = (0b0011u64, 0b1100u64);
    let rho = two_rdm(&slater(4, 2, good)).unwrap();
    // a 5% admixture sits right at the threshold, so both get partly accepted
    let config = VerifierConfig::new(rho, 0.4, 20_000, 0.05).unwrap();
    let blocks = Verifier::new(config.clone()).unwrap().observable_count();

    // GHZ over 2 blocks with the marginals of a 95/5 mixture
    let branches = [(0.95f64.sqrt(), encoded_slater(4, good)), (0.05f64.sqrt(), encoded_slater(4, bad))];
    let joint = ghz_blocks(4, 2, &branches).unwrap();
    let ent = WitnessBlocks::entangled(4, 2, joint, blocks.div_ceil(2)).unwrap();
    let mixture = NSectorDensity::mixture(&[(0.95, &slater(4, 2, good)), (0.05, &slater(4, 2, bad))]).unwrap();
    let marginal = ent.marginal(0);
    assert!((marginal - encode_density(&mixture)).iter().all(|z| z.norm() <= 1e-12));

    let product = honest_witness(&mixture, blocks).unwrap();
    let report = entangled_adversary_test(&config, &ent, &product, 60, 5).unwrap();
    assert!(report.product.frequency > 0.0 && report.product.frequency < 1.0);
    assert!(report.within_noise(), "{report:?}");
    assert!((report.entangled.frequency - report.product.frequency).abs() <= report.noise);
}

#[test]
fn swap_test_overlaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let psi = linalg::random_unit_vector(4, &mut rng);
    let pure = &psi * psi.adjoint();
    let same = purity_overlap_test(&pure, &pure, 20_000, 0.1, &mut rng).unwrap();
    assert!((same.exact_overlap - 1.0).abs() <= 1e-12);
    assert!(same.pure_and_equal);

    let half = CMatrix::from_fn(4, 4, |r, c| if r == c && r < 2 { linalg::re(0.5) } else { linalg::ZERO });
    let other = linalg::random_density(4, 2, &mut rng);
    let out = purity_overlap_test(&half, &other, 20_000, 0.1, &mut rng).unwrap();
    assert!(out.exact_overlap <= out.bound + 1e-12);
    assert!(out.overlap_estimate <= 0.5 + 4.0 / (20_000f64).sqrt());
    assert!(!out.pure_and_equal);
}
