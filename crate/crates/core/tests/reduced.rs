use std::sync::Arc;

use nrep_core::duality::inner_ball_certificate;
use nrep_core::fock::{build_basis, NSectorDensity, SlaterBasis};
use nrep_core::linalg::{self, CMatrix};
use nrep_core::oracle::{
    contraction_expectations, decide, project_onto_k, separating_hyperplane, ProjectionOptions,
    Projector, RepresentabilityInstance, VerdictKind,
};
use nrep_core::rdm::{
    expectation_vector, observable_basis, rdm_from_alpha, trace_out_particle, two_rdm,
    ExpectationVector, TwoRDM,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sector(d: usize, n: usize) -> Arc<SlaterBasis> {
    Arc::new(build_basis(d, n).unwrap())
}

fn random_sigma(d: usize, n: usize, seed: u64) -> NSectorDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = sector(d, n);
    let rank = rng.random_range(1..=basis.len());
    NSectorDensity::random(basis, rank, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_rdm_is_linear(d in 4usize..=6, n in 2usize..=3, s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0..=1.0f64) {
        let (a, b) = (random_sigma(d, n, s1), random_sigma(d, n, s2));
        let mix = NSectorDensity::mixture(&[(p, &a), (1.0 - p, &b)]).unwrap();
        let lhs = two_rdm(&mix).unwrap();
        let rhs = two_rdm(&a).unwrap().matrix() * linalg::re(p) + two_rdm(&b).unwrap().matrix() * linalg::re(1.0 - p);
        prop_assert!(max_abs(&(lhs.matrix() - rhs)) <= 1e-12);
    }

    #[test]
    fn pair_sector_reduction_is_identity(d in 3usize..=6, seed in any::<u64>()) {
        let sigma = random_sigma(d, 2, seed);
        prop_assert!(max_abs(&(two_rdm(&sigma).unwrap().matrix() - sigma.matrix())) == 0.0);
    }

    #[test]
    fn coordinates_round_trip(d in 3usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = observable_basis(d).unwrap();
        let alpha: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ev = ExpectationVector::new(d, 2, alpha.clone()).unwrap();
        let back = basis.coordinates(&rdm_from_alpha(&ev));
        for (x, y) in alpha.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-12);
        }

        let m = basis.pair_dim();
        let h = linalg::random_hermitian(m, 1.0, &mut rng);
        let h = &h + CMatrix::identity(m, m) * linalg::re((1.0 - linalg::trace(&h).re) / m as f64);
        let ev = ExpectationVector::new(d, 2, basis.coordinates(&h)).unwrap();
        prop_assert!(max_abs(&(rdm_from_alpha(&ev) - &h)) <= 1e-12);
    }

    #[test]
    fn fewer_particles_reach_the_same_point(d in 5usize..=7, seed in any::<u64>()) {
        let n = 3 + (seed as usize) % (d - 4);
        let sigma = random_sigma(d, n, seed);
        let smaller = trace_out_particle(&sigma).unwrap();
        prop_assert_eq!(smaller.n(), n - 1);
        let a = contraction_expectations(&sigma).unwrap();
        let b = contraction_expectations(&smaller).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn coordinates_are_bounded(d in 3usize..=7, seed in any::<u64>()) {
        let n = 2 + (seed as usize) % (d - 1);
        let alpha = contraction_expectations(&random_sigma(d, n, seed)).unwrap();
        prop_assert!(alpha.values().iter().all(|x| x.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn mixtures_of_states_are_accepted(d in 4usize..=6, n in 2usize..=3, s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0..=1.0f64) {
        let (a, b) = (random_sigma(d, n, s1), random_sigma(d, n, s2));
        let ra = two_rdm(&a).unwrap();
        let rb = two_rdm(&b).unwrap();
        let mixed = ra.matrix() * linalg::re(p) + rb.matrix() * linalg::re(1.0 - p);
        let inst = RepresentabilityInstance::new(TwoRDM::new(d, n, mixed).unwrap(), 0.1).unwrap();
        let projector = Projector::new(d, n).unwrap();
        let verdict = decide(&projector, &inst, &ProjectionOptions::default()).unwrap();
        prop_assert_eq!(verdict.kind, VerdictKind::Yes);
    }
}

#[test]
fn expectation_vector_matches_contraction() {
    for (d, n) in [(4, 2), (5, 3), (6, 4)] {
        let sigma = random_sigma(d, n, 1);
        let a = expectation_vector(&two_rdm(&sigma).unwrap()).unwrap();
        let b = contraction_expectations(&sigma).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn distance_grows_with_particle_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let d = 6;
    for _ in 0..6 {
        let basis = observable_basis(d).unwrap();
        let m = basis.pair_dim();
        let h = linalg::random_hermitian(m, 0.3, &mut rng);
        let h = &h + CMatrix::identity(m, m) * linalg::re((1.0 - linalg::trace(&h).re) / m as f64);
        let coords = basis.coordinates(&h);
        let mut last_lower: f64 = 0.0;
        for n in 2..=4 {
            let alpha = ExpectationVector::new(d, n, coords.clone()).unwrap();
            let res = project_onto_k(&alpha, 1e-5, 20_000).unwrap();
            // dist(K_n) >= dist(K_{n-1}) up to the certified brackets
            assert!(res.distance >= last_lower - 1e-9, "n={n}: {} < {last_lower}", res.distance);
            last_lower = res.lower_bound;
        }
    }
}

#[test]
fn frank_wolfe_gap_log_is_non_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let projector = Projector::new(5, 3).unwrap();
    let m = projector.observables().pair_dim();
    let h = linalg::random_hermitian(m, 0.4, &mut rng);
    let h = &h + CMatrix::identity(m, m) * linalg::re((1.0 - linalg::trace(&h).re) / m as f64);
    // tight enough that the budget, not the tolerance, ends the run
    let opts = ProjectionOptions {
        tol: 1e-9,
        max_iter: 2000,
        log_stride: 10,
        ..ProjectionOptions::default()
    };
    let res = projector.frank_wolfe(&h, &opts, None).unwrap();
    assert!(res.gap_log.len() > 2);
    assert!(res.gap_log.windows(2).all(|w| w[1].1 <= w[0].1));
    assert!(res.lower_bound <= res.distance);
}

#[test]
fn hyperplanes_separate_all_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (d, n) = (5, 3);
    let projector = Projector::new(d, n).unwrap();
    let basis = observable_basis(d).unwrap();
    let outside: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target = ExpectationVector::new(d, n, outside).unwrap();
    let cut = separating_hyperplane(&projector, &target, &ProjectionOptions::default()).unwrap();
    assert!(cut.margin > 0.0);
    for seed in 0..200 {
        let alpha = contraction_expectations(&random_sigma(d, n, seed)).unwrap();
        assert!(cut.evaluate(alpha.values()) <= 1e-9);
    }
}

#[test]
fn mixed_point_has_inner_ball_in_every_sector() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for d in [5, 6] {
        let r = inner_ball_certificate(d).unwrap();
        let basis = observable_basis(d).unwrap();
        for n in 2..=d - 2 {
            let mixed = contraction_expectations(&NSectorDensity::maximally_mixed(sector(d, n))).unwrap();
            for _ in 0..5 {
                let v: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let point: Vec<f64> = mixed.values().iter().zip(&v).map(|(c, x)| c + r * x / norm).collect();
                let alpha = ExpectationVector::new(d, n, point).unwrap();
                let res = project_onto_k(&alpha, 1e-6, 20_000).unwrap();
                assert!(res.lower_bound <= 1e-9, "d={d} n={n}: certified distance {}", res.lower_bound);
                assert!(res.distance <= 1e-5, "d={d} n={n}: distance {}", res.distance);
            }
        }
    }
}
