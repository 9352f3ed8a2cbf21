use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satqkd_core::gaussian::*;
use satqkd_oracles as oracle;

/// Random mixed state: thermal modes scrambled by squeezers, phase shifts
/// and beam splitters.
fn random_state(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let v = rng.random_range(1.0..4.0);
        m[(2 * k, 2 * k)] = v;
        m[(2 * k + 1, 2 * k + 1)] = v;
    }
    for _ in 0..3 {
        for k in 0..n {
            let r: f64 = rng.random_range(-0.8..0.8);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let mut s = DMatrix::identity(2 * n, 2 * n);
            let (sn, cs) = phi.sin_cos();
            s[(2 * k, 2 * k)] = r.exp() * cs;
            s[(2 * k, 2 * k + 1)] = r.exp() * sn;
            s[(2 * k + 1, 2 * k)] = -(-r).exp() * sn;
            s[(2 * k + 1, 2 * k + 1)] = (-r).exp() * cs;
            m = &s * m * s.transpose();
        }
        for a in 0..n {
            for b in a + 1..n {
                let s = oracle::beamsplitter_matrix(n, a, b, rng.random_range(0.0..=1.0));
                m = &s * m * s.transpose();
            }
        }
    }
    m
}

#[test]
fn thermal_entropy_matches_fock_sum() {
    for x in [1.5, 3.0, 10.0, 41.0] {
        let fock = oracle::thermal_entropy_fock(x, 20_000);
        assert!((g(x).unwrap() - fock).abs() < 1e-12, "x={x}");
    }
    assert!((g(10.0).unwrap() - 3.762_211_396_014_729).abs() < 1e-14);
}

#[test]
fn conditioning_matches_pseudo_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let m = random_state(&mut rng, 3);
        let cm = CovarianceMatrix::new(m.clone()).unwrap();
        let measured = rng.random_range(0..3usize);
        let (quad, q) = if rng.random::<bool>() {
            (Quadrature::X, 0)
        } else {
            (Quadrature::P, 1)
        };
        let keep: Vec<usize> = (0..6).filter(|i| i / 2 != measured).collect();
        let reference = oracle::pinv_condition(&m, &keep, [2 * measured, 2 * measured + 1], q);
        let got = condition_on_homodyne(&cm, measured, quad).unwrap();
        assert!((got.matrix() - &reference).amax() < 1e-10 * reference.amax());
    }
}

#[test]
fn two_mode_spectrum_matches_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let m = random_state(&mut rng, 2);
        let nu = symplectic_eigenvalues(&CovarianceMatrix::new(m.clone()).unwrap()).unwrap();
        let reference = oracle::two_mode_spectrum(&m);
        for (a, b) in nu.iter().zip(reference) {
            assert!((a - b).abs() < 1e-9 * b, "{nu:?} vs {reference:?}");
        }
    }
}

#[test]
fn pure_global_state_splits_evenly() {
    let tmsv = CovarianceMatrix::tmsv(50.0);
    let cm = tmsv.direct_sum(&CovarianceMatrix::vacuum(1));
    let mixed = apply_beamsplitter(&cm, 1, 2, 0.3).unwrap();
    assert!(von_neumann_entropy(&mixed).unwrap().abs() < 1e-9);
    let a = von_neumann_entropy(&mixed.reduce(&[0]).unwrap()).unwrap();
    let rest = von_neumann_entropy(&mixed.reduce(&[1, 2]).unwrap()).unwrap();
    assert!((a - rest).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn g_is_increasing_and_concave(x in 1.0..1e6f64, dx in 1e-3..10.0f64) {
        let (a, b, c) = (g(x).unwrap(), g(x + dx).unwrap(), g(x + 2.0 * dx).unwrap());
        prop_assert!(b >= a);
        prop_assert!(a + c <= 2.0 * b + 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn beamsplitter_undone_by_reverse(seed in any::<u64>(), eta in 0.0..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cm = CovarianceMatrix::new(random_state(&mut rng, 3)).unwrap();
        let there = apply_beamsplitter(&cm, 0, 2, eta).unwrap();
        let back = apply_beamsplitter(&there, 2, 0, eta).unwrap();
        prop_assert!((back.matrix() - cm.matrix()).amax() < 1e-10 * cm.matrix().amax());
    }

    #[test]
    fn beamsplitter_keeps_state_physical(seed in any::<u64>(), eta in 0.0..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cm = CovarianceMatrix::new(random_state(&mut rng, 2)).unwrap();
        let out = apply_beamsplitter(&cm, 0, 1, eta).unwrap();
        let before: f64 = symplectic_eigenvalues(&cm).unwrap().iter().product();
        let after: f64 = symplectic_eigenvalues(&out).unwrap().iter().product();
        prop_assert!(symplectic_eigenvalues(&out).unwrap().iter().all(|&x| x >= 1.0 - 1e-9));
        prop_assert!((before - after).abs() < 1e-9 * before);
    }

    #[test]
    fn measurement_never_raises_entropy(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cm = CovarianceMatrix::new(random_state(&mut rng, 3)).unwrap();
        let rest = cm.reduce(&[1, 2]).unwrap();
        let cond = condition_on_homodyne(&cm, 0, Quadrature::X).unwrap();
        prop_assert!(von_neumann_entropy(&cond).unwrap() <= von_neumann_entropy(&rest).unwrap() + 1e-9);
    }
}
