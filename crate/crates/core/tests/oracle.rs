use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dscs::numerics::hamming_weight;
use dscs::oracle::{
    brute_force_recover, extension_constant, isometry_constant, pairwise_cs_check,
    proximity_bound_check, singleton_witness, verify_cs_property, Witness, DEFAULT_CAP,
};
use dscs::simulate::{random_sparse, ValueDistribution};
use dscs::{build, CsMatrix, CsMatrixSpec, SparseVector, Tolerance, Variant};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn matrix(n: usize, t: usize, l: usize, variant: Variant) -> CsMatrix {
    build(&CsMatrixSpec::new(n, t, l, variant)).unwrap()
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn built_matrix_images_are_heavy() {
    // every 2-sparse unit-entry z on H(8, 1, 1) has an image of weight >= 3
    let m = matrix(8, 1, 1, Variant::GenericRs);
    for (i, j) in (0..8).tuple_combinations() {
        for (a, b) in [(1.0, 1.0), (1.0, -1.0)] {
            let mut z = DVector::zeros(8);
            z[i] = a;
            z[j] = b;
            assert!(hamming_weight((m.h() * z).as_slice(), &tol()) >= 3);
        }
    }
}

#[test]
fn random_dense_matrix_is_cs() {
    let h = random_matrix(4, 8, 11);
    assert!(verify_cs_property(&h, 1, 1, DEFAULT_CAP, &tol()).unwrap().verdict);
}

#[test]
fn truncated_matrices_fail_both_ways() {
    // fewer than 2(t + l) rows: the singleton witness is light and the
    // exhaustive check finds a counterexample
    for (t, l) in [(1, 1), (1, 2), (2, 1)] {
        for n in [2 * t + 2, 9] {
            let m = matrix(n, t, l, Variant::GenericRs);
            for drop in 0..m.r() {
                let h = m.h().clone().remove_row(drop);
                let (z, weight) = singleton_witness(&h, t, &tol()).unwrap();
                assert!(weight <= 2 * l, "t={t} l={l} n={n}: weight {weight}");
                assert_eq!(z.amax(), 1.0);
                let report = verify_cs_property(&h, t, l, DEFAULT_CAP, &tol()).unwrap();
                assert!(!report.verdict);
                let Some(Witness::Vector(w)) = report.witness else {
                    panic!("missing witness")
                };
                assert!(hamming_weight((&h * w).as_slice(), &tol()) <= 2 * l);
            }
        }
    }
}

#[test]
fn singleton_witness_at_the_bound() {
    for (t, l) in (1..=3).cartesian_product(0..=3) {
        let m = matrix(2 * t + 5, t, l, Variant::GenericRs);
        let (_, weight) = singleton_witness(m.h(), t, &tol()).unwrap();
        assert!(weight <= 2 * l + 1);
    }
}

#[test]
fn truncated_matrix_has_non_unique_solutions() {
    // x and x - z explain the same data up to an l-sparse error when z is the
    // singleton witness of a matrix one row short
    let (t, l) = (1, 1);
    let m = matrix(8, t, l, Variant::GenericRs);
    let h = m.h().clone().remove_row(3);
    let (z, weight) = singleton_witness(&h, t, &tol()).unwrap();
    assert!(weight <= 2 * l);
    // z = z0 e_0 + z1 e_1, split into two 1-sparse signals
    let x = SparseVector::new(8, vec![0], vec![z[0]]).unwrap();
    let y = SparseVector::new(8, vec![1], vec![-z[1]]).unwrap();
    let hz = &h * &z;
    // s = H x + e with e taking half of H z's support
    let support: Vec<usize> = (0..h.nrows()).filter(|&i| hz[i].abs() > 1e-8).collect();
    let mut s = &h * x.to_dense();
    if let Some(&i) = support.first() {
        s[i] -= hz[i];
    }
    let sols = brute_force_recover(&h, &s, t, l, DEFAULT_CAP, &tol()).unwrap();
    assert!(sols.len() >= 2, "found {} solutions", sols.len());
    assert!(sols.iter().any(|(a, _)| a.support() == x.support()));
    assert!(sols.iter().any(|(a, _)| a.support() == y.support()));
}

#[test]
fn cs_property_implies_unique_solutions() {
    let dist = ValueDistribution::default();
    for variant in [Variant::GenericRs, Variant::CyclicFourier] {
        let m = matrix(8, 1, 1, variant);
        assert!(verify_cs_property(m.h(), 1, 1, DEFAULT_CAP, &tol()).unwrap().verdict);
        for seed in 0..30 {
            let x = random_sparse(8, 1, &dist, seed).unwrap();
            let e = random_sparse(m.r(), 1, &dist, seed + 99).unwrap();
            let s = m.measure(&x, &e, None).unwrap().s_hat;
            let sols = brute_force_recover(m.h(), &s, 1, 1, DEFAULT_CAP, &tol()).unwrap();
            assert_eq!(sols.len(), 1);
            assert!(sols[0].0.approx_eq(&x, 1e-8));
            assert_eq!(sols[0].1.support(), e.support());
        }
    }
}

#[test]
fn pairwise_agrees_with_exhaustive() {
    let cases = [
        matrix(8, 1, 1, Variant::GenericRs).h().clone(),
        matrix(9, 2, 1, Variant::CyclicFourier).h().clone(),
        matrix(8, 1, 1, Variant::GenericRs).h().clone().remove_row(0),
        random_matrix(4, 7, 3),
    ];
    for (k, h) in cases.iter().enumerate() {
        let (t, l) = if k == 1 { (2, 1) } else { (1, 1) };
        let exhaustive = verify_cs_property(h, t, l, DEFAULT_CAP, &tol()).unwrap();
        let sampled = pairwise_cs_check(h, t, l, 2000, k as u64, &tol()).unwrap();
        // sampling can miss a counterexample but never invents one
        assert!(!sampled.verdict <= !exhaustive.verdict, "case {k}");
        if exhaustive.verdict {
            assert!(sampled.statistic.unwrap() >= (2 * l + 1) as f64);
        }
    }
}

#[test]
fn extension_constant_matches_grid_search() {
    let m = matrix(8, 1, 1, Variant::GenericRs);
    let lambda = extension_constant(m.h(), 2, DEFAULT_CAP).unwrap();
    let steps = 20_000;
    let mut best = f64::INFINITY;
    for (i, j) in (0..8).tuple_combinations() {
        for k in 0..steps {
            let theta = PI * k as f64 / steps as f64;
            let v = m.h().column(i) * theta.cos() + m.h().column(j) * theta.sin();
            best = best.min(v.norm());
        }
    }
    assert!(best >= lambda * (1.0 - 1e-12));
    assert!(best <= lambda * (1.0 + 1e-3), "grid {best} vs svd {lambda}");
}

#[test]
fn built_matrices_have_positive_extension() {
    for variant in [Variant::GenericRs, Variant::CyclicFourier] {
        for (t, l) in (1..=3).cartesian_product(0..=2) {
            let m = matrix(2 * t + 4, t, l, variant);
            assert!(extension_constant(m.h(), 2 * t, DEFAULT_CAP).unwrap() > 1e-12);
        }
    }
}

#[test]
fn proximity_on_built_matrices() {
    for variant in [Variant::GenericRs, Variant::CyclicFourier] {
        let m = matrix(8, 1, 0, variant);
        let report = proximity_bound_check(m.h(), 1, 1e-3, 100, 5, DEFAULT_CAP, &tol()).unwrap();
        assert!(report.verdict, "{report:?}");
        assert!(report.statistic.unwrap() <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constants_are_monotone_in_d(rows in 2usize..=7, cols in 2usize..=7, seed in any::<u64>()) {
        let h = random_matrix(rows, cols, seed);
        let mut last_lambda = f64::INFINITY;
        let mut last_delta = 0.0;
        for d in 1..=cols {
            let lambda = extension_constant(&h, d, DEFAULT_CAP).unwrap();
            let delta = isometry_constant(&h, d, DEFAULT_CAP).unwrap();
            prop_assert!(lambda <= last_lambda * (1.0 + 1e-12));
            prop_assert!(delta >= last_delta - 1e-12);
            prop_assert!(lambda >= 1.0 - delta - 4.0 * f64::EPSILON);
            last_lambda = lambda;
            last_delta = delta;
        }
    }
}
