use itertools::Itertools;
use nalgebra::DMatrix;
use proptest::prelude::*;

use dscs::format::Document;
use dscs::numerics::numerical_rank;
use dscs::oracle::{verify_cs_property, DEFAULT_CAP};
use dscs::rs_code::{EvaluationPoints, RsCode};
use dscs::sensing_matrix::singleton_bound;
use dscs::{build, CsMatrix, CsMatrixSpec, Tolerance, Variant};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

#[test]
fn example_shapes() {
    let g = build(&CsMatrixSpec::new(8, 1, 1, Variant::GenericRs)).unwrap();
    assert_eq!(g.h().shape(), (4, 8));
    let c = build(&CsMatrixSpec::new(8, 1, 1, Variant::CyclicFourier)).unwrap();
    assert_eq!(c.h().shape(), (6, 8));
}

#[test]
fn generic_rows_meet_the_bound() {
    for (t, l) in (1..=4).cartesian_product(0..=4) {
        for n in [2 * t, 2 * t + 3, 20] {
            let m = build(&CsMatrixSpec::new(n, t, l, Variant::GenericRs)).unwrap();
            assert_eq!(m.r(), singleton_bound(t, l));
            assert_eq!(m.inner_rows(), 2 * t);
        }
    }
}

#[test]
fn inner_columns_independent() {
    // any 2t columns of the inner check are independent
    for variant in [Variant::GenericRs, Variant::CyclicFourier] {
        for t in 1..=3 {
            for n in 2 * t + 1..=12 {
                let m = build(&CsMatrixSpec::new(n, t, 1, variant)).unwrap();
                for cols in (0..n).combinations(2 * t) {
                    let sub = columns(m.inner(), &cols);
                    assert_eq!(numerical_rank(&sub, &tol()), 2 * t, "{variant} n={n} {cols:?}");
                }
            }
        }
    }
}

#[test]
fn outer_generator_has_distance_2l_plus_1() {
    // distance >= 2l + 1 iff every r - 2l columns of G span its row space
    for variant in [Variant::GenericRs, Variant::CyclicFourier] {
        for (t, l) in (1..=2).cartesian_product(1..=3) {
            let m = build(&CsMatrixSpec::new(12, t, l, variant)).unwrap();
            let g = m.outer_generator();
            let k = g.nrows();
            for cols in (0..m.r()).combinations(m.r() - 2 * l) {
                assert_eq!(numerical_rank(&columns(g, &cols), &tol()), k, "{variant} t={t} l={l}");
            }
        }
    }
}

#[test]
fn both_variants_are_cs_matrices() {
    for variant in [Variant::GenericRs, Variant::CyclicFourier] {
        for (t, l) in (1..=2).cartesian_product(1..=2) {
            for n in 2 * t + 1..=12 {
                let m = build(&CsMatrixSpec::new(n, t, l, variant)).unwrap();
                let report = verify_cs_property(m.h(), t, l, DEFAULT_CAP, &tol()).unwrap();
                assert!(report.verdict, "{variant} n={n} t={t} l={l}: {report:?}");
            }
        }
    }
}

#[test]
fn explicit_points_are_used() {
    let inner = vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25];
    let spec = CsMatrixSpec::new(6, 1, 1, Variant::GenericRs).with_inner_points(inner.clone());
    let m = build(&spec).unwrap();
    assert_eq!(m.inner().row(1).iter().copied().collect_vec(), inner);
    assert!(verify_cs_property(m.h(), 1, 1, DEFAULT_CAP, &tol()).unwrap().verdict);
}

#[test]
fn outer_code_matches_rs_code() {
    // the generic outer generator spans the same space as the RS generator
    let m = build(&CsMatrixSpec::new(10, 2, 2, Variant::GenericRs)).unwrap();
    let b = m.spec().outer_points.clone().unwrap();
    let rs = RsCode::new(EvaluationPoints::generic(b).unwrap(), 4).unwrap();
    let stacked = DMatrix::from_fn(8, 8, |i, j| {
        if i < 4 {
            rs.generator_matrix()[(i, j)]
        } else {
            m.outer_generator()[(i - 4, j)]
        }
    });
    assert_eq!(numerical_rank(&stacked, &tol()), 4);
}

fn round_trip(m: &CsMatrix) -> CsMatrix {
    CsMatrix::from_document(&Document::parse(&m.to_document().render()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn serialization_round_trips_bit_exactly(
        t in 1usize..=3,
        l in 0usize..=3,
        extra in 1usize..=12,
        cyclic in any::<bool>(),
    ) {
        let variant = if cyclic { Variant::CyclicFourier } else { Variant::GenericRs };
        let m = build(&CsMatrixSpec::new(2 * t + extra, t, l, variant)).unwrap();
        let back = round_trip(&m);
        prop_assert_eq!(back.h(), m.h());
        prop_assert_eq!(back.inner(), m.inner());
        prop_assert_eq!(back.outer_generator(), m.outer_generator());
        prop_assert_eq!(back.spec(), m.spec());
    }

    #[test]
    fn systematic_prefix_of_every_codeword(
        t in 1usize..=3,
        l in 0usize..=3,
        u in proptest::collection::vec(-10.0f64..10.0, 7),
        cyclic in any::<bool>(),
    ) {
        let variant = if cyclic { Variant::CyclicFourier } else { Variant::GenericRs };
        let m = build(&CsMatrixSpec::new(2 * t + 4, t, l, variant)).unwrap();
        let k = m.inner_rows();
        let u = nalgebra::DVector::from_column_slice(&u[..k]);
        let c = m.outer_generator().tr_mul(&u);
        prop_assert_eq!(c.rows(0, k).into_owned(), u);
    }
}
