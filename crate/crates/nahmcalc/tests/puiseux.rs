mod common;

use common::{admissible, raw_datum, rng};
use nahmcalc::puiseux::{
    branch_count_at, branch_residual, char_poly, inverse_branches, inversion_defect,
    puiseux_branches, LocalHiggsField,
};
use nahmcalc::scalar::ComplexScalar;
use nahmcalc::stationary_phase::transformed_rank;
use nahmcalc::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn model() -> impl Strategy<Value = (usize, ComplexScalar, ComplexScalar)> {
    (
        1usize..=3,
        0.5f64..2.5,
        -1.0f64..1.0,
        0.4f64..1.2,
        -0.5f64..0.5,
    )
        .prop_map(|(r, lr, li, ar, ai)| {
            (
                r,
                ComplexScalar::float(lr, li),
                ComplexScalar::float(ar, ai),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn branches_solve_the_curve((r, lambda, a) in model()) {
        let poly = char_poly(&LocalHiggsField::jordan_model(lambda.clone(), r, a, 16).unwrap()).unwrap();
        let branches = puiseux_branches(&poly, &ComplexScalar::zero(), 8).unwrap();
        prop_assert_eq!(branches.len() as u32, poly.degree());
        for b in &branches {
            prop_assert_eq!(b.ramification as usize, r);
            prop_assert!((b.indexed_coefficient(-(r as i64)) - lambda.to_c64()).norm() < 1e-6);
            prop_assert!(branch_residual(&poly, b, Complex64::new(0.05, 0.02)) < 1e-8);
        }
    }

    #[test]
    fn inversion_is_a_right_inverse((r, lambda, a) in model()) {
        let poly = char_poly(&LocalHiggsField::jordan_model(lambda.clone(), r, a, 16).unwrap()).unwrap();
        let branches = puiseux_branches(&poly, &ComplexScalar::zero(), 8).unwrap();
        for (forward, inverse) in inverse_branches(&branches, 8).unwrap() {
            prop_assert!(inversion_defect(&forward, &inverse, 1e-2) < 1e-6);
            prop_assert!((inverse.indexed_coefficient(r as i64) - lambda.to_c64()).norm() < 1e-6);
        }
    }

    #[test]
    fn branch_count_matches_rank(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        prop_assume!(admissible(&d));
        let count = branch_count_at(&d, &ComplexScalar::float(40.0, 10.0), 1e-9).unwrap();
        prop_assert_eq!(count, transformed_rank(&d, 1e-9).unwrap());
    }
}

#[test]
fn rank_drop_at_zero_eigenvalue() {
    let f =
        LocalHiggsField::jordan_model(ComplexScalar::zero(), 2, ComplexScalar::float(0.7, 0.3), 16)
            .unwrap();
    let branches = puiseux_branches(&char_poly(&f).unwrap(), &ComplexScalar::zero(), 8).unwrap();
    let count: u32 = inverse_branches(&branches, 8)
        .unwrap()
        .iter()
        .map(|(_, inv)| inv.ramification)
        .sum();
    assert_eq!(count, 1);
}

#[test]
fn depth_beyond_precision_is_inconclusive() {
    let f =
        LocalHiggsField::jordan_model(ComplexScalar::int(1), 2, ComplexScalar::int(1), 3).unwrap();
    let poly = char_poly(&f).unwrap();
    assert!(matches!(
        puiseux_branches(&poly, &ComplexScalar::zero(), 8),
        Err(Error::Inconclusive(_))
    ));
}
