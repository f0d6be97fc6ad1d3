mod common;

use common::{admissible, raw_datum, rng};
use nahmcalc::scalar::ComplexScalar;
use nahmcalc::stationary_phase::{
    full_transform, grr_report, involution_defect, transformed_rank, TransformOptions,
};
use nahmcalc::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn involution_on_admissible_data(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        prop_assume!(admissible(&d));
        prop_assert!(involution_defect(&d, &TransformOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn transformed_points_have_rank_r_hat(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        let Ok(t) = full_transform(&d, &TransformOptions::default()) else { return Ok(()) };
        for p in &t.datum.log_points {
            prop_assert_eq!(p.dim(), t.rank);
        }
        prop_assert_eq!(t.datum.infinity.dim(), t.rank);
        let grr = grr_report(&d, 1e-9).unwrap();
        prop_assert!(grr.passes());
        prop_assert_eq!(grr.r_hat, transformed_rank(&d, 1e-9).unwrap());
    }

    #[test]
    fn eigenvalues_are_negated(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        let Ok(t) = full_transform(&d, &TransformOptions::default()) else { return Ok(()) };
        // log point i becomes a group with leading −z_i
        for p in &d.log_points {
            let lead = -&p.position;
            let g = t.datum.infinity.groups.iter().find(|g| g.leading == lead);
            let Some(g) = g else { continue };
            let mut expected: Vec<String> = p.pieces.iter().flat_map(|x| &x.blocks)
                .filter(|b| !b.eigenvalue.is_zero())
                .map(|b| format!("{}:{}", -&b.eigenvalue, b.size))
                .collect();
            let mut actual: Vec<String> = g.pieces.iter().flat_map(|x| &x.blocks)
                .map(|b| format!("{}:{}", b.eigenvalue, b.size))
                .collect();
            expected.sort();
            actual.sort();
            prop_assert_eq!(expected, actual);
        }
    }
}

#[test]
fn strict_mode_rejects_failed_hypotheses() {
    let mut d = raw_datum(&mut rng(3), 2, 1);
    d.log_points[0].pieces[0].blocks[0].eigenvalue = ComplexScalar::int(2);
    assert!(matches!(
        full_transform(&d, &TransformOptions::default()),
        Err(Error::Hypotheses(_))
    ));
    let lenient = TransformOptions {
        best_effort: true,
        ..TransformOptions::default()
    };
    let t = full_transform(&d, &lenient).unwrap();
    assert!(!t.guaranteed);
}
