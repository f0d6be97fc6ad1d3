mod common;

use common::{raw_datum, rng};
use nahmcalc::json::{data_from_json, data_to_json, report_render};
use nahmcalc::singularity_data::{direct_sum, graded_dimensions, parabolic_degree, validate};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        prop_assert!(validate(&d, 1e-9).is_valid());
        let text = report_render(&data_to_json(&d));
        let back = data_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn graded_dimensions_sum_to_rank(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        for p in &d.log_points {
            prop_assert_eq!(graded_dimensions(&p.pieces).values().sum::<usize>(), d.rank);
        }
        for g in &d.infinity.groups {
            prop_assert_eq!(graded_dimensions(&g.pieces).values().sum::<usize>(), g.multiplicity());
        }
    }

    #[test]
    fn parabolic_degree_additive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = raw_datum(&mut r, 3, 2);
        let mut b = raw_datum(&mut r, 3, 2);
        // same marked points, disjoint irregular groups
        b.log_points.truncate(a.log_points.len());
        while b.log_points.len() < a.log_points.len() {
            b.log_points.push(b.log_points[0].clone());
        }
        for (pb, pa) in b.log_points.iter_mut().zip(&a.log_points) {
            pb.position = pa.position.clone();
        }
        for (k, g) in b.infinity.groups.iter_mut().enumerate() {
            g.leading = nahmcalc::ComplexScalar::int(100 + k as i64);
        }
        let sum = direct_sum(&a, &b).unwrap();
        prop_assert!(validate(&sum, 1e-9).is_valid());
        prop_assert_eq!(
            parabolic_degree(&sum).unwrap(),
            parabolic_degree(&a).unwrap() + parabolic_degree(&b).unwrap()
        );
    }
}

#[test]
fn violations_carry_paths() {
    let mut d = raw_datum(&mut rng(1), 3, 2);
    d.rank += 1;
    let report = validate(&d, 1e-9);
    assert!(report.violations.iter().any(|v| v.path == "log_points[0]"));
    assert!(report.violations.iter().any(|v| v.path == "infinity"));
}
