mod common;

use common::{raw_datum, rng};
use nahmcalc::assumptions::{
    check_all, check_main_assumptions, check_parabolic_sheaf_conditions,
    check_stationary_phase_conditions,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reports_are_deterministic_and_complete(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        let a = check_all(&d, 1e-9, false);
        prop_assert_eq!(&a, &check_all(&d, 1e-9, false));
        let parts = [
            check_main_assumptions(&d, 1e-9),
            check_parabolic_sheaf_conditions(&d, 1e-9),
            check_stationary_phase_conditions(&d, 1e-9),
        ];
        prop_assert_eq!(a.passes(), parts.iter().all(|p| p.passes()));
        prop_assert_eq!(a.checks.len(), parts.iter().map(|p| p.checks.len()).sum::<usize>());
        prop_assert_eq!(a.passes(), a.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn removing_a_violating_point_removes_its_failures(seed in any::<u64>()) {
        let d = raw_datum(&mut rng(seed), 4, 3);
        let report = check_all(&d, 1e-9, false);
        let failing: Vec<usize> = (0..d.log_points.len())
            .filter(|i| report.failures().any(|c| c.path.starts_with(&format!("log_points[{i}]"))))
            .collect();
        if let Some(&i) = failing.last() {
            let mut e = d.clone();
            e.log_points.remove(i);
            let after = check_all(&e, 1e-9, false);
            let prefix = format!("log_points[{i}]");
            let before_other: Vec<_> = report.failures().filter(|c| !c.path.starts_with(&prefix)).map(|c| (&c.name, &c.path)).collect();
            let after_all: Vec<_> = after.failures().map(|c| (&c.name, &c.path)).collect();
            prop_assert_eq!(before_other, after_all);
        }
    }
}
