use ladder_dicke_core::{
    build_generator, closed_form_distribution, g2_zero, regression_correlator, BathParams,
    EnsembleSpec, TimeGrid, Transition,
};
use proptest::prelude::*;

fn transition(k: u8) -> Transition {
    Transition::from_label(k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn common_rate_rescales_time(
        atoms in 2usize..12,
        e1 in 0.1f64..0.9,
        e2 in 0.1f64..0.9,
        factor in 0.25f64..4.0,
        i in 1u8..=2,
        j in 1u8..=2,
    ) {
        let spec = EnsembleSpec::new(atoms).unwrap();
        let p = closed_form_distribution(&spec, e1, e2).unwrap();
        let slow = BathParams::from_eta(1.0, 0.6, e1, e2).unwrap();
        let fast = slow.scaled_gammas(factor).unwrap();
        let grid = TimeGrid::linear(0.0, 2.0, 9).unwrap();
        let stretched = TimeGrid::new(grid.taus().iter().map(|t| t * factor).collect()).unwrap();
        let (i, j) = (transition(i), transition(j));
        let a = regression_correlator(i, j, &p, &build_generator(&spec, &fast), &grid).unwrap();
        let b = regression_correlator(i, j, &p, &build_generator(&spec, &slow), &stretched).unwrap();
        for (x, y) in a.g2_values().iter().zip(b.g2_values()) {
            prop_assert!((x - y).abs() <= 1e-7 * y.abs().max(1.0));
        }
    }

    #[test]
    fn series_starts_at_static_value_and_decorrelates(
        atoms in 1usize..10,
        e1 in 0.1f64..0.9,
        e2 in 0.1f64..0.9,
        i in 1u8..=2,
        j in 1u8..=2,
    ) {
        let spec = EnsembleSpec::new(atoms).unwrap();
        let p = closed_form_distribution(&spec, e1, e2).unwrap();
        let gen = build_generator(&spec, &BathParams::unit_gamma(e1, e2).unwrap());
        let grid = TimeGrid::new(vec![0.0, 1e-3, 200.0]).unwrap();
        let (i, j) = (transition(i), transition(j));
        let s = regression_correlator(i, j, &p, &gen, &grid).unwrap();
        prop_assert_eq!(s.g2_values()[0], g2_zero(i, j, &p).unwrap());
        prop_assert!((s.g2_values()[1] - s.g2_values()[0]).abs() < 0.1 * s.g2_values()[0].max(1.0));
        prop_assert!((s.g2_values()[2] - 1.0).abs() < 1e-6);
    }
}
