use aliaslab::geometry::{tangency_enumerate, DiskPhantom, RadonFamily, SamplingScheme, TangencyDescriptor, Vec2};
use aliaslab::predictor::predict_at;
use aliaslab::special::{big_psi, psi, PsiEvalConfig};
use proptest::prelude::*;

fn cfg() -> PsiEvalConfig {
    PsiEvalConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_periodic_in_r(h in -8.0..8.0f64, a in 0.25..8.0f64, r in -2.0..2.0f64, n in -3i32..3) {
        let d = big_psi(h, a, r + n as f64, &cfg()) - big_psi(h, a, r, &cfg());
        prop_assert!(d.abs() <= 1e-8, "{}", d);
    }

    #[test]
    fn psi_periodic_in_h(h in -8.0..8.0f64, a in 0.25..8.0f64, r in -2.0..2.0f64) {
        let d = big_psi(h + a, a, r, &cfg()) - big_psi(h, a, r, &cfg());
        prop_assert!(d.abs() <= 1e-8, "{}", d);
    }

    #[test]
    fn psi_reflection(h in -8.0..8.0f64, a in 0.25..8.0f64, r in -2.0..2.0f64) {
        let d = big_psi(h, -a, -r, &cfg()) - big_psi(h, a, r, &cfg());
        prop_assert!(d.abs() <= 1e-8, "{}", d);
    }

    #[test]
    fn psi_vanishes_at_zero(a in -8.0..8.0f64, r in -2.0..2.0f64) {
        prop_assert_eq!(big_psi(0.0, a, r, &cfg()), 0.0);
    }

    #[test]
    fn psi_continuous_in_h(h in -4.0..4.0f64, a in 0.25..4.0f64, r in -1.0..1.0f64) {
        // Ψ is Hölder-1/2 in h; a 1e-8 step moves it by well under 1e-3
        let d = big_psi(h + 1e-8, a, r, &cfg()) - big_psi(h, a, r, &cfg());
        prop_assert!(d.abs() <= 1e-3, "{}", d);
    }

    #[test]
    fn small_psi_between_zero_and_peak(q in -1e3..2.0f64) {
        let v = psi(q);
        prop_assert!((0.0..=0.75).contains(&v), "{}", v);
    }

    #[test]
    fn prediction_ignores_whole_index_shifts(x in -8.0..8.0f64, y in -8.0..8.0f64, n in -5i32..5) {
        let scheme = SamplingScheme::line_half_turn(0.02, 200, 0.03);
        let phantom = DiskPhantom::new(Vec2::new(0.0, 0.0), 5.0, 1.0).unwrap();
        let descs = tangency_enumerate(&RadonFamily::Line, &phantom, Vec2::new(5.0, 7.0), &scheme.window, &scheme).unwrap();
        let shifted: Vec<TangencyDescriptor> = descs.iter().map(|d| TangencyDescriptor { k_star: d.k_star + n as f64, ..*d }).collect();
        let p = Vec2::new(x, y);
        let d = predict_at(&shifted, &scheme, p, &cfg()) - predict_at(&descs, &scheme, p, &cfg());
        prop_assert!(d.abs() <= 1e-8, "{}", d);
    }
}
