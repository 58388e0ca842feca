//! Differential identities and the two soliton formulations on random charts.

use hetsol_core::algebra3::ricci_contract;
use hetsol_core::chartfield::{bianchi_defect, packets, ChartGeometry, Point};
use hetsol_core::sample::{self, SuiteRng};
use hetsol_core::soliton::{
    formulation_defects, residuals_from, residuals_v2_from, scalar_identity_from, ym_trace_defect_from, SolitonParams,
};
use hetsol_core::{Rational, Scalar};
use proptest::prelude::*;

fn chart_and_point(seed: u64, rational_function: bool) -> (SuiteRng, ChartGeometry, Point) {
    let mut rng = sample::rng(seed);
    let chart = if rational_function { sample::rational_function_chart(&mut rng) } else { sample::polynomial_chart(&mut rng) };
    let p = sample::ball_point(&mut rng);
    (rng, chart, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn packet_identities_are_exact(seed in any::<u64>(), rf in any::<bool>()) {
        let (_, chart, p) = chart_and_point(seed, rf);
        let (geo, der) = packets::<Rational>(&chart, &p).unwrap();
        prop_assert!(bianchi_defect(&der).is_zero());
        prop_assert_eq!(der.delta_dphi.clone() + geo.metric.trace(&der.hess_phi), Rational::from_i64(0));
        let (ric, s) = ricci_contract(&geo.curvature, &geo.metric);
        prop_assert_eq!(ric, geo.ric.clone());
        prop_assert_eq!(s, geo.s.clone());
        prop_assert!(ym_trace_defect_from(&geo, &der).is_zero());
    }

    #[test]
    fn formulations_agree_off_shell(seed in any::<u64>()) {
        let (mut rng, chart, p) = chart_and_point(seed, true);
        let params = SolitonParams::new(sample::kappa(&mut rng)).unwrap();
        let (geo, der) = packets::<Rational>(&chart, &p).unwrap();
        let v1 = residuals_from(&geo, &der, &params).unwrap();
        let v2 = residuals_v2_from(&geo, &der, &params).unwrap();
        let d = formulation_defects(&geo, &v1, &v2);
        prop_assert!(d.is_zero());
        prop_assert_eq!(scalar_identity_from(&geo, &der, &params).unwrap(), Rational::from_i64(0));
    }

    #[test]
    fn float_packets_follow_exact_ones(seed in any::<u64>()) {
        let (_, chart, p) = chart_and_point(seed, false);
        let (exact, _) = packets::<Rational>(&chart, &p).unwrap();
        let (float, fder) = packets::<f64>(&chart, &p).unwrap();
        let scale = exact.ric.max_abs().max(1.0);
        prop_assert!((exact.s.to_f64() - float.s).abs() <= 1e-10 * scale);
        prop_assert!(bianchi_defect(&fder).max_abs() <= 1e-9 * scale);
    }
}
