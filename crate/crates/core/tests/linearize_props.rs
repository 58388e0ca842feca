//! Linearised curvature, the Einstein-deformation operator and the gauge pairing.

use hetsol_core::chartfield::{ChartGeometry, Dilaton, FieldExpr};
use hetsol_core::linearize::{
    einstein_def_residual, essential_chain, lin_curv_general, scalar_trace_defect, torus_pairing_exact, Deformation,
    DeformationData, TtBasis, VectorField,
};
use hetsol_core::sample;
use hetsol_core::soliton::SolitonParams;
use hetsol_core::{Rational, Scalar};
use proptest::prelude::*;

fn ball() -> ChartGeometry {
    ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// On an Einstein background the linearised `|R|^2` is `(s/6) ds(h)`.
    #[test]
    fn norm_linearisation_on_the_ball(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let h = sample::poly_sym2_field(&mut rng, 2);
        let p = sample::ball_point(&mut rng);
        let d = DeformationData::<Rational>::new(&ball(), &h, &p).unwrap();
        let lin = d.linear_curvature();
        let (_, norm) = lin_curv_general(&d, &lin);
        prop_assert_eq!(norm, d.geo.s.clone() * lin.s.clone() / Rational::from_i64(6));
    }

    #[test]
    fn scalar_variation_is_the_trace_of_the_ricci_variation(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let chart = sample::polynomial_chart(&mut rng);
        let h = sample::poly_sym2_field(&mut rng, 2);
        let p = sample::ball_point(&mut rng);
        let d = DeformationData::<Rational>::new(&chart, &h, &p).unwrap();
        prop_assert_eq!(scalar_trace_defect(&d, &d.linear_curvature()), Rational::from_i64(0));
    }

    #[test]
    fn tt_deformations_reduce_on_constant_curvature(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let p = sample::ball_point(&mut rng);
        let h = TtBasis::new(&ball(), &p).unwrap().random(&mut rng).unwrap();
        let rep = einstein_def_residual::<Rational>(&ball(), &h, &p, 0.0).unwrap();
        prop_assert!(rep.constant_curvature_defect.is_zero());
        prop_assert!(rep.r0_defect.is_zero());
        prop_assert!(rep.reduction_defect.is_zero());
    }

    #[test]
    fn gauge_pairing_is_exact(seed in any::<u64>(), nodes in 5u32..=6) {
        let mut rng = sample::rng(seed);
        let g = sample::metric(&mut rng).form().0.clone();
        let torus = ChartGeometry::flat_torus(g, Dilaton::Phi(FieldExpr::Trig(sample::trig_poly(&mut rng, 2, 3)))).unwrap();
        let v = VectorField(std::array::from_fn(|_| FieldExpr::Trig(sample::trig_poly(&mut rng, 2, 3))));
        let def = Deformation { h: sample::trig_sym2_field(&mut rng, 2, 3), xi: FieldExpr::Trig(sample::trig_poly(&mut rng, 2, 3)) };
        let rep = torus_pairing_exact(&torus, &v, &def, nodes).unwrap();
        prop_assert_eq!(rep.defect, Rational::from_i64(0));
    }

    #[test]
    fn chain_coefficients_scale_as_inverse_powers(n in 1i64..=50, m in 1i64..=20) {
        let k = Rational::ratio(n, m);
        let ch = essential_chain(&SolitonParams::new(k.clone()).unwrap(), 0.0).unwrap();
        prop_assert!(ch.passed());
        for c in &ch.coefficients {
            let scaled = (0..c.kappa_power).fold(c.value.clone(), |acc, _| acc * k.clone());
            prop_assert_eq!(scaled, Rational::from_i64(c.numerator));
        }
    }
}
