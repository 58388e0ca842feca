use crate::chartfield::{DerivativePacket, DilatonJet, FrameJets, GeometryPacket};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::soliton::{residuals_from, SolitonParams, SolitonResidual};

use super::family::LieFamily;

/// Left-invariant geometry of `fam` at parameter `a`. The dilaton is
/// constant; `e2phi` is only needed by the residuals.
pub fn lie_geometry<F: Scalar>(fam: &LieFamily, a: &F, e2phi: Option<F>) -> Result<(GeometryPacket<F>, DerivativePacket<F>)> {
    const ORDER: usize = 3;
    let d = fam.metric.each_ref().map(F::from_rational);
    let g: [Jet<F>; 6] = [
        Jet::constant(d[0].clone(), ORDER),
        Jet::zero(ORDER),
        Jet::zero(ORDER),
        Jet::constant(d[1].clone(), ORDER),
        Jet::zero(ORDER),
        Jet::constant(d[2].clone(), ORDER),
    ];
    if let Some(psi) = &e2phi {
        if *psi <= F::zero() {
            return Err(Error::NonpositiveDilaton(psi.to_string()));
        }
    }
    let dil = DilatonJet { shifted: Jet::zero(ORDER), e2phi };
    let fj = FrameJets::new(g, Some(&fam.structure(a)), Some(dil)).map_err(|e| match e {
        Error::SingularMetric(m) => Error::DegenerateMetric(m),
        e => e,
    })?;
    Ok((fj.geometry_packet(), fj.derivative_packet()?))
}

pub fn soliton_residual<F: Scalar>(fam: &LieFamily, a: &F, e2phi: &F, params: &SolitonParams<F>) -> Result<SolitonResidual<F>> {
    let (geo, der) = lie_geometry(fam, a, Some(e2phi.clone()))?;
    residuals_from(&geo, &der, params)
}

/// `|E|^2 + |YM|^2 + D^2` for the homogeneous data `(a, e^{2 phi})`.
pub fn soliton_objective<F: Scalar>(fam: &LieFamily, a: &F, e2phi: &F, params: &SolitonParams<F>) -> Result<F> {
    Ok(soliton_residual(fam, a, e2phi, params)?.objective())
}

/// Residual components in an orthonormal frame, so that the sum of their
/// squares is [`soliton_objective`]. Diagonal metrics only.
pub fn residual_vector(fam: &LieFamily, a: f64, e2phi: f64, params: &SolitonParams<f64>) -> Result<Vec<f64>> {
    let res = soliton_residual(fam, &a, &e2phi, params)?;
    let d: Vec<f64> = fam.metric.iter().map(|x| x.to_f64()).collect();
    let mut out = Vec::with_capacity(6 + 9 + 1);
    for i in 0..3 {
        for j in i..3 {
            let w = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
            out.push(w * res.e.get(i, j) / (d[i] * d[j]).sqrt());
        }
    }
    for x in 0..3 {
        for (b, c) in [(0, 1), (0, 2), (1, 2)] {
            out.push(res.ym.get(x, b, c) / (d[x] * d[b] * d[c]).sqrt());
        }
    }
    out.push(res.d);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra3::eigen_report;
    use crate::chartfield::bianchi_defect;
    use crate::homgeo::Catalogue;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn kappa_one() -> SolitonParams<Rational> {
        SolitonParams::new(q(1)).unwrap()
    }

    #[test]
    fn abelian_is_flat() {
        let fam = Catalogue::builtin().get("abelian").unwrap().clone();
        let (geo, _) = lie_geometry(&fam, &q(3), None).unwrap();
        assert!(geo.curvature.is_zero());
    }

    #[test]
    fn hyperbolic_family_has_constant_curvature() {
        let fam = Catalogue::builtin().get("hyperbolic-solvable").unwrap().clone();
        for a in [q(1), q(2), Rational::ratio(3, 5)] {
            let (geo, der) = lie_geometry(&fam, &a, None).unwrap();
            let k = -a.clone() * a.clone();
            let g = geo.metric.form().clone();
            // Constant curvature k: R = -(k/2) g o g in the KN convention.
            let expected = crate::algebra3::kn_product(&g, &g, &geo.metric).scale(&(-k.clone() / q(2)));
            assert_eq!(geo.curvature, expected);
            assert_eq!(geo.s, q(6) * k);
            assert!(der.dstar_r.is_zero());
        }
    }

    #[test]
    fn heisenberg_ricci_eigenvalues() {
        let fam = Catalogue::builtin().get("heisenberg").unwrap().clone();
        let c = q(2);
        let (geo, _) = lie_geometry(&fam, &c, None).unwrap();
        assert_eq!(geo.ric, crate::algebra3::Sym2::diag(q(-2), q(-2), q(2)));
        assert_eq!(geo.s, q(-2));
        let eig = eigen_report(&geo.metric, &geo.ric).unwrap();
        assert!(eig.deviation_from([-2.0, -2.0, 2.0]) < 1e-12);
    }

    #[test]
    fn bianchi_holds_on_every_family() {
        for fam in Catalogue::builtin().families {
            let (_, der) = lie_geometry(&fam, &Rational::ratio(5, 3), None).unwrap();
            assert!(bianchi_defect(&der).is_zero(), "{}", fam.name);
        }
    }

    #[test]
    fn hyperbolic_soliton_residuals_vanish() {
        let fam = Catalogue::builtin().get("hyperbolic-solvable").unwrap().clone();
        let res = soliton_residual(&fam, &q(2), &q(48), &kappa_one()).unwrap();
        assert!(res.is_zero());
        let f = soliton_residual(&fam, &2.0, &48.0, &SolitonParams::new(1.0).unwrap()).unwrap();
        assert!(f.objective() < 1e-20);
    }

    #[test]
    fn abelian_objective_formula() {
        let fam = Catalogue::builtin().get("abelian").unwrap().clone();
        for t in [q(1), q(7), Rational::ratio(1, 3)] {
            let obj = soliton_objective(&fam, &q(1), &t, &kappa_one()).unwrap();
            let half = t.clone() / q(2);
            assert_eq!(obj, q(3) * half.clone() * half + t.clone() * t);
        }
    }

    #[test]
    fn residual_vector_squares_to_the_objective() {
        let fam = Catalogue::builtin().get("su2-milnor").unwrap().scaled(&Rational::ratio(3, 2)).unwrap();
        let params = SolitonParams::new(0.5).unwrap();
        let r = residual_vector(&fam, 1.3, 7.0, &params).unwrap();
        let obj = soliton_objective(&fam, &1.3, &7.0, &params).unwrap();
        let sum: f64 = r.iter().map(|x| x * x).sum();
        assert!((sum - obj).abs() < 1e-10 * obj.max(1.0));
    }

    #[test]
    fn metric_scaling_law() {
        let fam = Catalogue::builtin().get("heisenberg").unwrap().clone();
        let c2 = q(9);
        let scaled = fam.scaled(&c2).unwrap();
        let (g1, _) = lie_geometry(&fam, &q(1), None).unwrap();
        let (g2, _) = lie_geometry(&scaled, &q(1), None).unwrap();
        assert_eq!(g2.s, g1.s.clone() / c2.clone());
        let n1 = crate::algebra3::curv_norm(&g1.metric, &g1.ric, &g1.s);
        let n2 = crate::algebra3::curv_norm(&g2.metric, &g2.ric, &g2.s);
        assert_eq!(n2, n1 / (c2.clone() * c2));
    }

    #[test]
    fn nonpositive_dilaton_is_rejected() {
        let fam = Catalogue::builtin().get("abelian").unwrap().clone();
        assert!(matches!(soliton_objective(&fam, &q(1), &q(0), &kappa_one()), Err(Error::NonpositiveDilaton(_))));
    }
}
