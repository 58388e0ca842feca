use serde::Serialize;

use crate::algebra3::{curv_norm, curv_square, kn_product, riemann_from_ricci, Sym2, Tensor3, Vec3};
use crate::chartfield::{packets, ChartGeometry, DerivativePacket, GeometryPacket, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coupling constant of the system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolitonParams<F> {
    pub kappa: F,
}

impl<F: Scalar> SolitonParams<F> {
    pub fn new(kappa: F) -> Result<Self> {
        if kappa.is_zero() {
            return Err(Error::InvalidKappa);
        }
        Ok(SolitonParams { kappa })
    }
}

/// The three residuals of the system at a point, with their norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolitonResidual<F> {
    /// Einstein equation residual.
    pub e: Sym2<F>,
    /// Yang–Mills residual, antisymmetric in its last two slots.
    pub ym: Tensor3<F>,
    /// Dilaton equation residual.
    pub d: F,
    /// `E_ab E^ab`.
    pub e_norm_sq: F,
    /// `(1/2) YM_abc YM^abc`.
    pub ym_norm_sq: F,
    pub d_sq: F,
}

impl<F: Scalar> SolitonResidual<F> {
    fn assemble(geo: &GeometryPacket<F>, e: Sym2<F>, ym: Tensor3<F>, d: F) -> Self {
        let e_norm_sq = geo.metric.norm_sq_sym(&e);
        let ym_norm_sq = ym.norm_sq_one_two_form(&geo.metric);
        let d_sq = d.square();
        SolitonResidual { e, ym, d, e_norm_sq, ym_norm_sq, d_sq }
    }

    /// `|E|^2 + |YM|^2 + D^2`.
    pub fn objective(&self) -> F {
        self.e_norm_sq.clone() + self.ym_norm_sq.clone() + self.d_sq.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.e.is_zero() && self.ym.is_zero() && self.d.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.e.max_abs().max(self.ym.max_abs()).max(self.d.magnitude())
    }
}

/// `YM = d*R + R(dphi)`.
pub fn yang_mills<F: Scalar>(geo: &GeometryPacket<F>, der: &DerivativePacket<F>) -> Tensor3<F> {
    der.dstar_r.add(&geo.curvature.contract_first(&der.dphi))
}

/// Residuals in the original form.
pub fn residuals_from<F: Scalar>(
    geo: &GeometryPacket<F>,
    der: &DerivativePacket<F>,
    params: &SolitonParams<F>,
) -> Result<SolitonResidual<F>> {
    let psi = der.e2phi()?;
    let g = &geo.metric;
    let k = &params.kappa;
    let e = geo.ric.clone() + der.hess_phi.clone() - g.form().scale(&(psi.clone() * F::ratio(1, 2)))
        + curv_square(g, &geo.ric, &geo.s).scale(k);
    let d = der.delta_dphi.clone() + der.grad_sq.clone() - psi + k.clone() * curv_norm(g, &geo.ric, &geo.s);
    Ok(SolitonResidual::assemble(geo, e, yang_mills(geo, der), d))
}

pub fn residuals<F: Scalar>(chart: &ChartGeometry, p: &Point, params: &SolitonParams<F>) -> Result<SolitonResidual<F>> {
    let (geo, der) = packets::<F>(chart, p)?;
    residuals_from(&geo, &der, params)
}

/// `d*T` for `T = riemann_from_ricci(g, Ric, s)`, built from `nabla Ric`
/// and `ds` alone.
fn dstar_of_ricci_form<F: Scalar>(geo: &GeometryPacket<F>, der: &DerivativePacket<F>) -> Tensor3<F> {
    let g = &geo.metric;
    let inv = g.inverse();
    let gg = kn_product(g.form(), g.form(), g);
    let nabla_t: Vec<_> = (0..3)
        .map(|m| {
            let nric = Sym2::from_fn(|a, b| der.nabla_ric.get(m, a, b).clone());
            gg.scale(&(der.ds[m].clone() * F::ratio(1, 4))).sub(&kn_product(g.form(), &nric, g))
        })
        .collect();
    Tensor3::from_fn(|a, b, c| {
        let mut acc = F::zero();
        for j in 0..3 {
            for m in 0..3 {
                let w = inv.get(j, m);
                if !w.is_zero() {
                    acc = acc + w.clone() * nabla_t[m].component(j, a, b, c);
                }
            }
        }
        -acc
    })
}

/// Residuals in the reduced form, where the curvature is eliminated in
/// favour of `(Ric, s)` and the trace parts are recombined.
pub fn residuals_v2_from<F: Scalar>(
    geo: &GeometryPacket<F>,
    der: &DerivativePacket<F>,
    params: &SolitonParams<F>,
) -> Result<SolitonResidual<F>> {
    let psi = der.e2phi()?;
    let g = &geo.metric;
    let k = &params.kappa;
    let s = &geo.s;
    let ric = &geo.ric;
    let grad_sq = &der.grad_sq;

    let rr = g.square(ric);
    let coef = (-s.clone() - F::ratio(3, 4) * k.clone() * s.square() - grad_sq.clone() + psi.clone()) * F::ratio(1, 3);
    let e = rr.scale(&-k.clone()) + ric.scale(&(F::one() + k.clone() * s.clone())) + g.form().scale(&coef)
        + der.hess_phi.clone();

    let t = riemann_from_ricci(g, ric, s);
    let ym = dstar_of_ricci_form(geo, der).add(&t.contract_first(&der.dphi));

    let d = s.clone() - F::from_i64(3) * der.delta_dphi.clone() - F::from_i64(2) * grad_sq.clone()
        + psi * F::ratio(1, 2);
    Ok(SolitonResidual::assemble(geo, e, ym, d))
}

pub fn residuals_v2<F: Scalar>(chart: &ChartGeometry, p: &Point, params: &SolitonParams<F>) -> Result<SolitonResidual<F>> {
    let (geo, der) = packets::<F>(chart, p)?;
    residuals_v2_from(&geo, &der, params)
}

/// Defects of the three linear relations between the two formulations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulationDefects<F> {
    /// `D2 - (tr E - 2 D)`.
    pub dilaton: F,
    /// `E2 - (E - (1/3)(tr E + D) g)`.
    pub einstein: Sym2<F>,
    /// `YM2 - YM`.
    pub yang_mills: Tensor3<F>,
}

impl<F: Scalar> FormulationDefects<F> {
    pub fn is_zero(&self) -> bool {
        self.dilaton.is_zero() && self.einstein.is_zero() && self.yang_mills.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.dilaton.magnitude().max(self.einstein.max_abs()).max(self.yang_mills.max_abs())
    }
}

pub fn formulation_defects<F: Scalar>(
    geo: &GeometryPacket<F>,
    v1: &SolitonResidual<F>,
    v2: &SolitonResidual<F>,
) -> FormulationDefects<F> {
    let tr_e = geo.metric.trace(&v1.e);
    let dilaton = v2.d.clone() - (tr_e.clone() - F::from_i64(2) * v1.d.clone());
    let shift = geo.metric.form().scale(&((tr_e + v1.d.clone()) * F::ratio(1, 3)));
    let einstein = v2.e.clone() - (v1.e.clone() - shift);
    let yang_mills = v2.ym.sub(&v1.ym);
    FormulationDefects { dilaton, einstein, yang_mills }
}

/// `g^{ab} YM(e_a, e_b, .) - (Ric(dphi) - ds/2)`.
pub fn ym_trace_defect_from<F: Scalar>(geo: &GeometryPacket<F>, der: &DerivativePacket<F>) -> Vec3<F> {
    let tr = yang_mills(geo, der).trace_first_pair(&geo.metric);
    let ric_dphi = geo.ric.apply(&geo.metric.raise(&der.dphi));
    Vec3::from_fn(|c| tr[c].clone() - (ric_dphi[c].clone() - der.ds[c].clone() * F::ratio(1, 2)))
}

pub fn ym_trace_identity<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<Vec3<F>> {
    let (geo, der) = packets::<F>(chart, p)?;
    Ok(ym_trace_defect_from(&geo, &der))
}

/// `s + |dphi|^2 - (5/2) e^{2 phi} + 3 kappa |R|^2 - (tr E + D)`.
pub fn scalar_identity_from<F: Scalar>(
    geo: &GeometryPacket<F>,
    der: &DerivativePacket<F>,
    params: &SolitonParams<F>,
) -> Result<F> {
    let res = residuals_from(geo, der, params)?;
    let psi = der.e2phi()?;
    let lhs = geo.s.clone() + der.grad_sq.clone() - psi * F::ratio(5, 2)
        + F::from_i64(3) * params.kappa.clone() * curv_norm(&geo.metric, &geo.ric, &geo.s);
    Ok(lhs - (geo.metric.trace(&res.e) + res.d))
}

pub fn scalar_identity<F: Scalar>(chart: &ChartGeometry, p: &Point, params: &SolitonParams<F>) -> Result<F> {
    let (geo, der) = packets::<F>(chart, p)?;
    scalar_identity_from(&geo, &der, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartfield::{Dilaton, FieldExpr, Poly};
    use crate::sample;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn const_psi(c: i64) -> Dilaton {
        Dilaton::Exp2Phi(FieldExpr::constant(q(c)))
    }

    #[test]
    fn zero_kappa_is_rejected() {
        assert_eq!(SolitonParams::new(q(0)).unwrap_err(), Error::InvalidKappa);
    }

    #[test]
    fn flat_constant_dilaton() {
        let chart = ChartGeometry::euclidean(const_psi(4));
        let r = residuals(&chart, &[q(1), q(2), q(0)], &SolitonParams::new(q(1)).unwrap()).unwrap();
        assert_eq!(r.e_norm_sq, Rational::ratio(3 * 16, 4));
        assert_eq!(r.d, q(-4));
        assert!(r.ym.is_zero());
    }

    #[test]
    fn poincare_ball_off_shell() {
        let chart = ChartGeometry::poincare_ball(const_psi(48));
        let p = [Rational::ratio(1, 3), q(0), Rational::ratio(-1, 4)];
        let (geo, _) = packets::<Rational>(&chart, &p).unwrap();
        let r = residuals(&chart, &p, &SolitonParams::new(q(1)).unwrap()).unwrap();
        assert_eq!(r.e, geo.metric.form().scale(&q(-24)));
        assert!(r.ym.is_zero());
        // -48 + |R|^2 with |R|^2 = s^2/12 = 3.
        assert_eq!(r.d, q(-45));
    }

    #[test]
    fn formulations_agree_off_shell() {
        let mut rng = sample::rng(3);
        for _ in 0..3 {
            let chart = sample::rational_function_chart(&mut rng);
            let p = sample::ball_point(&mut rng);
            let params = SolitonParams::new(sample::kappa(&mut rng)).unwrap();
            let (geo, der) = packets::<Rational>(&chart, &p).unwrap();
            let v1 = residuals_from(&geo, &der, &params).unwrap();
            let v2 = residuals_v2_from(&geo, &der, &params).unwrap();
            assert!(formulation_defects(&geo, &v1, &v2).is_zero());
            assert!(ym_trace_defect_from(&geo, &der).is_zero());
            assert!(scalar_identity_from(&geo, &der, &params).unwrap() == q(0));
        }
    }

    #[test]
    fn polynomial_dilaton_on_poincare_ball() {
        let phi = Poly::from_terms([([1, 0, 0], q(1)), ([0, 1, 1], Rational::ratio(1, 2))]);
        let chart = ChartGeometry::poincare_ball(Dilaton::Exp2Phi(FieldExpr::Poly(phi.add(&Poly::constant(q(3))))));
        let v = ym_trace_identity::<Rational>(&chart, &[Rational::ratio(1, 5), q(0), Rational::ratio(1, 7)]).unwrap();
        assert!(v.is_zero());
    }
}
