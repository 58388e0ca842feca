//! Levi-Civita geometry from metric jets.
//!
//! [`FrameJets`] works in any frame `e_i` with constant structure
//! constants `[e_i, e_j] = c_ij^k e_k`: a coordinate chart is the case
//! `c = 0`, a left-invariant frame on a Lie group is the case of constant
//! metric jets. Derivatives along `e_i` are jet derivatives, so every
//! quantity below is exact in exact mode.

use serde::Serialize;

use super::chart::{ChartGeometry, DilatonJet, Point};
use super::expr::Coords;
use crate::algebra3::{Curv3, Metric3, Sym2, Tensor3, Vec3, SYM_PAIRS};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Structure constants `c_ij^k`, stored at `9i + 3j + k`.
pub type Structure<F> = Vec<F>;

/// Components of a covariant tensor of rank `r`, flattened in base 3 with
/// the first index most significant.
pub type TensorJets<F> = Vec<Jet<F>>;

fn pow3(r: usize) -> usize {
    3usize.pow(r as u32)
}

fn digits(mut idx: usize, rank: usize) -> Vec<usize> {
    let mut d = vec![0; rank];
    for slot in (0..rank).rev() {
        d[slot] = idx % 3;
        idx /= 3;
    }
    d
}

fn flat(d: &[usize]) -> usize {
    d.iter().fold(0, |acc, &k| 3 * acc + k)
}

/// Jets of the metric, its inverse, the connection and the curvature.
#[derive(Clone, Debug)]
pub struct FrameJets<F> {
    order: usize,
    metric: Metric3<F>,
    g: TensorJets<F>,
    ginv: TensorJets<F>,
    /// `Gamma^m_ij = e^m(nabla_{e_i} e_j)` at `9m + 3i + j`.
    gamma: TensorJets<F>,
    riem: TensorJets<F>,
    ric: TensorJets<F>,
    scal: Jet<F>,
    dilaton: Option<DilatonJet<F>>,
}

impl<F: Scalar> FrameJets<F> {
    /// `g` holds the six upper-triangle metric jets (order at least 2).
    pub fn new(g: [Jet<F>; 6], structure: Option<&Structure<F>>, dilaton: Option<DilatonJet<F>>) -> Result<Self> {
        let order = g.iter().map(Jet::order).min().unwrap_or(0);
        if order < 2 {
            return Err(Error::JetOrder { have: order, need: 2 });
        }
        let metric = Metric3::new(Sym2(std::array::from_fn(|k| g[k].value().clone())))?;
        let gm: TensorJets<F> = (0..9).map(|k| g[crate::algebra3::SYM_INDEX[k / 3][k % 3]].clone()).collect();

        // Inverse by cofactors over the determinant.
        let at = |i: usize, j: usize| &gm[3 * i + j];
        let cof = |i: usize, j: usize| {
            let (a0, a1) = others(i);
            let (b0, b1) = others(j);
            let m = at(a0, b0).mul(at(a1, b1)).sub(&at(a0, b1).mul(at(a1, b0)));
            if (i + j) % 2 == 0 {
                m
            } else {
                m.neg()
            }
        };
        let det = (0..3).fold(Jet::zero(order), |acc, j| acc.add(&at(0, j).mul(&cof(0, j))));
        let det_inv = det.recip().ok_or_else(|| Error::SingularMetric("determinant vanishes".into()))?;
        let ginv: TensorJets<F> = (0..9).map(|k| cof(k % 3, k / 3).mul(&det_inv)).collect();

        let c = |i: usize, j: usize, k: usize| structure.map(|s| s[9 * i + 3 * j + k].clone());
        let dg: Vec<TensorJets<F>> =
            (0..3).map(|m| gm.iter().map(|x| x.derivative(m)).collect::<Result<_>>()).collect::<Result<_>>()?;

        // Koszul formula for Gamma_ijk = g(nabla_i e_j, e_k).
        let half = F::ratio(1, 2);
        let mut lowered = Vec::with_capacity(27);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut t = dg[i][3 * j + k].add(&dg[j][3 * i + k]).sub(&dg[k][3 * i + j]);
                    if structure.is_some() {
                        for l in 0..3 {
                            let term = gm[3 * l + k]
                                .scale(&c(i, j, l).unwrap())
                                .sub(&gm[3 * l + i].scale(&c(j, k, l).unwrap()))
                                .add(&gm[3 * l + j].scale(&c(k, i, l).unwrap()));
                            t = t.add(&term);
                        }
                    }
                    lowered.push(t.scale(&half));
                }
            }
        }
        let mut gamma = Vec::with_capacity(27);
        for m in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let t = (0..3).fold(Jet::zero(order - 1), |acc, k| {
                        acc.add(&ginv[3 * m + k].mul(&lowered[9 * i + 3 * j + k]))
                    });
                    gamma.push(t);
                }
            }
        }

        let dgamma: Vec<TensorJets<F>> =
            (0..3).map(|m| gamma.iter().map(|x| x.derivative(m)).collect::<Result<_>>()).collect::<Result<_>>()?;
        // Products only survive to the order of the derivative terms.
        let short: TensorJets<F> = gamma.iter().map(|x| x.truncate(order - 2)).collect();
        let gam = |l: usize, i: usize, j: usize| &short[9 * l + 3 * i + j];
        // R^l_ijk, the e_l component of R_{e_i, e_j} e_k.
        let mut rup = vec![Jet::zero(order - 2); 81];
        for (i, j) in PAIRS {
            {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut t = dgamma[i][9 * l + 3 * j + k].sub(&dgamma[j][9 * l + 3 * i + k]);
                        for m in 0..3 {
                            t = t.add(&gam(l, i, m).mul(gam(m, j, k))).sub(&gam(l, j, m).mul(gam(m, i, k)));
                            if let Some(cm) = c(i, j, m) {
                                t = t.sub(&gam(l, m, k).scale(&cm));
                            }
                        }
                        rup[27 * l + 9 * j + 3 * i + k] = t.neg();
                        rup[27 * l + 9 * i + 3 * j + k] = t;
                    }
                }
            }
        }
        let mut riem = vec![Jet::zero(order - 2); 81];
        for (i, j) in PAIRS {
            for k in 0..3 {
                for l in 0..3 {
                    let t = (0..3).fold(Jet::zero(order - 2), |acc, m| {
                        acc.add(&gm[3 * l + m].mul(&rup[27 * m + 9 * i + 3 * j + k]))
                    });
                    riem[27 * j + 9 * i + 3 * k + l] = t.neg();
                    riem[27 * i + 9 * j + 3 * k + l] = t;
                }
            }
        }
        // Ric_jk = g^{il} R_ijkl
        let mut ric = Vec::with_capacity(9);
        for j in 0..3 {
            for k in 0..3 {
                let mut t = Jet::zero(order - 2);
                for i in 0..3 {
                    for l in 0..3 {
                        t = t.add(&ginv[3 * i + l].mul(&riem[27 * i + 9 * j + 3 * k + l]));
                    }
                }
                ric.push(t);
            }
        }
        let scal = (0..9).fold(Jet::zero(order - 2), |acc, k| acc.add(&ginv[k].mul(&ric[k])));

        Ok(FrameJets { order, metric, g: gm, ginv, gamma, riem, ric, scal, dilaton })
    }

    /// Coordinate-chart jets at `p` with metric jets of the given order.
    pub fn from_chart(chart: &ChartGeometry, p: &Point, order: usize) -> Result<Self> {
        FrameJets::from_coords(chart, &chart.coords::<F>(p)?, order)
    }

    pub fn from_coords(chart: &ChartGeometry, at: &Coords<F>, order: usize) -> Result<Self> {
        let g = chart.metric_jets(at, order)?;
        let dil = chart.dilaton_jet(at, order)?;
        FrameJets::new(g, None, Some(dil))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric(&self) -> &Metric3<F> {
        &self.metric
    }

    pub fn metric_jets(&self) -> &TensorJets<F> {
        &self.g
    }

    pub fn inverse_jets(&self) -> &TensorJets<F> {
        &self.ginv
    }

    pub fn christoffel_jets(&self) -> &TensorJets<F> {
        &self.gamma
    }

    pub fn riemann_jets(&self) -> &TensorJets<F> {
        &self.riem
    }

    pub fn ricci_jets(&self) -> &TensorJets<F> {
        &self.ric
    }

    pub fn scalar_jet(&self) -> &Jet<F> {
        &self.scal
    }

    pub fn dilaton(&self) -> Option<&DilatonJet<F>> {
        self.dilaton.as_ref()
    }

    /// `nabla T` for a covariant tensor of rank `rank`; the derivative
    /// direction becomes the first index.
    pub fn covariant(&self, t: &[Jet<F>], rank: usize) -> Result<TensorJets<F>> {
        let n = pow3(rank);
        assert_eq!(t.len(), n, "tensor of rank {rank} needs {n} components");
        let mut out = Vec::with_capacity(3 * n);
        for m in 0..3 {
            for idx in 0..n {
                let mut acc = t[idx].derivative(m)?;
                let d = digits(idx, rank);
                for s in 0..rank {
                    for e in 0..3 {
                        let mut d2 = d.clone();
                        d2[s] = e;
                        acc = acc.sub(&self.gamma[9 * e + 3 * m + d[s]].mul(&t[flat(&d2)]));
                    }
                }
                out.push(acc);
            }
        }
        Ok(out)
    }

    /// Contracts slots `a < b` of a covariant tensor with `g^{-1}`.
    pub fn trace(&self, t: &[Jet<F>], rank: usize, a: usize, b: usize) -> TensorJets<F> {
        assert!(a < b && b < rank);
        let n = pow3(rank - 2);
        (0..n)
            .map(|idx| {
                let rest = digits(idx, rank - 2);
                let mut acc: Option<Jet<F>> = None;
                for x in 0..3 {
                    for y in 0..3 {
                        let mut full = rest.clone();
                        full.insert(a, x);
                        full.insert(b, y);
                        let term = self.ginv[3 * x + y].mul(&t[flat(&full)]);
                        acc = Some(match acc {
                            None => term,
                            Some(v) => v.add(&term),
                        });
                    }
                }
                acc.expect("nonempty contraction")
            })
            .collect()
    }

    pub fn geometry_packet(&self) -> GeometryPacket<F> {
        let values = |v: &TensorJets<F>| v.iter().map(|j| j.value().clone()).collect::<Vec<F>>();
        let riem = values(&self.riem);
        let ric = values(&self.ric);
        GeometryPacket {
            metric: self.metric.clone(),
            christoffel: values(&self.gamma),
            curvature: Curv3::from_components(&riem, self.metric.clone()),
            ric: Sym2(SYM_PAIRS.map(|(i, j)| ric[3 * i + j].clone())),
            s: self.scal.value().clone(),
        }
    }

    /// Needs metric jets of order 3 and, for the dilaton entries, a
    /// dilaton jet of order 2.
    pub fn derivative_packet(&self) -> Result<DerivativePacket<F>> {
        if self.order < 3 {
            return Err(Error::JetOrder { have: self.order, need: 3 });
        }
        let (dphi_jets, e2phi) = match &self.dilaton {
            Some(d) => ((0..3).map(|i| d.shifted.derivative(i)).collect::<Result<Vec<_>>>()?, d.e2phi.clone()),
            None => (vec![Jet::zero(1); 3], None),
        };
        let dphi = Vec3::from_fn(|i| dphi_jets[i].value().clone());
        let hess_j = self.covariant(&dphi_jets, 1)?;
        let hess_phi = Sym2::from_fn(|i, j| hess_j[3 * i + j].value().clone());
        let delta_dphi = -self.metric.trace(&hess_phi);
        let grad_sq = self.metric.inner_covector(&dphi, &dphi);

        let dstar_r = self.divergence_of_riemann()?;
        let nric = self.covariant(&self.ric, 2)?;
        let nabla_ric = Tensor3::from_fn(|m, a, b| nric[9 * m + 3 * a + b].value().clone());
        let d_ric = Tensor3::from_fn(|x, y, z| nabla_ric.get(x, y, z).clone() - nabla_ric.get(y, x, z).clone());
        let ds = Vec3::from_fn(|i| self.scal.derivative(i).map(|j| j.value().clone()).unwrap_or_else(|_| F::zero()));
        Ok(DerivativePacket { dphi, hess_phi, delta_dphi, grad_sq, e2phi, dstar_r, d_ric, nabla_ric, ds })
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

impl<F: Scalar> FrameJets<F> {
    /// `-g^{jm} (nabla_m R)(e_j, e_a, e_b, e_c)` from point values, filling
    /// the `(b, c)` antisymmetry instead of differentiating every component.
    fn divergence_of_riemann(&self) -> Result<Tensor3<F>> {
        let inv = self.metric.inverse();
        let r = |i: usize, j: usize, k: usize, l: usize| self.riem[27 * i + 9 * j + 3 * k + l].value();
        let gam = |e: usize, m: usize, x: usize| self.gamma[9 * e + 3 * m + x].value();
        let dr: Vec<Vec<F>> = (0..3)
            .map(|m| self.riem.iter().map(|x| x.derivative(m).map(|d| d.value().clone())).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let mut out = Tensor3::zero();
        for a in 0..3 {
            for (b, c) in PAIRS {
                let mut acc = F::zero();
                for j in 0..3 {
                    for m in 0..3 {
                        let w = inv.get(j, m);
                        if w.is_zero() {
                            continue;
                        }
                        let mut t = dr[m][27 * j + 9 * a + 3 * b + c].clone();
                        for e in 0..3 {
                            t = t - gam(e, m, j).clone() * r(e, a, b, c).clone()
                                - gam(e, m, a).clone() * r(j, e, b, c).clone()
                                - gam(e, m, b).clone() * r(j, a, e, c).clone()
                                - gam(e, m, c).clone() * r(j, a, b, e).clone();
                        }
                        acc = acc + w.clone() * t;
                    }
                }
                out.0[9 * a + 3 * c + b] = acc.clone();
                out.0[9 * a + 3 * b + c] = -acc;
            }
        }
        Ok(out)
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Pointwise zeroth- and second-order geometry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryPacket<F> {
    pub metric: Metric3<F>,
    /// `Gamma^k_ij` at `9k + 3i + j`.
    pub christoffel: Vec<F>,
    pub curvature: Curv3<F>,
    pub ric: Sym2<F>,
    pub s: F,
}

impl<F: Scalar> GeometryPacket<F> {
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &F {
        &self.christoffel[9 * k + 3 * i + j]
    }
}

/// Pointwise data involving one more derivative, plus the dilaton terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativePacket<F> {
    pub dphi: Vec3<F>,
    /// `nabla d phi`.
    pub hess_phi: Sym2<F>,
    /// `delta d phi = -tr_g nabla d phi`.
    pub delta_dphi: F,
    /// `|d phi|^2`.
    pub grad_sq: F,
    /// `e^{2 phi}` when representable (see [`DilatonJet`]).
    pub e2phi: Option<F>,
    /// `d*R(a, b, c) = -g^{jm} (nabla_m R)(e_j, e_a, e_b, e_c)`.
    pub dstar_r: Tensor3<F>,
    /// `d Ric(x, y, z) = (nabla_x Ric)(y, z) - (nabla_y Ric)(x, z)`.
    pub d_ric: Tensor3<F>,
    /// `(nabla_m Ric)(a, b)` at `(m, a, b)`.
    pub nabla_ric: Tensor3<F>,
    pub ds: Vec3<F>,
}

impl<F: Scalar> DerivativePacket<F> {
    pub fn e2phi(&self) -> Result<F> {
        self.e2phi
            .clone()
            .ok_or_else(|| Error::Transcendental("e^(2 phi) at this point; give the dilaton as exp2phi".into()))
    }
}

pub fn geometry_packet<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<GeometryPacket<F>> {
    Ok(FrameJets::<F>::from_chart(chart, p, 2)?.geometry_packet())
}

pub fn derivative_packet<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<DerivativePacket<F>> {
    FrameJets::<F>::from_chart(chart, p, 3)?.derivative_packet()
}

/// Both packets from one jet evaluation.
pub fn packets<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<(GeometryPacket<F>, DerivativePacket<F>)> {
    let fj = FrameJets::<F>::from_chart(chart, p, 3)?;
    Ok((fj.geometry_packet(), fj.derivative_packet()?))
}

/// `d*R(v1, v2, v3) - dRic(v2, v3, v1)` over basis triples.
pub fn bianchi_defect<F: Scalar>(d: &DerivativePacket<F>) -> Tensor3<F> {
    Tensor3::from_fn(|a, b, c| d.dstar_r.get(a, b, c).clone() - d.d_ric.get(b, c, a).clone())
}

pub fn bianchi_residual<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<Tensor3<F>> {
    Ok(bianchi_defect(&derivative_packet::<F>(chart, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra3::ricci_contract;
    use crate::chartfield::{Dilaton, FieldExpr, Poly};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn euclidean_is_flat() {
        let chart = ChartGeometry::euclidean(Dilaton::Phi(FieldExpr::zero()));
        let (geo, der) = packets::<Rational>(&chart, &[q(1, 3), q(-2, 1), q(5, 7)]).unwrap();
        assert!(geo.christoffel.iter().all(|c| *c == q(0, 1)));
        assert!(geo.curvature.is_zero());
        assert_eq!(geo.s, q(0, 1));
        assert!(der.dstar_r.is_zero());
    }

    #[test]
    fn poincare_ball_has_curvature_minus_one() {
        let chart = ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()));
        for p in [[q(0, 1), q(0, 1), q(0, 1)], [q(1, 3), q(-1, 4), q(1, 5)]] {
            let (geo, der) = packets::<Rational>(&chart, &p).unwrap();
            assert_eq!(geo.s, q(-6, 1));
            assert_eq!(geo.ric, geo.metric.form().scale(&q(-2, 1)));
            assert_eq!(ricci_contract(&geo.curvature, &geo.metric), (geo.ric.clone(), geo.s.clone()));
            assert!(der.dstar_r.is_zero());
            assert!(bianchi_defect(&der).is_zero());
        }
    }

    #[test]
    fn flat_hessian_of_square() {
        let phi = FieldExpr::Poly(Poly::monomial([2, 0, 0], q(1, 1)));
        let chart = ChartGeometry::euclidean(Dilaton::Phi(phi));
        let der = derivative_packet::<Rational>(&chart, &[q(1, 2), q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(der.hess_phi, Sym2::diag(q(2, 1), q(0, 1), q(0, 1)));
        assert_eq!(der.delta_dphi, q(-2, 1));
        assert_eq!(der.grad_sq, q(1, 1));
    }

    #[test]
    fn structure_constants_give_hyperbolic_frame() {
        // [e1, e2] = e2, [e1, e3] = e3 with the identity metric.
        let mut c = vec![q(0, 1); 27];
        c[3 + 1] = q(1, 1);
        c[9 + 1] = q(-1, 1);
        c[6 + 2] = q(1, 1);
        c[18 + 2] = q(-1, 1);
        let g = Sym2::<Rational>::identity().0.map(|v| Jet::constant(v, 3));
        let fj = FrameJets::new(g, Some(&c), None).unwrap();
        let geo = fj.geometry_packet();
        assert_eq!(geo.s, q(-6, 1));
        assert_eq!(geo.ric, Sym2::identity().scale(&q(-2, 1)));
        assert!(fj.derivative_packet().unwrap().dstar_r.is_zero());
    }
}
