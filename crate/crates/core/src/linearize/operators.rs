use serde::Serialize;

use crate::algebra3::{curv_square, Sym2, Tensor3, Vec3, SYM_INDEX};
use crate::chartfield::{ChartGeometry, Coords, FieldExpr, FrameJets, GeometryPacket, Point, Sym2Field, TensorJets};
use crate::error::{Error, Result};
use crate::jet::{monomials, Jet};
use crate::scalar::Scalar;

/// A tangent vector `(h, xi)` to the configuration space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deformation {
    pub h: Sym2Field,
    pub xi: FieldExpr,
}

/// Everything the linearised operators need from a deformation `h` at a
/// point, with `h` differentiated twice through the Levi-Civita connection.
#[derive(Clone, Debug)]
pub struct DeformationData<F> {
    pub geo: GeometryPacket<F>,
    pub h: Sym2<F>,
    pub tr_h: F,
    /// `(nabla_m h)(a, b)` at `(m, a, b)`.
    pub nabla_h: Tensor3<F>,
    /// `nabla* nabla h = -g^{nm} nabla_n nabla_m h`.
    pub rough_laplacian: Sym2<F>,
    /// `(nabla* h)_j = -g^{ab} (nabla_a h)_bj`.
    pub div_h: Vec3<F>,
    /// `nabla^S nabla* h`.
    pub sym_grad_div: Sym2<F>,
    /// `delta nabla* h`.
    pub delta_div: F,
    /// `nabla d tr h`.
    pub hess_tr: Sym2<F>,
    /// `delta d tr h`.
    pub laplace_tr: F,
    /// `R_0(h)`.
    pub r0: Sym2<F>,
    /// `tr h` to second order, for pointwise transverse-traceless tests.
    pub tr_jet: Jet<F>,
    /// `nabla* h` to first order.
    pub div_jets: [Jet<F>; 3],
}

fn sym_from_full<F: Scalar>(t: &[Jet<F>]) -> Sym2<F> {
    Sym2::from_fn(|i, j| t[3 * i + j].value().clone())
}

impl<F: Scalar> DeformationData<F> {
    pub fn new(chart: &ChartGeometry, h: &Sym2Field, p: &Point) -> Result<Self> {
        Self::at(chart, h, &chart.coords::<F>(p)?)
    }

    pub fn at(chart: &ChartGeometry, h: &Sym2Field, at: &Coords<F>) -> Result<Self> {
        let fj = FrameJets::from_coords(chart, at, 2)?;
        let hj = h.jets(at, 2, "h")?;
        Self::from_jets(&fj, &hj)
    }

    /// `hj` holds the six upper-triangle jets of `h`, order at least 2.
    pub fn from_jets(fj: &FrameJets<F>, hj: &[Jet<F>; 6]) -> Result<Self> {
        let h_full: TensorJets<F> = (0..9).map(|k| hj[SYM_INDEX[k / 3][k % 3]].clone()).collect();
        let geo = fj.geometry_packet();
        let g = &geo.metric;

        let nh = fj.covariant(&h_full, 2)?;
        let nnh = fj.covariant(&nh, 3)?;
        let lap = fj.trace(&nnh, 4, 0, 1);
        let rough_laplacian = Sym2::from_fn(|i, j| -lap[3 * i + j].value().clone());

        let div: TensorJets<F> = fj.trace(&nh, 3, 0, 1).into_iter().map(|j| j.neg()).collect();
        let ndiv = fj.covariant(&div, 1)?;
        let half = F::ratio(1, 2);
        let sym_grad_div =
            Sym2::from_fn(|i, j| (ndiv[3 * i + j].value().clone() + ndiv[3 * j + i].value().clone()) * half.clone());
        let delta_div = -g.trace(&sym_grad_div);

        let tr_jet = fj.trace(&h_full, 2, 0, 1).remove(0);
        let dtr: TensorJets<F> = (0..3).map(|i| tr_jet.derivative(i)).collect::<Result<_>>()?;
        let hess = fj.covariant(&dtr, 1)?;
        let hess_tr = sym_from_full(&hess);
        let laplace_tr = -g.trace(&hess_tr);

        let h = sym_from_full(&h_full);
        let r0 = geo.curvature.act_on_sym(&h);
        Ok(DeformationData {
            tr_h: tr_jet.value().clone(),
            nabla_h: Tensor3::from_fn(|m, a, b| nh[9 * m + 3 * a + b].value().clone()),
            div_h: Vec3::from_fn(|j| div[j].value().clone()),
            div_jets: std::array::from_fn(|j| div[j].truncate(1)),
            rough_laplacian,
            sym_grad_div,
            delta_div,
            hess_tr,
            laplace_tr,
            r0,
            tr_jet: tr_jet.truncate(2),
            h,
            geo,
        })
    }

    /// `Delta_L h = nabla* nabla h + h o Ric + Ric o h - 2 R_0(h)`.
    pub fn lichnerowicz(&self) -> Sym2<F> {
        let g = &self.geo.metric;
        self.rough_laplacian.clone() + g.anticommutator(&self.h, &self.geo.ric) - self.r0.scale(&F::from_i64(2))
    }

    /// `(1/2) Delta_L h - nabla^S nabla* h - (1/2) nabla d tr h`.
    pub fn lin_ricci(&self) -> Sym2<F> {
        let half = F::ratio(1, 2);
        self.lichnerowicz().scale(&half) - self.sym_grad_div.clone() - self.hess_tr.scale(&half)
    }

    /// `delta d tr h + delta nabla* h - <h, Ric>`.
    pub fn lin_scalar(&self) -> F {
        self.laplace_tr.clone() + self.delta_div.clone() - self.geo.metric.inner_sym(&self.h, &self.geo.ric)
    }

    pub fn linear_curvature(&self) -> LinearCurvature<F> {
        LinearCurvature { ric: self.lin_ricci(), s: self.lin_scalar() }
    }

    fn tt_jets(&self) -> impl Iterator<Item = &Jet<F>> {
        std::iter::once(&self.tr_jet).chain(self.div_jets.iter())
    }

    /// Largest coefficient of the second-order `tr h` jet and the
    /// first-order `nabla* h` jet.
    pub fn tt_defect(&self) -> f64 {
        self.tt_jets()
            .flat_map(|j| monomials(j.order()).iter().map(move |e| j.coeff(*e).magnitude()))
            .fold(0.0, f64::max)
    }

    pub fn is_tt(&self, tol: f64) -> bool {
        let scale = self.h.max_abs().max(1.0);
        self.tt_jets().all(|j| monomials(j.order()).iter().all(|e| j.coeff(*e).is_negligible(tol, scale)))
    }
}

/// `(d Ric(h), d s(h))` at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearCurvature<F> {
    pub ric: Sym2<F>,
    pub s: F,
}

pub fn lin_ricci<F: Scalar>(chart: &ChartGeometry, h: &Sym2Field, p: &Point) -> Result<Sym2<F>> {
    Ok(DeformationData::new(chart, h, p)?.lin_ricci())
}

pub fn lin_scalar<F: Scalar>(chart: &ChartGeometry, h: &Sym2Field, p: &Point) -> Result<F> {
    Ok(DeformationData::new(chart, h, p)?.lin_scalar())
}

/// `d s(h) + <h, Ric> - tr_g d Ric(h)`, zero for every background.
pub fn scalar_trace_defect<F: Scalar>(d: &DeformationData<F>, lin: &LinearCurvature<F>) -> F {
    let g = &d.geo.metric;
    lin.s.clone() + g.inner_sym(&d.h, &d.geo.ric) - g.trace(&lin.ric)
}

/// `(d(R o R)(h), d|R|^2(h))` on an arbitrary background, from the chain
/// rule applied to the three-dimensional expressions in `(g, Ric, s)`.
pub fn lin_curv_general<F: Scalar>(d: &DeformationData<F>, lin: &LinearCurvature<F>) -> (Sym2<F>, F) {
    let g = &d.geo.metric;
    let ric = &d.geo.ric;
    let s = &d.geo.s;
    let h = &d.h;
    let two = F::from_i64(2);

    // d(A o B) picks up -A h^## B from the variation of g^{-1}.
    let h_sharp = Sym2::from_fn(|a, b| {
        let mut acc = F::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc += g.inverse().get(a, i).clone() * g.inverse().get(b, j).clone() * h.get(i, j).clone();
            }
        }
        acc
    });
    let ric_h_ric = Sym2::from_fn(|x, y| {
        let mut acc = F::zero();
        for a in 0..3 {
            for b in 0..3 {
                acc += ric.get(x, a).clone() * h_sharp.get(a, b).clone() * ric.get(b, y).clone();
            }
        }
        acc
    });
    let d_ric_sq = g.anticommutator(&lin.ric, ric) - ric_h_ric;
    let ric_sq = g.square(ric);
    let d_norm = two.clone() * g.inner_sym(ric, &lin.ric) - two * g.inner_sym(h, &ric_sq);
    let coef = g.norm_sq_sym(ric) - s.square() * F::ratio(1, 2);
    let d_coef = d_norm.clone() - s.clone() * lin.s.clone();
    let d_square = ric.scale(&lin.s) + lin.ric.scale(s) - d_ric_sq + g.form().scale(&d_coef) + h.scale(&coef);

    let square = curv_square(g, ric, s);
    let d_curv_norm = (g.trace(&d_square) - g.inner_sym(h, &square)) * F::ratio(1, 2);
    (d_square, d_curv_norm)
}

/// `d|Ric|^2(h) - (s/2) d s(h)`, an independent route to `d|R|^2(h)`.
pub fn lin_curv_norm_via_ricci<F: Scalar>(d: &DeformationData<F>, lin: &LinearCurvature<F>) -> F {
    let g = &d.geo.metric;
    let ric = &d.geo.ric;
    let two = F::from_i64(2);
    let d_norm = two.clone() * g.inner_sym(ric, &lin.ric) - two * g.inner_sym(&d.h, &g.square(ric));
    d_norm - d.geo.s.clone() * lin.s.clone() * F::ratio(1, 2)
}

/// Einstein-background form: `((s/3) dRic(h) - (s^2/18) h, (s/6) ds(h))`.
pub fn lin_curv_einstein_from<F: Scalar>(s: &F, h: &Sym2<F>, lin: &LinearCurvature<F>) -> (Sym2<F>, F) {
    let sq = lin.ric.scale(&(s.clone() * F::ratio(1, 3))) - h.scale(&(s.square() * F::ratio(1, 18)));
    (sq, s.clone() * lin.s.clone() * F::ratio(1, 6))
}

/// `Ric - (s/3) g`, the defect from being Einstein.
pub fn einstein_defect<F: Scalar>(geo: &GeometryPacket<F>) -> Sym2<F> {
    geo.ric.clone() - geo.metric.form().scale(&(geo.s.clone() * F::ratio(1, 3)))
}

pub fn check_einstein<F: Scalar>(geo: &GeometryPacket<F>, tol: f64) -> Result<()> {
    let defect = einstein_defect(geo);
    let scale = geo.ric.max_abs().max(1.0);
    if defect.0.iter().all(|x| x.is_negligible(tol, scale)) {
        Ok(())
    } else {
        Err(Error::NotEinstein(defect.max_abs()))
    }
}

/// Lemma-style linearisation of `(R o R, |R|^2)` on an Einstein chart.
pub fn lin_curv_einstein<F: Scalar>(chart: &ChartGeometry, h: &Sym2Field, p: &Point, tol: f64) -> Result<(Sym2<F>, F)> {
    let d = DeformationData::<F>::new(chart, h, p)?;
    check_einstein(&d.geo, tol)?;
    Ok(lin_curv_einstein_from(&d.geo.s, &d.h, &d.linear_curvature()))
}
