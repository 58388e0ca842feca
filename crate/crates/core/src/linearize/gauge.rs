use num::Zero;
use serde::Serialize;

use super::operators::Deformation;
use crate::algebra3::{Metric3, Sym2, Vec3, SYM_INDEX, SYM_PAIRS};
use crate::chartfield::{ChartGeometry, Coords, Dilaton, Domain, FieldExpr, FrameJets, Point, Sym2Field};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{Rational, Scalar};

/// Vector field `v = v^i d_i` in chart coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField(pub [FieldExpr; 3]);

impl VectorField {
    pub fn constant(c: [Rational; 3]) -> Self {
        VectorField(c.map(FieldExpr::constant))
    }

    pub fn jets<F: Scalar>(&self, at: &Coords<F>, order: usize) -> Result<[Jet<F>; 3]> {
        let mut out = Vec::with_capacity(3);
        for (i, f) in self.0.iter().enumerate() {
            out.push(f.jet(at, order, &format!("v{}", i + 1))?);
        }
        Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
    }
}

/// Gauge image and adjoint at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeImage<F> {
    /// `L_v g`.
    pub lie: Sym2<F>,
    /// `d phi(v)`.
    pub dphi_v: F,
}

fn dphi<F: Scalar>(chart: &ChartGeometry, at: &Coords<F>) -> Result<Vec3<F>> {
    let d = chart.dilaton_jet(at, 1)?;
    Ok(Vec3::from_fn(|i| d.shifted.partial([(i == 0) as usize, (i == 1) as usize, (i == 2) as usize]).expect("order 1")))
}

fn unit(i: usize) -> [usize; 3] {
    let mut e = [0; 3];
    e[i] = 1;
    e
}

fn image_with<F: Scalar>(chart: &ChartGeometry, fj: &FrameJets<F>, v: &VectorField, at: &Coords<F>) -> Result<GaugeImage<F>> {
    let vj = v.jets(at, 1)?;
    let g = fj.metric_jets();
    let lowered: Vec<Jet<F>> = (0..3)
        .map(|j| (0..3).fold(Jet::zero(1), |acc, k| acc.add(&g[3 * j + k].mul(&vj[k]))))
        .collect();
    let nv = fj.covariant(&lowered, 1)?;
    let lie = Sym2::from_fn(|i, j| nv[3 * i + j].value().clone() + nv[3 * j + i].value().clone());
    let dp = dphi(chart, at)?;
    let dphi_v = (0..3).fold(F::zero(), |acc, k| acc + vj[k].value().clone() * dp[k].clone());
    Ok(GaugeImage { lie, dphi_v })
}

fn adjoint_with<F: Scalar>(chart: &ChartGeometry, fj: &FrameJets<F>, def: &Deformation, at: &Coords<F>) -> Result<Vec3<F>> {
    let hj = def.h.jets(at, 1, "h")?;
    let full: Vec<Jet<F>> = (0..9).map(|k| hj[SYM_INDEX[k / 3][k % 3]].clone()).collect();
    let nh = fj.covariant(&full, 2)?;
    let tr = fj.trace(&nh, 3, 0, 1);
    let xi = def.xi.eval(at, "xi")?;
    let dp = dphi(chart, at)?;
    let two = F::from_i64(2);
    Ok(Vec3::from_fn(|j| -two.clone() * tr[j].value().clone() + xi.clone() * dp[j].clone()))
}

/// `(L_v g, d phi(v))` at `p`, with `L_v g = nabla_i v_j + nabla_j v_i`.
pub fn gauge_image<F: Scalar>(chart: &ChartGeometry, v: &VectorField, p: &Point) -> Result<GaugeImage<F>> {
    let at = chart.coords::<F>(p)?;
    let fj = FrameJets::from_coords(chart, &at, 2)?;
    image_with(chart, &fj, v, &at)
}

/// `2 nabla* h + xi d phi` at `p`.
pub fn gauge_adjoint<F: Scalar>(chart: &ChartGeometry, def: &Deformation, p: &Point) -> Result<Vec3<F>> {
    let at = chart.coords::<F>(p)?;
    let fj = FrameJets::from_coords(chart, &at, 2)?;
    adjoint_with(chart, &fj, def, &at)
}

/// `L_v g` from the coordinate formula `v^k d_k g_ij + g_kj d_i v^k + g_ik d_j v^k`,
/// which involves no connection.
pub fn lie_derivative_coordinate<F: Scalar>(chart: &ChartGeometry, v: &VectorField, p: &Point) -> Result<Sym2<F>> {
    let at = chart.coords::<F>(p)?;
    let g = chart.metric_jets(&at, 1)?;
    let vj = v.jets(&at, 1)?;
    let gij = |i: usize, j: usize| &g[SYM_INDEX[i][j]];
    let d = |j: &Jet<F>, k: usize| j.partial(unit(k)).expect("order 1");
    Ok(Sym2::from_fn(|i, j| {
        let mut acc = F::zero();
        for k in 0..3 {
            acc += vj[k].value().clone() * d(gij(i, j), k);
            acc += gij(k, j).value().clone() * d(&vj[k], i);
            acc += gij(i, k).value().clone() * d(&vj[k], j);
        }
        acc
    }))
}

/// `L_v g` as a field, by the coordinate formula.
pub fn lie_derivative_field(chart: &ChartGeometry, v: &VectorField) -> Result<Sym2Field> {
    let g = &chart.metric;
    let mut out: [FieldExpr; 6] = std::array::from_fn(|_| FieldExpr::zero());
    for (slot, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        let mut acc = FieldExpr::zero();
        for k in 0..3 {
            acc = acc.add(&v.0[k].mul(&g.get(i, j).derivative(k))?)?;
            acc = acc.add(&g.get(k, j).mul(&v.0[k].derivative(i))?)?;
            acc = acc.add(&g.get(i, k).mul(&v.0[k].derivative(j))?)?;
        }
        out[slot] = acc;
    }
    Ok(Sym2Field(out))
}

fn constant_metric(chart: &ChartGeometry) -> Result<Metric3<Rational>> {
    if chart.domain != Domain::Torus {
        return Err(Error::PreconditionViolated("exact pairing needs a torus chart".into()));
    }
    let mut c = Vec::with_capacity(6);
    for f in &chart.metric.0 {
        if !f.is_constant() {
            return Err(Error::PreconditionViolated(
                "exact quadrature needs a constant-coefficient metric; use torus_pairing_float".into(),
            ));
        }
        let origin = Coords::<Rational>::Angles(std::array::from_fn(|_| (Rational::from_i64(1), Rational::zero())));
        c.push(f.eval(&origin, "g")?);
    }
    Metric3::new(Sym2(c.try_into().unwrap_or_else(|_| unreachable!())))
}

/// Both sides of the `L^2` pairing and their difference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingReport<F> {
    pub nodes: u32,
    /// Mean of `<L_v g, h> + xi d phi(v)`.
    pub image_side: F,
    /// Mean of `<v, 2 nabla* h + xi d phi>`.
    pub adjoint_side: F,
    pub defect: F,
}

impl<F: Scalar> PairingReport<F> {
    fn new(nodes: u32, image_side: F, adjoint_side: F) -> Self {
        let defect = image_side.clone() - adjoint_side.clone();
        PairingReport { nodes, image_side, adjoint_side, defect }
    }
}

/// Exact pairing on a constant-metric torus with trigonometric `v`, `h`,
/// `xi` and `phi`. The integrands are built symbolically and averaged over
/// the `N^3` uniform grid, which is exact once `N` exceeds their degree.
pub fn torus_pairing_exact(chart: &ChartGeometry, v: &VectorField, def: &Deformation, nodes: u32) -> Result<PairingReport<Rational>> {
    if nodes == 0 {
        return Err(Error::Config("quadrature needs at least one node".into()));
    }
    let g = constant_metric(chart)?;
    let gi = g.inverse();
    let phi = match &chart.dilaton {
        Dilaton::Phi(f) => f.clone(),
        Dilaton::Exp2Phi(_) => {
            return Err(Error::PreconditionViolated("exact pairing needs the dilaton given as phi".into()))
        }
    };
    let lie = lie_derivative_field(chart, v)?;
    let dphi: Vec<FieldExpr> = (0..3).map(|k| phi.derivative(k)).collect();
    let sum = |terms: Vec<FieldExpr>| terms.into_iter().try_fold(FieldExpr::zero(), |acc, t| acc.add(&t));

    let mut image = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    let c = gi.get(i, a) * gi.get(j, b);
                    if !c.is_zero() {
                        image.push(lie.get(i, j).mul(def.h.get(a, b))?.scale(&c));
                    }
                }
            }
        }
    }
    for k in 0..3 {
        image.push(def.xi.mul(&v.0[k])?.mul(&dphi[k])?);
    }

    let mut adjoint = Vec::new();
    for j in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                let c = gi.get(a, b).clone();
                if !c.is_zero() {
                    adjoint.push(v.0[j].mul(&def.h.get(b, j).derivative(a))?.scale(&(c * Rational::from_i64(-2))));
                }
            }
        }
        adjoint.push(v.0[j].mul(&def.xi)?.mul(&dphi[j])?);
    }

    let mean = |f: FieldExpr| -> Result<Rational> {
        match f {
            FieldExpr::Trig(t) => Ok(t.nodal_mean(nodes)),
            f if f.is_constant() => {
                let origin = Coords::<Rational>::Angles(std::array::from_fn(|_| (Rational::from_i64(1), Rational::zero())));
                f.eval(&origin, "integrand")
            }
            f => Err(Error::UnsupportedField(format!("{} integrand on a torus", f.class_name()))),
        }
    };
    Ok(PairingReport::new(nodes, mean(sum(image)?)?, mean(sum(adjoint)?)?))
}

/// Pairing on a torus with a variable metric by the `N^3` trapezoidal rule
/// with weight `sqrt(det g)`, evaluating both operators pointwise.
pub fn torus_pairing_float(chart: &ChartGeometry, v: &VectorField, def: &Deformation, nodes: u32) -> Result<PairingReport<f64>> {
    if chart.domain != Domain::Torus {
        return Err(Error::PreconditionViolated("pairing needs a torus chart".into()));
    }
    if nodes == 0 {
        return Err(Error::Config("quadrature needs at least one node".into()));
    }
    let n = nodes as usize;
    let step = std::f64::consts::TAU / nodes as f64;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for k in 0..n * n * n {
        let x = [(k / (n * n)) as f64 * step, ((k / n) % n) as f64 * step, (k % n) as f64 * step];
        let at = Coords::from_angles_f64(x);
        let fj = FrameJets::<f64>::from_coords(chart, &at, 2)?;
        let g = fj.metric();
        let vol = g.det().sqrt();
        let img = image_with(chart, &fj, v, &at)?;
        let adj = adjoint_with(chart, &fj, def, &at)?;
        let h = Sym2(def.h.jets(&at, 0, "h")?.map(|j| *j.value()));
        let xi = def.xi.eval(&at, "xi")?;
        let vv = Vec3(v.jets(&at, 0)?.map(|j| *j.value()));
        lhs += vol * (g.inner_sym(&img.lie, &h) + xi * img.dphi_v);
        rhs += vol * vv.dot(&adj);
    }
    let count = (n * n * n) as f64;
    Ok(PairingReport::new(nodes, lhs / count, rhs / count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartfield::{Stencil, TrigPoly};
    use crate::sample;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn torus(rng: &mut crate::sample::SuiteRng) -> ChartGeometry {
        let g = [q(2, 1), q(1, 3), q(0, 1), q(3, 2), q(-1, 4), q(1, 1)];
        ChartGeometry::flat_torus(g, Dilaton::Phi(FieldExpr::Trig(sample::trig_poly(rng, 2, 3)))).unwrap()
    }

    fn trig_vector(rng: &mut crate::sample::SuiteRng) -> VectorField {
        VectorField(std::array::from_fn(|_| FieldExpr::Trig(sample::trig_poly(rng, 2, 3))))
    }

    #[test]
    fn constant_fields_are_killing_on_a_flat_torus() {
        let mut rng = sample::rng(4);
        let chart = torus(&mut rng);
        let v = VectorField::constant([q(1, 2), q(-3, 1), q(2, 5)]);
        let p = sample::torus_point(&mut rng);
        let img = gauge_image::<Rational>(&chart, &v, &p).unwrap();
        assert!(img.lie.is_zero());
        let at = chart.coords::<Rational>(&p).unwrap();
        let dp = dphi(&chart, &at).unwrap();
        assert_eq!(img.dphi_v, dp.dot(&Vec3(v.jets(&at, 0).unwrap().map(|j| j.value().clone()))));
    }

    #[test]
    fn covariant_and_coordinate_lie_derivatives_agree() {
        let mut rng = sample::rng(6);
        let chart = sample::rational_function_chart(&mut rng);
        let v = VectorField(std::array::from_fn(|_| FieldExpr::Poly(sample::poly(&mut rng, 2, 3, 4))));
        let p = sample::ball_point(&mut rng);
        let a = gauge_image::<Rational>(&chart, &v, &p).unwrap().lie;
        assert_eq!(a, lie_derivative_coordinate(&chart, &v, &p).unwrap());
        let field = lie_derivative_field(&chart, &v).unwrap();
        let at = chart.coords::<Rational>(&p).unwrap();
        assert_eq!(a, Sym2(field.jets(&at, 0, "L").unwrap().map(|j| j.value().clone())));
    }

    #[test]
    fn exact_pairing_vanishes_with_five_nodes() {
        let mut rng = sample::rng(9);
        for _ in 0..3 {
            let chart = torus(&mut rng);
            let v = trig_vector(&mut rng);
            let def = Deformation { h: sample::trig_sym2_field(&mut rng, 2, 3), xi: FieldExpr::Trig(sample::trig_poly(&mut rng, 2, 3)) };
            for n in [5, 6, 9] {
                let rep = torus_pairing_exact(&chart, &v, &def, n).unwrap();
                assert!(rep.defect.is_zero(), "N = {n}: {}", rep.defect);
            }
        }
    }

    #[test]
    fn coarse_grids_alias() {
        let chart = ChartGeometry::flat_torus([q(1, 1), q(0, 1), q(0, 1), q(1, 1), q(0, 1), q(1, 1)], Dilaton::Phi(FieldExpr::zero())).unwrap();
        let wave = |n: [i32; 3]| FieldExpr::Trig(TrigPoly::term(n, q(1, 1), q(0, 1)));
        let v = VectorField([FieldExpr::Trig(TrigPoly::term([2, 0, 0], q(0, 1), q(1, 1))), FieldExpr::zero(), FieldExpr::zero()]);
        let mut h = Sym2Field::zero();
        h.0[0] = wave([2, 0, 0]);
        let def = Deformation { h, xi: FieldExpr::zero() };
        assert!(!torus_pairing_exact(&chart, &v, &def, 4).unwrap().defect.is_zero());
        assert!(torus_pairing_exact(&chart, &v, &def, 5).unwrap().defect.is_zero());
    }

    #[test]
    fn variable_metric_rejects_exact_quadrature() {
        let mut rng = sample::rng(10);
        let mut chart = torus(&mut rng);
        chart.metric.0[0] = FieldExpr::Trig(TrigPoly::constant(q(3, 1)).add(&TrigPoly::term([1, 0, 0], q(1, 2), q(0, 1))));
        let def = Deformation { h: Sym2Field::zero(), xi: FieldExpr::zero() };
        let err = torus_pairing_exact(&chart, &trig_vector(&mut rng), &def, 5).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    fn wavy_torus() -> ChartGeometry {
        let c = |x: Rational| FieldExpr::Trig(TrigPoly::constant(x));
        let mut g = [c(q(3, 1)), c(q(1, 4)), c(q(0, 1)), c(q(2, 1)), c(q(0, 1)), c(q(2, 1))];
        g[0] = FieldExpr::Trig(TrigPoly::constant(q(3, 1)).add(&TrigPoly::term([0, 1, 0], q(1, 2), q(1, 3))));
        g[5] = FieldExpr::Trig(TrigPoly::constant(q(2, 1)).add(&TrigPoly::term([1, 0, 1], q(0, 1), q(1, 4))));
        let phi = FieldExpr::Trig(TrigPoly::term([0, 0, 1], q(1, 2), q(0, 1)));
        ChartGeometry::new(Domain::Torus, Sym2Field(g), Dilaton::Phi(phi)).unwrap()
    }

    #[test]
    fn float_pairing_on_a_variable_metric() {
        let mut rng = sample::rng(12);
        let chart = wavy_torus();
        let v = VectorField(std::array::from_fn(|_| FieldExpr::Trig(sample::trig_poly(&mut rng, 1, 2))));
        let def = Deformation { h: sample::trig_sym2_field(&mut rng, 1, 2), xi: FieldExpr::Trig(sample::trig_poly(&mut rng, 1, 2)) };
        let rep = torus_pairing_float(&chart, &v, &def, 12).unwrap();
        assert!(rep.defect.abs() < 1e-9 * rep.image_side.abs().max(1.0), "{rep:?}");
    }

    #[test]
    fn adjoint_of_a_lie_derivative_matches_differences() {
        let mut rng = sample::rng(13);
        let chart = wavy_torus();
        let v = VectorField(std::array::from_fn(|_| FieldExpr::Trig(sample::trig_poly(&mut rng, 1, 2))));
        let h = lie_derivative_field(&chart, &v).unwrap();
        let def = Deformation { h: h.clone(), xi: FieldExpr::zero() };
        let p = sample::torus_point(&mut rng);
        let adj = gauge_adjoint::<f64>(&chart, &def, &p).unwrap();
        let st = Stencil::new(&chart, 1e-4).unwrap();
        let div = st.divergence_sym(chart.real_coords(&p), &|y| h.eval_f64(y, "h")).unwrap();
        for j in 0..3 {
            assert!((adj[j] - 2.0 * div[j]).abs() < 1e-6 * adj.max_abs().max(1.0), "{adj:?} vs {div:?}");
        }
    }
}
