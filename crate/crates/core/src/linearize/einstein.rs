use num::{One, Zero};
use rand::Rng;
use serde::Serialize;

use super::operators::{check_einstein, DeformationData};
use crate::algebra3::{Sym2, SYM_INDEX};
use crate::chartfield::{ChartGeometry, Coords, FieldExpr, FrameJets, Point, Poly, Sym2Field};
use crate::error::{Error, Result};
use crate::jet::{monomials, Jet};
use crate::sample::SuiteRng;
use crate::scalar::{Rational, Scalar};

/// Coefficients of the `tr h` jet to order 2 and the `nabla* h` jet to
/// order 1: the linear conditions for `h` to be TT at the base point.
fn tt_conditions<F: Scalar>(fj: &FrameJets<F>, hj: &[Jet<F>; 6]) -> Result<Vec<F>> {
    let full: Vec<Jet<F>> = (0..9).map(|k| hj[SYM_INDEX[k / 3][k % 3]].clone()).collect();
    let tr = fj.trace(&full, 2, 0, 1).remove(0);
    let nh = fj.covariant(&full, 2)?;
    let div = fj.trace(&nh, 3, 0, 1);
    let mut out: Vec<F> = monomials(2).iter().map(|e| tr.coeff(*e)).collect();
    for d in &div {
        out.extend(monomials(1).iter().map(|e| d.coeff(*e)));
    }
    Ok(out)
}

/// Reduced row echelon nullspace of a dense rational matrix.
fn nullspace(mut m: Vec<Vec<Rational>>, cols: usize) -> Vec<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(r) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, r);
        let inv = m[row][col].recip();
        m[row].iter_mut().for_each(|x| *x *= &inv);
        let pivot = m[row].clone();
        for (r, line) in m.iter_mut().enumerate() {
            if r != row && !line[col].is_zero() {
                let f = line[col].clone();
                line.iter_mut().zip(&pivot).for_each(|(x, p)| *x -= &f * p);
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][free].clone();
            }
            v
        })
        .collect()
}

/// Quadratic polynomial deformations, in powers of `x - p`, that are
/// transverse-traceless to the orders [`einstein_def_residual`] checks.
#[derive(Clone, Debug, PartialEq)]
pub struct TtBasis {
    pub point: Point,
    pub fields: Vec<Sym2Field>,
}

impl TtBasis {
    /// Ball charts only.
    pub fn new(chart: &ChartGeometry, p: &Point) -> Result<Self> {
        let at = chart.coords::<Rational>(p)?;
        if !matches!(at, Coords::Cartesian(_)) {
            return Err(Error::UnsupportedField("TT basis needs Cartesian coordinates".into()));
        }
        let fj = FrameJets::from_coords(chart, &at, 2)?;
        let mons = monomials(2);
        let dx: [Jet<Rational>; 3] = std::array::from_fn(|i| Jet::variable(i, Rational::zero(), 2));
        let mono_jet = |e: [usize; 3]| {
            (0..3).fold(Jet::constant(Rational::one(), 2), |acc, i| (0..e[i]).fold(acc, |a, _| a.mul(&dx[i])))
        };
        let unknowns = 6 * mons.len();
        let mut columns = Vec::with_capacity(unknowns);
        for slot in 0..6 {
            for e in mons {
                let hj: [Jet<Rational>; 6] =
                    std::array::from_fn(|k| if k == slot { mono_jet(*e) } else { Jet::zero(2) });
                columns.push(tt_conditions(&fj, &hj)?);
            }
        }
        let rows = columns[0].len();
        let matrix: Vec<Vec<Rational>> = (0..rows).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();

        let shifted: [Poly; 3] = std::array::from_fn(|i| Poly::var(i).sub(&Poly::constant(p[i].clone())));
        let mono_poly = |e: [usize; 3]| {
            (0..3).fold(Poly::constant(Rational::one()), |acc, i| (0..e[i]).fold(acc, |a, _| a.mul(&shifted[i])))
        };
        let fields = nullspace(matrix, unknowns)
            .into_iter()
            .map(|v| {
                Sym2Field(std::array::from_fn(|slot| {
                    let poly = mons.iter().enumerate().fold(Poly::zero(), |acc, (k, e)| {
                        let c = &v[slot * mons.len() + k];
                        if c.is_zero() {
                            acc
                        } else {
                            acc.add(&mono_poly(*e).scale(c))
                        }
                    });
                    FieldExpr::Poly(poly)
                }))
            })
            .collect();
        Ok(TtBasis { point: p.clone(), fields })
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Combination of basis fields with coefficients in `{-2, ..., 2}/4`.
    pub fn random(&self, rng: &mut SuiteRng) -> Result<Sym2Field> {
        let mut out = Sym2Field::zero();
        for f in &self.fields {
            let c = Rational::new(rng.gen_range(-2..=2i64).into(), 4.into());
            if c.is_zero() {
                continue;
            }
            for k in 0..6 {
                out.0[k] = out.0[k].add(&f.0[k].scale(&c))?;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EinsteinDeformation<F> {
    /// `nabla* nabla h - 2 R_0(h)`.
    pub residual: Sym2<F>,
    /// `d Ric(h) - (1/2)(nabla* nabla h + (2/3) s h - 2 R_0(h))`.
    pub reduction_defect: Sym2<F>,
    /// `R_0(h) + (s/6)(h - tr h g)`.
    pub r0_defect: Sym2<F>,
    /// `residual - (nabla* nabla h + (s/3) h)`.
    pub constant_curvature_defect: Sym2<F>,
    pub tt_defect: f64,
    pub s: F,
}

impl<F: Scalar> EinsteinDeformation<F> {
    pub fn max_defect(&self) -> f64 {
        [&self.reduction_defect, &self.r0_defect, &self.constant_curvature_defect]
            .iter()
            .map(|d| d.max_abs())
            .fold(0.0, f64::max)
    }
}

pub fn einstein_def_from<F: Scalar>(d: &DeformationData<F>, tol: f64) -> Result<EinsteinDeformation<F>> {
    check_einstein(&d.geo, tol)?;
    if !d.is_tt(tol) {
        return Err(Error::NotTT(format!("largest TT jet coefficient {:e}", d.tt_defect())));
    }
    let g = d.geo.metric.form();
    let s = d.geo.s.clone();
    let two = F::from_i64(2);
    let residual = d.rough_laplacian.clone() - d.r0.scale(&two);
    let reduction = (d.rough_laplacian.clone() + d.h.scale(&(s.clone() * F::ratio(2, 3))) - d.r0.scale(&two))
        .scale(&F::ratio(1, 2));
    let r0_expected = (d.h.clone() - g.scale(&d.tr_h)).scale(&(-s.clone() / F::from_i64(6)));
    let cc = d.rough_laplacian.clone() + d.h.scale(&(s.clone() / F::from_i64(3)));
    Ok(EinsteinDeformation {
        reduction_defect: d.lin_ricci() - reduction,
        r0_defect: d.r0.clone() - r0_expected,
        constant_curvature_defect: residual.clone() - cc,
        residual,
        tt_defect: d.tt_defect(),
        s,
    })
}

/// Infinitesimal Einstein operator on a TT deformation of an Einstein chart.
pub fn einstein_def_residual<F: Scalar>(
    chart: &ChartGeometry,
    h: &Sym2Field,
    p: &Point,
    tol: f64,
) -> Result<EinsteinDeformation<F>> {
    einstein_def_from(&DeformationData::new(chart, h, p)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartfield::Dilaton;
    use crate::sample;

    fn ball() -> ChartGeometry {
        ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()))
    }

    #[test]
    fn basis_has_the_expected_dimension() {
        let p = [Rational::new(1.into(), 4.into()), Rational::zero(), Rational::new((-1).into(), 8.into())];
        let basis = TtBasis::new(&ball(), &p).unwrap();
        assert_eq!(basis.dim(), 60 - 22);
    }

    #[test]
    fn tt_samples_satisfy_the_reductions_exactly() {
        let mut rng = sample::rng(11);
        let p = sample::ball_point(&mut rng);
        let basis = TtBasis::new(&ball(), &p).unwrap();
        let h = basis.random(&mut rng).unwrap();
        let rep = einstein_def_residual::<Rational>(&ball(), &h, &p, 0.0).unwrap();
        assert_eq!(rep.tt_defect, 0.0);
        assert!(rep.reduction_defect.is_zero());
        assert!(rep.r0_defect.is_zero());
        assert!(rep.constant_curvature_defect.is_zero());
        assert_eq!(rep.s, Rational::from_i64(-6));
    }

    #[test]
    fn zero_deformation_has_zero_residual() {
        let p = [Rational::zero(), Rational::zero(), Rational::zero()];
        let rep = einstein_def_residual::<Rational>(&ball(), &Sym2Field::zero(), &p, 0.0).unwrap();
        assert!(rep.residual.is_zero());
    }

    #[test]
    fn non_tt_input_is_rejected() {
        let one = FieldExpr::constant(Rational::one());
        let zero = FieldExpr::zero();
        let h = Sym2Field([one.clone(), zero.clone(), zero.clone(), one.clone(), zero, one]);
        let p = [Rational::zero(), Rational::zero(), Rational::zero()];
        let err = einstein_def_residual::<Rational>(&ball(), &h, &p, 0.0).unwrap_err();
        assert!(matches!(err, Error::NotTT(_)));
    }

    #[test]
    fn non_einstein_background_is_rejected() {
        let mut rng = sample::rng(5);
        let chart = sample::polynomial_chart(&mut rng);
        let p = [Rational::zero(), Rational::zero(), Rational::zero()];
        let err = einstein_def_residual::<Rational>(&chart, &Sym2Field::zero(), &p, 0.0).unwrap_err();
        assert!(matches!(err, Error::NotEinstein(_)));
    }
}
