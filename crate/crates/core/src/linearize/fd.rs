use serde::Serialize;

use super::operators::{lin_curv_einstein_from, lin_curv_general, DeformationData};
use crate::algebra3::{curv_norm, curv_square, Metric3, Sym2};
use crate::chartfield::{ChartGeometry, FrameJets, Point, Stencil, Sym2Field};
use crate::error::Result;
use crate::scalar::{Rational, Scalar};

/// `(Ric, s, R o R, |R|^2)` at a point, flattened for comparisons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureSample<F> {
    pub ric: Sym2<F>,
    pub s: F,
    pub square: Sym2<F>,
    pub norm: F,
}

impl<F: Scalar> CurvatureSample<F> {
    pub fn components(&self) -> Vec<F> {
        let mut v = self.ric.0.to_vec();
        v.push(self.s.clone());
        v.extend(self.square.0.iter().cloned());
        v.push(self.norm.clone());
        v
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.components().iter().map(Scalar::to_f64).collect()
    }
}

/// The chart with metric `g + t h`.
pub fn perturbed_chart(chart: &ChartGeometry, h: &Sym2Field, t: &Rational) -> Result<ChartGeometry> {
    let mut metric = chart.metric.clone();
    for k in 0..6 {
        metric.0[k] = metric.0[k].add(&h.0[k].scale(t))?;
    }
    ChartGeometry::new(chart.domain.clone(), metric, chart.dilaton.clone())
}

/// The nonlinear pipeline: jets of the metric to second order, then the
/// algebraic curvature expressions.
pub fn curvature_sample<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<CurvatureSample<F>> {
    let geo = FrameJets::<F>::from_chart(chart, p, 2)?.geometry_packet();
    Ok(CurvatureSample {
        square: curv_square(&geo.metric, &geo.ric, &geo.s),
        norm: curv_norm(&geo.metric, &geo.ric, &geo.s),
        ric: geo.ric,
        s: geo.s,
    })
}

/// `step` as a rational with at most twelve decimals, so that exact-mode
/// perturbations keep small denominators.
fn decimal_step(step: f64) -> Result<Rational> {
    let scaled = (step * 1e12).round();
    if !(scaled.is_finite() && scaled > 0.0) {
        return Err(crate::Error::Config(format!("finite-difference step must be positive, got {step}")));
    }
    Ok(Rational::new((scaled as i64).into(), 1_000_000_000_000i64.into()))
}

/// Central difference `(N(g + t h) - N(g - t h)) / 2t`.
pub fn directional_difference<F: Scalar>(chart: &ChartGeometry, h: &Sym2Field, p: &Point, step: f64) -> Result<Vec<f64>> {
    let t = decimal_step(step)?;
    let dt = F::from_rational(&(t.clone() * Rational::from_i64(2)));
    let plus = curvature_sample::<F>(&perturbed_chart(chart, h, &t)?, p)?.components();
    let minus = curvature_sample::<F>(&perturbed_chart(chart, h, &-t)?, p)?.components();
    Ok(plus.into_iter().zip(minus).map(|(a, b)| ((a - b) / dt.clone()).to_f64()).collect())
}

/// Linearisations from the closed formulas, in the order of
/// [`CurvatureSample::to_vec`]. The curvature terms use the Einstein form
/// when `einstein` is set and the general chain rule otherwise.
pub fn linearized_sample<F: Scalar>(d: &DeformationData<F>, einstein: bool) -> CurvatureSample<F> {
    let lin = d.linear_curvature();
    let (square, norm) = if einstein { lin_curv_einstein_from(&d.geo.s, &d.h, &lin) } else { lin_curv_general(d, &lin) };
    CurvatureSample { ric: lin.ric, s: lin.s, square, norm }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdComparison {
    pub step: f64,
    /// `max |fd - exact| / max(1, max |exact|)` at `step`.
    pub rel_error: f64,
    /// Same at `step / 2`.
    pub rel_error_half: f64,
    /// `rel_error / rel_error_half`, near 4 for a second-order scheme.
    pub ratio: f64,
    /// Error of the Richardson combination of the two steps.
    pub richardson_error: f64,
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Compares `exact` against central differences of the pipeline evaluated
/// in `F` at `step` and `step / 2`.
pub fn compare_with_fd<F: Scalar>(chart: &ChartGeometry, h: &Sym2Field, p: &Point, exact: &[f64], step: f64) -> Result<FdComparison> {
    let coarse = directional_difference::<F>(chart, h, p, step)?;
    let fine = directional_difference::<F>(chart, h, p, step / 2.0)?;
    let rich: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
    let rel_error = rel(&coarse, exact);
    let rel_error_half = rel(&fine, exact);
    Ok(FdComparison {
        step,
        rel_error,
        rel_error_half,
        ratio: rel_error / rel_error_half,
        richardson_error: rel(&rich, exact),
    })
}

/// `nabla* nabla h - 2 R_0(h)` assembled from finite differences of the
/// metric and of `h`, with `R_0` summed from the stencil's `R_ijkl`.
pub fn fd_einstein_residual(chart: &ChartGeometry, h: &Sym2Field, p: &Point, step: f64) -> Result<Sym2<f64>> {
    let x = chart.real_coords(p);
    let st = Stencil::new(chart, step)?;
    let field = |y: [f64; 3]| h.eval_f64(y, "h");
    let rough = st.rough_laplacian_sym(x, &field)?;
    let r = st.riemann(x)?;
    let m = st.metric(x)?;
    let g = Metric3::new(Sym2::from_fn(|i, j| m[i][j]))?;
    let gi = g.inverse();
    let hv = field(x)?;
    let mut h_up = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    h_up[a][b] += gi.get(a, i) * gi.get(b, j) * hv[i][j];
                }
            }
        }
    }
    Ok(Sym2::from_fn(|x, y| {
        let mut r0 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                r0 += r[27 * i + 9 * x + 3 * y + j] * h_up[i][j];
            }
        }
        rough[x][y] - 2.0 * r0
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartfield::{Dilaton, FieldExpr};
    use crate::sample;

    fn ball() -> ChartGeometry {
        ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()))
    }

    #[test]
    fn einstein_form_matches_central_differences_on_the_ball() {
        let mut rng = sample::rng(21);
        for _ in 0..3 {
            let h = sample::poly_sym2_field(&mut rng, 2);
            let p = sample::ball_point(&mut rng);
            let d = DeformationData::<Rational>::new(&ball(), &h, &p).unwrap();
            let exact = linearized_sample(&d, true).to_vec();
            let float = compare_with_fd::<f64>(&ball(), &h, &p, &exact, 1e-4).unwrap();
            assert!(float.rel_error <= 1e-6, "{float:?}");
            // Without roundoff the halving ratio is the truncation ratio.
            let cmp = compare_with_fd::<Rational>(&ball(), &h, &p, &exact, 1e-4).unwrap();
            assert!(cmp.rel_error <= 1e-6, "{cmp:?}");
            assert!((3.5..=4.5).contains(&cmp.ratio), "{cmp:?}");
            assert!(cmp.richardson_error < 1e-12, "{cmp:?}");
        }
    }

    #[test]
    fn general_chain_rule_matches_central_differences() {
        let mut rng = sample::rng(22);
        let chart = sample::rational_function_chart(&mut rng);
        let h = sample::poly_sym2_field(&mut rng, 2);
        let p = sample::ball_point(&mut rng);
        let d = DeformationData::<f64>::new(&chart, &h, &p).unwrap();
        let exact = linearized_sample(&d, false).to_vec();
        let cmp = compare_with_fd::<f64>(&chart, &h, &p, &exact, 1e-4).unwrap();
        assert!(cmp.rel_error <= 1e-6, "{cmp:?}");
    }

    #[test]
    fn fd_residual_matches_jets_for_tt_data() {
        let mut rng = sample::rng(23);
        let p = sample::ball_point(&mut rng);
        let h = super::super::TtBasis::new(&ball(), &p).unwrap().random(&mut rng).unwrap();
        let jet = super::super::einstein_def_residual::<f64>(&ball(), &h, &p, 1e-9).unwrap();
        let fd = fd_einstein_residual(&ball(), &h, &p, 1e-4).unwrap();
        let gap = (jet.residual.clone() - fd).max_abs() / jet.residual.max_abs().max(1.0);
        assert!(gap < 1e-6, "gap {gap}");
    }
}
