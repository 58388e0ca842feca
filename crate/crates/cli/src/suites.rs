//! The identity suites behind `verify`.
//!
//! Each section draws its instances from its own seeded stream, so the
//! sections can run on separate threads and still replay exactly.

use std::time::Instant;

use hetsol_core::algebra3::{
    curv_norm, curv_square, kn_product, ricci_contract, riemann_from_ricci, two_form_action, SYM_INDEX, SYM_PAIRS,
};
use hetsol_core::chartfield::{bianchi_defect, packets, ChartGeometry, Dilaton, FieldExpr, Point};
use hetsol_core::homgeo::{soliton_residual, Catalogue};
use hetsol_core::jet::Jet;
use hetsol_core::linearize::{
    essential_chain, lin_curv_general, lin_curv_norm_via_ricci, scalar_trace_defect, torus_pairing_exact,
    Deformation, DeformationData, TtBasis, VectorField, einstein_def_residual, lin_curv_einstein_from,
};
use hetsol_core::oracle::{bivector_action_full, curv_norm_full, curv_square_full, curvature_symmetry_defect, kn_full, ricci_full};
use hetsol_core::sample::{self, SuiteRng};
use hetsol_core::soliton::{
    classify_constant_dilaton, formulation_defects, residuals_from, residuals_v2_from, scalar_identity_from,
    ym_trace_defect_from, SolitonParams,
};
use hetsol_core::{Error, Mode, Rational, Result, Scalar};

use crate::config::SuiteConfig;
use crate::report::{Check, Record};

/// Records of one section and its wall-clock time.
pub struct Section {
    pub name: &'static str,
    pub records: Vec<Record>,
    pub seconds: f64,
}

fn timed(name: &'static str, f: impl FnOnce() -> Vec<Record>) -> Section {
    let t = Instant::now();
    let records = f();
    Section { name, records, seconds: t.elapsed().as_secs_f64() }
}

fn section_rng(seed: u64, section: u64) -> SuiteRng {
    sample::rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(section))
}

/// Number of random charts for a given trial count; each gets five points.
pub fn chart_count(trials: usize) -> usize {
    (trials / 10).max(20)
}

pub const POINTS_PER_CHART: usize = 5;

/// Pointwise curvature dictionary against brute-force index contractions.
pub fn algebra_suite<F: Scalar>(seed: u64, trials: usize, tol: f64) -> Vec<Record> {
    let mut rng = section_rng(seed, 1);
    let mut round_trip = Check::new("algebra.ricci_round_trip", "curvature from (g, Ric, s) contracts back to Ric and s");
    let mut symmetries = Check::new("algebra.curvature_symmetries", "curvature from (g, Ric, s) is an algebraic curvature tensor");
    let mut kn = Check::new("algebra.kn_product", "Kulkarni-Nomizu product against the index definition");
    let mut action = Check::new("algebra.two_form_action", "closed form of R(v1, v2) against the operator action");
    let mut square = Check::new("algebra.curv_square", "closed form of R o R against the definitional contraction");
    let mut norm = Check::new("algebra.curv_norm", "closed form of |R|^2 against (1/4) sum of squared components");
    for _ in 0..trials {
        let g = sample::metric(&mut rng);
        let ric = sample::sym2(&mut rng);
        let b = sample::sym2(&mut rng);
        let (v1, v2) = (sample::vec3(&mut rng), sample::vec3(&mut rng));
        let Ok(g) = g.map(F::from_rational) else {
            round_trip.error(&Error::SingularMetric("sampled metric".into()));
            continue;
        };
        let ric = ric.map(F::from_rational);
        let b = b.map(F::from_rational);
        let (v1, v2) = (v1.map(F::from_rational), v2.map(F::from_rational));
        let s = g.trace(&ric);
        let scale = ric.max_abs().max(1.0).powi(2) * g.form().max_abs().max(1.0).powi(4);

        let r = riemann_from_ricci(&g, &ric, &s);
        let full = r.to_components();
        let ginv = g.inverse().to_matrix();
        let (ric2, s2) = ricci_full(&full, &ginv);
        let mut d: Vec<F> = SYM_PAIRS.iter().zip(&ric.0).map(|(&(i, j), x)| ric2[i][j].clone() - x.clone()).collect();
        d.push(s2 - s.clone());
        let (ric3, s3) = ricci_contract(&r, &g);
        d.extend((ric3 - ric.clone()).0);
        d.push(s3 - s.clone());
        round_trip.sample(&d, scale, tol);
        symmetries.scalar(&curvature_symmetry_defect(&full), scale, tol);

        let kn_fast = kn_product(&ric, &b, &g).to_components();
        let kn_slow = kn_full(&ric.to_matrix(), &b.to_matrix());
        let d: Vec<F> = kn_fast.iter().zip(&kn_slow).map(|(x, y)| x.clone() - y.clone()).collect();
        kn.sample(&d, scale, tol);

        let w = two_form_action(&g, &ric, &s, &v1, &v2);
        let w_slow = bivector_action_full(&full, &v1.0, &v2.0);
        let d: Vec<F> = (0..9).map(|k| w.component(k / 3, k % 3) - w_slow[k / 3][k % 3].clone()).collect();
        action.sample(&d, scale * v1.max_abs().max(1.0) * v2.max_abs().max(1.0), tol);

        let sq = curv_square(&g, &ric, &s);
        let sq_slow = curv_square_full(&full, &ginv);
        let d: Vec<F> = (0..9).map(|k| sq.get(k / 3, k % 3).clone() - sq_slow[k / 3][k % 3].clone()).collect();
        square.sample(&d, scale * scale, tol);
        norm.scalar(&(curv_norm(&g, &ric, &s) - curv_norm_full(&full, &ginv)), scale * scale, tol);
    }
    [round_trip, symmetries, kn, action, square, norm].into_iter().map(Check::finish).collect()
}

/// `delta d phi` in divergence form, `-(det g)^{-1/2} d_a((det g)^{1/2} g^{ab} d_b phi)`,
/// from coordinate jets alone.
pub fn divergence_form_laplacian<F: Scalar>(chart: &ChartGeometry, p: &Point) -> Result<F> {
    let at = chart.coords::<F>(p)?;
    let g = chart.metric_jets(&at, 2)?;
    let phi = chart.dilaton_jet(&at, 2)?.shifted;
    let m = |i: usize, j: usize| &g[SYM_INDEX[i % 3][j % 3]];
    let cof = |i: usize, j: usize| m(i + 1, j + 1).mul(m(i + 2, j + 2)).sub(&m(i + 1, j + 2).mul(m(i + 2, j + 1)));
    let det = (0..3).fold(Jet::zero(2), |acc, j| acc.add(&m(0, j).mul(&cof(0, j))));
    let inv_det = det.recip().ok_or_else(|| Error::SingularMetric("metric jet at the point".into()))?;
    let dphi: Vec<Jet<F>> = (0..3).map(|b| phi.derivative(b)).collect::<Result<_>>()?;
    let mut div = F::zero();
    for a in 0..3 {
        let v = (0..3).fold(Jet::zero(1), |acc, b| acc.add(&cof(a, b).mul(&inv_det).mul(&dphi[b])));
        let mut e = [0; 3];
        e[a] = 1;
        div += v.partial(e)? + det.partial(e)? / det.value().clone() * v.value().clone() * F::ratio(1, 2);
    }
    Ok(-div)
}

/// Differential identities and the soliton formulations on random
/// rational-function charts, five points each.
pub fn chart_suite<F: Scalar>(seed: u64, trials: usize, tol: f64) -> Vec<Record> {
    let mut rng = section_rng(seed, 2);
    let mut bianchi = Check::new("chartfield.contracted_bianchi", "contracted second Bianchi identity d*R(v1,v2,v3) = dRic(v2,v3,v1)");
    let mut laplace = Check::new("chartfield.dilaton_laplacian", "delta d phi = -tr nabla d phi against the divergence form");
    let mut f_dil = Check::new("soliton.formulation_dilaton", "second form dilaton residual equals tr E - 2 D");
    let mut f_ein = Check::new("soliton.formulation_einstein", "second form Einstein residual equals E - (1/3)(tr E + D) g");
    let mut f_ym = Check::new("soliton.formulation_yang_mills", "Yang-Mills residual agrees in both forms");
    let mut ym_trace = Check::new("soliton.ym_trace", "trace of the Yang-Mills residual equals Ric(d phi) - ds/2");
    let mut scalar = Check::new("soliton.scalar_identity", "scalar identity tying the trace of E to D");
    for _ in 0..chart_count(trials) {
        let chart = sample::rational_function_chart(&mut rng);
        let params = SolitonParams::new(F::from_rational(&sample::kappa(&mut rng))).expect("positive kappa");
        for _ in 0..POINTS_PER_CHART {
            let p = sample::ball_point(&mut rng);
            let (geo, der) = match packets::<F>(&chart, &p) {
                Ok(x) => x,
                Err(e) => {
                    bianchi.error(&e);
                    continue;
                }
            };
            let scale = geo.ric.max_abs().max(der.dstar_r.max_abs()).max(1.0);
            bianchi.sample(&bianchi_defect(&der).0, scale, tol);
            match divergence_form_laplacian::<F>(&chart, &p) {
                Ok(v) => laplace.scalar(&(v - der.delta_dphi.clone()), der.hess_phi.max_abs().max(1.0), tol),
                Err(e) => laplace.error(&e),
            }
            let both = residuals_from(&geo, &der, &params).and_then(|v1| Ok((residuals_v2_from(&geo, &der, &params)?, v1)));
            match both {
                Ok((v2, v1)) => {
                    let fd = formulation_defects(&geo, &v1, &v2);
                    let rs = v1.max_abs().max(1.0) * scale;
                    f_dil.scalar(&fd.dilaton, rs, tol);
                    f_ein.sample(&fd.einstein.0, rs, tol);
                    f_ym.sample(&fd.yang_mills.0, rs, tol);
                }
                Err(e) => f_dil.error(&e),
            }
            ym_trace.sample(&ym_trace_defect_from(&geo, &der).0, scale, tol);
            match scalar_identity_from(&geo, &der, &params) {
                Ok(v) => scalar.scalar(&v, scale * scale, tol),
                Err(e) => scalar.error(&e),
            }
        }
    }
    [bianchi, laplace, f_dil, f_ein, f_ym, ym_trace, scalar].into_iter().map(Check::finish).collect()
}

/// Constants of the constant-dilaton classification, at `kappa = 1` and
/// scaled by `kappa` for random couplings.
pub fn classify_suite<F: Scalar>(seed: u64, tol: f64) -> Vec<Record> {
    let mut rng = section_rng(seed, 3);
    let mut unit = Check::new(
        "classify.kappa_one",
        "kappa = 1: s = -24, e^{2phi} = 48, Ric = -8 g, zero hyperbolic residue, product defect -2",
    );
    let rep = classify_constant_dilaton(&SolitonParams::new(F::one()).expect("nonzero"));
    let i = F::from_i64;
    unit.sample(
        &[
            rep.s.clone() - i(-24),
            rep.e2phi.clone() - i(48),
            rep.ricci_factor.clone() - i(-8),
            rep.hyperbolic_residue.clone(),
            rep.product_defect.clone() - i(-2),
        ],
        48.0,
        tol,
    );
    let mut scaling = Check::new("classify.kappa_scaling", "kappa s, kappa e^{2phi}, kappa Ric-factor and kappa times the product defect are kappa-free");
    for _ in 0..50 {
        let k = F::from_rational(&sample::kappa(&mut rng));
        let rep = classify_constant_dilaton(&SolitonParams::new(k.clone()).expect("positive kappa"));
        scaling.sample(
            &[
                k.clone() * rep.s - i(-24),
                k.clone() * rep.e2phi - i(48),
                k.clone() * rep.ricci_factor - i(-8),
                rep.hyperbolic_residue,
                k * rep.product_defect - i(-2),
            ],
            48.0,
            tol,
        );
    }
    vec![unit.finish(), scaling.finish()]
}

/// Residuals of the hyperbolic solvable family at the soliton point.
pub fn background_suite<F: Scalar>(tol: f64) -> Vec<Record> {
    let mut c = Check::new("homgeo.hyperbolic_background", "hyperbolic background with kappa = 1, e^{2phi} = 48 solves the system");
    let fam = Catalogue::builtin().get("hyperbolic-solvable").expect("built-in family").clone();
    match soliton_residual(&fam, &F::from_i64(2), &F::from_i64(48), &SolitonParams::new(F::one()).expect("nonzero")) {
        Ok(res) => {
            let mut all = res.e.0.to_vec();
            all.extend(res.ym.0.iter().cloned());
            all.push(res.d.clone());
            c.sample(&all, 48.0, tol);
            c.note(format!(
                "|E|^2 = {}, |YM|^2 = {}, D^2 = {}",
                res.e_norm_sq.to_f64(),
                res.ym_norm_sq.to_f64(),
                res.d_sq.to_f64()
            ));
        }
        Err(e) => c.error(&e),
    }
    vec![c.finish()]
}

fn ball() -> ChartGeometry {
    ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()))
}

/// Pointwise identities of the linearised operators.
pub fn linearize_suite<F: Scalar>(seed: u64, tol: f64) -> Vec<Record> {
    let mut rng = section_rng(seed, 4);
    let mut trace = Check::new("linearize.scalar_trace", "ds(h) = tr dRic(h) - <h, Ric> on any background");
    let mut norm = Check::new("linearize.norm_chain_rule", "d|R|^2(h) from R o R agrees with the Ricci form");
    let mut einstein = Check::new("linearize.einstein_form", "on the ball the general linearisation reduces to the Einstein form");
    for _ in 0..3 {
        let chart = sample::rational_function_chart(&mut rng);
        let h = sample::poly_sym2_field(&mut rng, 2);
        let p = sample::ball_point(&mut rng);
        match DeformationData::<F>::new(&chart, &h, &p) {
            Ok(d) => {
                let lin = d.linear_curvature();
                let scale = lin.ric.max_abs().max(1.0) * d.geo.ric.max_abs().max(1.0);
                trace.scalar(&scalar_trace_defect(&d, &lin), scale, tol);
                let (_, n) = lin_curv_general(&d, &lin);
                norm.scalar(&(n - lin_curv_norm_via_ricci(&d, &lin)), scale * scale, tol);
            }
            Err(e) => trace.error(&e),
        }
    }
    for _ in 0..2 {
        let h = sample::poly_sym2_field(&mut rng, 2);
        let p = sample::ball_point(&mut rng);
        match DeformationData::<F>::new(&ball(), &h, &p) {
            Ok(d) => {
                let lin = d.linear_curvature();
                let (sq, n) = lin_curv_general(&d, &lin);
                let (sq_e, n_e) = lin_curv_einstein_from(&d.geo.s, &d.h, &lin);
                let mut diff = (sq - sq_e).0.to_vec();
                diff.push(n - n_e);
                einstein.sample(&diff, lin.ric.max_abs().max(1.0) * 36.0, tol);
            }
            Err(e) => einstein.error(&e),
        }
    }

    let mut r0 = Check::new("linearize.r0_constant_curvature", "R_0(h) = -(s/6)(h - tr h g) on constant curvature");
    let mut reduction = Check::new("linearize.einstein_reduction", "for TT h, dRic(h) reduces to the Einstein deformation operator");
    let p = sample::ball_point(&mut rng);
    match TtBasis::new(&ball(), &p).and_then(|b| b.random(&mut rng)) {
        Ok(h) => match einstein_def_residual::<F>(&ball(), &h, &p, tol) {
            Ok(rep) => {
                let scale = rep.residual.max_abs().max(1.0) * 6.0;
                r0.sample(&rep.r0_defect.0, scale, tol);
                let mut all = rep.reduction_defect.0.to_vec();
                all.extend(rep.constant_curvature_defect.0.iter().cloned());
                reduction.sample(&all, scale, tol);
            }
            Err(e) => reduction.error(&e),
        },
        Err(e) => reduction.error(&e),
    }

    let mut chain = Check::new("linearize.essential_chain", "essential deformations of the hyperbolic soliton are Einstein deformations");
    match essential_chain(&SolitonParams::new(F::one()).expect("nonzero"), tol) {
        Ok(ch) => {
            let d: Vec<F> = ch.coefficients.iter().map(|c| c.value.clone() - c.closed_form.clone()).collect();
            chain.sample(&d, 64.0, tol);
            if !ch.passed() {
                chain.measured(f64::NAN, false);
                chain.note("an implication failed");
            }
        }
        Err(e) => chain.error(&e),
    }

    let mut pairing = Check::new("linearize.gauge_pairing", "L2 adjointness of the gauge map on the flat torus, exact quadrature");
    // Exact quadrature in both modes: the integrands are trigonometric
    // polynomials with rational coefficients.
    pairing_sample(&mut rng, &mut pairing);
    [trace, norm, einstein, r0, reduction, chain, pairing].into_iter().map(Check::finish).collect()
}

fn pairing_sample(rng: &mut SuiteRng, check: &mut Check) {
    let torus = match random_torus(rng) {
        Ok(t) => t,
        Err(e) => return check.error(&e),
    };
    let v = VectorField(std::array::from_fn(|_| FieldExpr::Trig(sample::trig_poly(rng, 2, 3))));
    let def = Deformation { h: sample::trig_sym2_field(rng, 2, 3), xi: FieldExpr::Trig(sample::trig_poly(rng, 2, 3)) };
    match torus_pairing_exact(&torus, &v, &def, 5) {
        Ok(rep) => check.scalar::<Rational>(&rep.defect, 1.0, 0.0),
        Err(e) => check.error(&e),
    }
}

/// Flat torus with a random constant metric and a trigonometric dilaton.
pub fn random_torus(rng: &mut SuiteRng) -> Result<ChartGeometry> {
    let g = sample::metric(rng);
    let comps: [Rational; 6] = g.form().0.clone();
    ChartGeometry::flat_torus(comps, Dilaton::Phi(FieldExpr::Trig(sample::trig_poly(rng, 2, 3))))
}

/// Runs every section of `verify` in `F`, one thread per section.
pub fn verify_in<F: Scalar>(cfg: &SuiteConfig) -> Vec<Section> {
    let (seed, trials, tol) = (cfg.seed, cfg.trials, cfg.tolerances.float);
    std::thread::scope(|s| {
        let handles = vec![
            s.spawn(move || timed("algebra", || algebra_suite::<F>(seed, trials, tol))),
            s.spawn(move || timed("charts", || chart_suite::<F>(seed, trials, tol))),
            s.spawn(move || timed("classify", || classify_suite::<F>(seed, tol))),
            s.spawn(move || timed("background", || background_suite::<F>(tol))),
            s.spawn(move || timed("linearize", || linearize_suite::<F>(seed, tol))),
        ];
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    })
}

pub fn verify_sections(cfg: &SuiteConfig) -> Vec<Section> {
    match cfg.mode {
        Mode::Exact => verify_in::<Rational>(cfg),
        Mode::Float => verify_in::<f64>(cfg),
    }
}
