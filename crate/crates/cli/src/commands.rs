//! One function per subcommand. Each returns a finished [`Report`] plus
//! any tables meant for CSV export.

use std::time::Instant;

use hetsol_core::chartfield::{ChartGeometry, Dilaton, FieldExpr, Point};
use hetsol_core::homgeo::{best_report, grid_scan, multi_start, GridScan, Iterate, LieFamily, SearchConfig, SearchReport};
use hetsol_core::linearize::{
    compare_with_fd, essential_chain, fd_einstein_residual, linearized_sample, torus_pairing_exact,
    einstein_def_residual, Deformation, DeformationData, TtBasis, VectorField,
};
use hetsol_core::sample::{self, SuiteRng};
use hetsol_core::scalar::format_rational;
use hetsol_core::soliton::{classify_constant_dilaton, harmonic_dilaton_test, harmonic_sample_test, Branch, SolitonParams};
use hetsol_core::{Error, Mode, Rational, Result, Scalar};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::SuiteConfig;
use crate::report::{Check, Record, Report};
use crate::samples::SampleSet;
use crate::suites::{random_torus, verify_sections};

pub fn verify(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("verify", cfg.seed, cfg.mode);
    let t = Instant::now();
    for sec in verify_sections(cfg) {
        rep.timings.insert(sec.name.into(), sec.seconds);
        rep.extend(sec.records);
    }
    rep.timings.insert("total".into(), t.elapsed().as_secs_f64());
    rep.payload = json!({ "trials": cfg.trials, "charts": crate::suites::chart_count(cfg.trials) });
    Ok(rep.finish())
}

fn q_text<F: Scalar>(x: &F) -> Value {
    match F::MODE {
        Mode::Exact => Value::String(x.to_string()),
        Mode::Float => json!(x.to_f64()),
    }
}

fn classify_in<F: Scalar>(kappa: F, tol: f64) -> Result<(Vec<Record>, Value)> {
    let params = SolitonParams::new(kappa.clone())?;
    let rep = classify_constant_dilaton(&params);
    let i = F::from_i64;
    let mut rel = Check::new("classify.constants", "kappa s = -24, kappa e^{2phi} = 48, kappa times Ric-factor = -8, product defect -2/kappa");
    rel.sample(
        &[
            kappa.clone() * rep.s.clone() - i(-24),
            kappa.clone() * rep.e2phi.clone() - i(48),
            kappa.clone() * rep.ricci_factor.clone() - i(-8),
            rep.hyperbolic_residue.clone(),
            kappa.clone() * rep.product_defect.clone() - i(-2),
        ],
        48.0,
        tol,
    );
    let mut branch = Check::new("classify.branch", "only the hyperbolic branch survives, with positive e^{2phi}");
    let ok = rep.branch == Branch::Hyperbolic && rep.dilaton_positive;
    branch.measured(if ok { 0.0 } else { 1.0 }, ok);
    if !rep.dilaton_positive {
        branch.note("kappa < 0 forces e^{2phi} = 48/kappa < 0: no constant-dilaton soliton");
    }
    let payload = json!({
        "kappa": q_text(&rep.kappa),
        "branch": rep.branch,
        "s": q_text(&rep.s),
        "e2phi": q_text(&rep.e2phi),
        "ricci_factor": q_text(&rep.ricci_factor),
        "hyperbolic_residue": q_text(&rep.hyperbolic_residue),
        "product_mu": q_text(&rep.product_mu),
        "product_s": q_text(&rep.product_s),
        "product_zero_residue": q_text(&rep.product_zero_residue),
        "product_defect": q_text(&rep.product_defect),
        "dilaton_positive": rep.dilaton_positive,
    });
    Ok((vec![rel.finish(), branch.finish()], payload))
}

pub fn classify(cfg: &SuiteConfig, kappa: &Rational) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("classify", cfg.seed, cfg.mode);
    let (records, payload) = match cfg.mode {
        Mode::Exact => classify_in(kappa.clone(), 0.0)?,
        Mode::Float => classify_in(kappa.to_f64(), cfg.tolerances.float)?,
    };
    rep.extend(records);
    rep.payload = json!({ "classification": payload });
    Ok(rep.finish())
}

/// Options of `linearize`.
#[derive(Clone, Debug)]
pub struct LinearizeOptions {
    pub kappa: Rational,
    pub samples: usize,
    pub step: f64,
    pub nodes: u32,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        LinearizeOptions { kappa: Rational::from_i64(1), samples: 10, step: 1e-4, nodes: 5 }
    }
}

/// One row of the finite-difference sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdRow {
    pub sample: usize,
    pub point: String,
    pub step: f64,
    pub rel_error: f64,
    pub rel_error_half: f64,
    pub float_ratio: f64,
    pub exact_rel_error: f64,
    pub exact_ratio: f64,
    pub richardson_error: f64,
}

fn point_text(p: &Point) -> String {
    p.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

fn ball() -> ChartGeometry {
    ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()))
}

fn fd_sweep<F: Scalar>(rng: &mut SuiteRng, opts: &LinearizeOptions, tol: f64, rows: &mut Vec<FdRow>) -> Vec<Record> {
    let mut rel = Check::new("linearize.fd_einstein_form", "linearised R o R and |R|^2 on the ball against central differences");
    let mut order = Check::new("linearize.fd_order", "halving the step divides the central-difference error by four");
    for k in 0..opts.samples {
        let h = sample::poly_sym2_field(rng, 2);
        let p = sample::ball_point(rng);
        let run = || -> Result<FdRow> {
            let d = DeformationData::<F>::new(&ball(), &h, &p)?;
            let exact = linearized_sample(&d, true).to_vec();
            let float = compare_with_fd::<f64>(&ball(), &h, &p, &exact, opts.step)?;
            let rational = compare_with_fd::<Rational>(&ball(), &h, &p, &exact, opts.step)?;
            Ok(FdRow {
                sample: k,
                point: point_text(&p),
                step: opts.step,
                rel_error: float.rel_error,
                rel_error_half: float.rel_error_half,
                float_ratio: float.ratio,
                exact_rel_error: rational.rel_error,
                exact_ratio: rational.ratio,
                richardson_error: rational.richardson_error,
            })
        };
        match run() {
            Ok(row) => {
                rel.measured(row.rel_error.max(row.exact_rel_error), row.rel_error <= tol && row.exact_rel_error <= tol);
                order.measured((row.exact_ratio - 4.0).abs(), (3.5..=4.5).contains(&row.exact_ratio));
                rows.push(row);
            }
            Err(e) => rel.error(&e),
        }
    }
    order.note("ratio of errors at step and step/2, differences evaluated in exact arithmetic");

    let mut general = Check::new("linearize.fd_general", "general chain rule for R o R and |R|^2 against central differences");
    for _ in 0..3 {
        let chart = sample::rational_function_chart(rng);
        let h = sample::poly_sym2_field(rng, 2);
        let p = sample::ball_point(rng);
        let run = || -> Result<f64> {
            let d = DeformationData::<F>::new(&chart, &h, &p)?;
            let exact = linearized_sample(&d, false).to_vec();
            Ok(compare_with_fd::<f64>(&chart, &h, &p, &exact, opts.step)?.rel_error)
        };
        match run() {
            Ok(e) => general.measured(e, e <= tol),
            Err(e) => general.error(&e),
        }
    }
    vec![rel.finish(), order.finish(), general.finish()]
}

fn einstein_checks<F: Scalar>(rng: &mut SuiteRng, opts: &LinearizeOptions, tol: f64, fd_tol: f64) -> Vec<Record> {
    let mut r0 = Check::new("linearize.r0_constant_curvature", "R_0(h) = -(s/6)(h - tr h g) on constant curvature");
    let mut resid = Check::new("linearize.einstein_residual_fd", "Einstein deformation operator on TT h equals rough Laplacian + (s/3) h, against FD assembly");
    for _ in 0..3 {
        let p = sample::ball_point(rng);
        let mut run = |rng: &mut SuiteRng| -> Result<()> {
            let h = TtBasis::new(&ball(), &p)?.random(rng)?;
            let rep = einstein_def_residual::<F>(&ball(), &h, &p, tol)?;
            r0.sample(&rep.r0_defect.0, rep.residual.max_abs().max(1.0) * 6.0, tol);
            let fd = fd_einstein_residual(&ball(), &h, &p, opts.step)?;
            let jet = rep.residual.map(|x| x.to_f64());
            let gap = (jet.clone() - fd).max_abs() / jet.max_abs().max(1.0);
            let cc = rep.constant_curvature_defect.max_abs() / jet.max_abs().max(1.0);
            resid.measured(gap.max(cc), gap <= fd_tol && cc <= fd_tol);
            Ok(())
        };
        if let Err(e) = run(rng) {
            resid.error(&e);
        }
    }
    vec![r0.finish(), resid.finish()]
}

#[derive(Clone, Debug, Serialize)]
struct ChainRow {
    name: &'static str,
    description: &'static str,
    value: Value,
    closed_form: String,
}

fn chain_checks<F: Scalar>(rng: &mut SuiteRng, kappa: F, tol: f64) -> Result<(Vec<Record>, Value)> {
    let mut at = Check::new("linearize.essential_chain", "essential deformations of the hyperbolic soliton are Einstein deformations");
    let ch = essential_chain(&SolitonParams::new(kappa)?, tol)?;
    let d: Vec<F> = ch.coefficients.iter().map(|c| c.value.clone() - c.closed_form.clone()).collect();
    at.sample(&d, 64.0, tol);
    let failed: Vec<_> = ch.implications.iter().filter(|i| i.status == hetsol_core::linearize::ArrowStatus::Failed).collect();
    if let Some(f) = failed.first() {
        at.measured(f64::NAN, false);
        at.note(format!("{} => {}: {}", f.from, f.to, f.detail));
    }
    let mut scaling = Check::new("linearize.essential_chain_scaling", "kappa-scaled chain coefficients are independent of kappa");
    for _ in 0..50 {
        let k = F::from_rational(&sample::kappa(rng));
        let c = essential_chain(&SolitonParams::new(k.clone())?, tol)?;
        let d: Vec<F> = c
            .coefficients
            .iter()
            .map(|c| (0..c.kappa_power).fold(c.value.clone(), |acc, _| acc * k.clone()) - F::from_i64(c.numerator))
            .collect();
        scaling.sample(&d, 64.0, tol);
    }
    let rows: Vec<ChainRow> = ch
        .coefficients
        .iter()
        .map(|c| ChainRow {
            name: c.name,
            description: c.description,
            value: q_text(&c.value),
            closed_form: match c.kappa_power {
                0 => c.numerator.to_string(),
                1 => format!("{}/kappa", c.numerator),
                n => format!("{}/kappa^{n}", c.numerator),
            },
        })
        .collect();
    let payload = json!({
        "coefficients": rows,
        "determinant": q_text(&ch.determinant),
        "trace_coercivity": q_text(&ch.trace_coercivity),
        "implications": ch.implications,
    });
    Ok((vec![at.finish(), scaling.finish()], payload))
}

fn gauge_checks(rng: &mut SuiteRng, nodes: u32) -> Vec<Record> {
    let mut c = Check::new("linearize.gauge_pairing", "L2 adjointness of the gauge map on the flat torus, exact quadrature");
    for _ in 0..3 {
        let run = |rng: &mut SuiteRng| -> Result<Rational> {
            let torus = random_torus(rng)?;
            let v = VectorField(std::array::from_fn(|_| FieldExpr::Trig(sample::trig_poly(rng, 2, 3))));
            let def = Deformation { h: sample::trig_sym2_field(rng, 2, 3), xi: FieldExpr::Trig(sample::trig_poly(rng, 2, 3)) };
            Ok(torus_pairing_exact(&torus, &v, &def, nodes)?.defect)
        };
        match run(rng) {
            Ok(d) => c.scalar(&d, 1.0, 0.0),
            Err(e) => c.error(&e),
        }
    }
    c.note(format!("{nodes} nodes per axis, Fourier degree 2"));
    vec![c.finish()]
}

/// FD sweeps on the ball, the Einstein-deformation reduction, the gauge
/// pairing and the essential-deformation chain at `opts.kappa`.
pub fn linearize(cfg: &SuiteConfig, opts: &LinearizeOptions) -> Result<(Report, Vec<FdRow>)> {
    cfg.validate()?;
    if opts.samples == 0 || !(opts.step > 0.0) {
        return Err(Error::Config("linearize: samples must be >= 1 and step > 0".into()));
    }
    let mut rep = Report::new("linearize", cfg.seed, cfg.mode);
    let mut rng = sample::rng(cfg.seed);
    let mut rows = Vec::new();
    let fd_tol = cfg.tolerances.fd;
    let t = Instant::now();
    let (records, chain) = match cfg.mode {
        Mode::Exact => {
            let mut r = fd_sweep::<Rational>(&mut rng, opts, fd_tol, &mut rows);
            r.extend(einstein_checks::<Rational>(&mut rng, opts, 0.0, fd_tol));
            let (c, payload) = chain_checks(&mut rng, opts.kappa.clone(), 0.0)?;
            r.extend(c);
            (r, payload)
        }
        Mode::Float => {
            let tol = cfg.tolerances.float;
            let mut r = fd_sweep::<f64>(&mut rng, opts, fd_tol, &mut rows);
            r.extend(einstein_checks::<f64>(&mut rng, opts, tol, fd_tol));
            let (c, payload) = chain_checks(&mut rng, opts.kappa.to_f64(), tol)?;
            r.extend(c);
            (r, payload)
        }
    };
    rep.extend(records);
    rep.extend(gauge_checks(&mut rng, opts.nodes));
    rep.timings.insert("total".into(), t.elapsed().as_secs_f64());
    rep.payload = json!({ "kappa": format_rational(&opts.kappa), "fd": rows, "essential_chain": chain });
    Ok((rep.finish(), rows))
}

/// Points used by `harmonic` when none are given.
pub fn default_points() -> Vec<Point> {
    let q = Rational::ratio;
    vec![
        [q(0, 1), q(0, 1), q(0, 1)],
        [q(1, 4), q(0, 1), q(-1, 8)],
        [q(-1, 8), q(1, 8), q(1, 4)],
    ]
}

/// What `harmonic` evaluates: a chart at sample points, or algebraic samples.
#[derive(Clone, Copy, Debug)]
pub enum HarmonicInput<'a> {
    /// `None` is the ball with `e^{2 phi} = 48/kappa`.
    Chart(Option<&'a ChartGeometry>, &'a [Point]),
    Samples(&'a SampleSet),
}

/// The harmonic-curvature reduction, one record per reduction step.
pub fn harmonic(cfg: &SuiteConfig, input: HarmonicInput<'_>, kappa: &Rational) -> Result<Report> {
    cfg.validate()?;
    let fallback;
    let result = match input {
        HarmonicInput::Chart(chart, points) => {
            let chart = match chart {
                Some(c) => c,
                None => {
                    let psi = Rational::from_i64(48) / kappa.clone();
                    fallback = ChartGeometry::poincare_ball(Dilaton::Exp2Phi(FieldExpr::constant(psi)));
                    &fallback
                }
            };
            match cfg.mode {
                Mode::Exact => harmonic_dilaton_test(chart, points, &SolitonParams::new(kappa.clone())?, 0.0),
                Mode::Float => {
                    harmonic_dilaton_test(chart, points, &SolitonParams::new(kappa.to_f64())?, cfg.tolerances.float)
                }
            }
        }
        HarmonicInput::Samples(set) => match cfg.mode {
            Mode::Exact => harmonic_sample_test(&set.to_scalar::<Rational>()?, &SolitonParams::new(kappa.clone())?, 0.0),
            Mode::Float => harmonic_sample_test(
                &set.to_scalar::<f64>()?,
                &SolitonParams::new(kappa.to_f64())?,
                cfg.tolerances.float,
            ),
        },
    };
    let mut rep = Report::new("harmonic", cfg.seed, cfg.mode);
    let anchor = "harmonic curvature with nonconstant dilaton forces the hyperbolic regime";
    match result {
        Ok(h) => {
            let mut steps = Vec::new();
            for c in &h.checks {
                if !steps.contains(&c.step) {
                    steps.push(c.step);
                }
            }
            for step in steps {
                let key = serde_json::to_value(step).expect("step names serialise");
                let name = format!("harmonic.{}", key.as_str().unwrap_or("step"));
                let mut c = Check::new(&name, step.label());
                for s in h.checks.iter().filter(|c| c.step == step) {
                    c.measured(s.defect, s.pass);
                    if !s.pass && !s.detail.is_empty() {
                        c.note(format!("sample {}: {}", s.sample, s.detail));
                    }
                }
                rep.push(c.finish());
            }
            let mut summary = Check::new("harmonic.reduction", anchor);
            summary.measured(0.0, h.passed());
            summary.note(h.summary.clone());
            rep.push(summary.finish());
            rep.payload = serde_json::to_value(&h).expect("reports serialise");
        }
        Err(e) => {
            let mut c = Check::new("harmonic.reduction", anchor);
            c.error(&e);
            rep.push(c.finish());
        }
    }
    Ok(rep.finish())
}

/// Options of `search`.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Empty means every family in the catalogue.
    pub families: Vec<String>,
    pub kappa: f64,
    pub start: [f64; 2],
    pub restarts: usize,
    pub grid: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { families: Vec::new(), kappa: 1.0, start: [1.5, 30.0], restarts: 0, grid: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistoryRow {
    pub family: String,
    pub iteration: usize,
    pub a: f64,
    pub e2phi: f64,
    pub objective: f64,
    pub damping: f64,
    pub step_norm: f64,
    pub accepted: bool,
}

impl HistoryRow {
    fn new(family: &str, it: &Iterate) -> Self {
        HistoryRow {
            family: family.into(),
            iteration: it.iteration,
            a: it.a,
            e2phi: it.e2phi,
            objective: it.objective,
            damping: it.damping,
            step_norm: it.step_norm,
            accepted: it.accepted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub family: String,
    pub a: f64,
    pub e2phi: f64,
    pub objective: f64,
}

/// Search output besides the report.
#[derive(Clone, Debug, Default)]
pub struct SearchTables {
    pub history: Vec<HistoryRow>,
    pub grid: Vec<GridRow>,
}

fn run_summary(r: &SearchReport) -> Value {
    json!({
        "start": r.start,
        "status": r.status,
        "iterations": r.iterations,
        "a": r.a,
        "e2phi": r.e2phi,
        "objective": r.objective,
        "damped_restarts": r.damped_restarts,
        "check": r.check,
    })
}

fn search_family(fam: &LieFamily, params: &SolitonParams<f64>, scfg: &SearchConfig, opts: &SearchOptions) -> Result<(Vec<Record>, Value, SearchTables)> {
    let runs = multi_start(fam, params, scfg, opts.restarts)?;
    let best = best_report(&runs).expect("at least one run");
    let anchor = "homogeneous soliton search (empirical; non-convergence is not a non-existence proof)";
    let mut solve = Check::new(&format!("search.{}", fam.name), anchor);
    match &best.check {
        Some(check) => {
            solve.measured(best.objective, check.consistent);
            solve.note(format!(
                "converged to a = {:.9}, e2phi = {:.7} in {} iterations; kappa s = {:.9}",
                best.a, best.e2phi, best.iterations, check.kappa_s
            ));
        }
        None => {
            solve.measured(best.objective, best.objective > 0.0);
            solve.note(format!(
                "{:?} after {} iterations; best objective {:e} at a = {}, e2phi = {}",
                best.status, best.iterations, best.objective, best.a, best.e2phi
            ));
        }
    }
    let grid: GridScan = grid_scan(fam, params, opts.grid)?;
    let mut g = Check::new(&format!("search.{}.grid", fam.name), anchor);
    g.measured(grid.min_objective, grid.all_positive() || best.converged());
    g.note(format!("{0}x{0} grid minimum {1:e} at a = {2}, e2phi = {3}", opts.grid, grid.min_objective, grid.argmin[0], grid.argmin[1]));

    let mut tables = SearchTables::default();
    tables.history = best.history.iter().map(|it| HistoryRow::new(&fam.name, it)).collect();
    for (i, a) in grid.a.iter().enumerate() {
        for (j, p) in grid.e2phi.iter().enumerate() {
            tables.grid.push(GridRow { family: fam.name.clone(), a: *a, e2phi: *p, objective: grid.objective[i][j] });
        }
    }
    let payload = json!({
        "family": fam.name,
        "best": run_summary(best),
        "runs": runs.iter().map(run_summary).collect::<Vec<_>>(),
        "grid": { "n": opts.grid, "min_objective": grid.min_objective, "argmin": grid.argmin },
    });
    Ok((vec![solve.finish(), g.finish()], payload, tables))
}

/// Levenberg-Marquardt runs and objective grids over catalogue families.
pub fn search(cfg: &SuiteConfig, opts: &SearchOptions) -> Result<(Report, SearchTables)> {
    cfg.validate()?;
    let catalogue = cfg.catalogue()?;
    let families: Vec<&LieFamily> = if opts.families.is_empty() {
        catalogue.families.iter().collect()
    } else {
        opts.families.iter().map(|n| catalogue.get(n)).collect::<Result<_>>()?
    };
    let params = SolitonParams::new(opts.kappa)?;
    let scfg = SearchConfig { start: opts.start, tolerance: cfg.tolerances.search, seed: cfg.seed, ..SearchConfig::default() };
    scfg.validate()?;
    let mut rep = Report::new("search", cfg.seed, Mode::Float);
    let mut tables = SearchTables::default();
    let mut payload = Vec::new();
    for fam in families {
        let t = Instant::now();
        let (records, p, tab) = search_family(fam, &params, &scfg, opts)?;
        rep.timings.insert(fam.name.clone(), t.elapsed().as_secs_f64());
        rep.extend(records);
        payload.push(p);
        tables.history.extend(tab.history);
        tables.grid.extend(tab.grid);
    }
    rep.payload = json!({ "kappa": opts.kappa, "config": scfg, "families": payload });
    Ok((rep.finish(), tables))
}
