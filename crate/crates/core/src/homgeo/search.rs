use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::family::LieFamily;
use super::geometry::{lie_geometry, residual_vector};
use crate::algebra3::eigen_report;
use crate::error::{Error, Result};
use crate::sample::SuiteRng;
use crate::soliton::{classify_constant_dilaton, Branch, SolitonParams};

const MAX_DAMPING: f64 = 1e16;

/// Levenberg-Marquardt settings. The unknowns are `(a, ln e^{2 phi})`,
/// kept inside the family's bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Starting `(a, e^{2 phi})`.
    pub start: [f64; 2],
    pub damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub max_iterations: usize,
    /// Convergence needs the objective at or below this.
    pub tolerance: f64,
    /// ... and the proposed step below this.
    pub step_tolerance: f64,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Drives the random starts of [`multi_start`].
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            start: [1.5, 30.0],
            damping: 1e-3,
            damping_up: 10.0,
            damping_down: 10.0,
            max_iterations: 200,
            tolerance: 1e-20,
            step_tolerance: 1e-12,
            fd_step: 1e-6,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.damping, self.tolerance, self.step_tolerance, self.fd_step];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config("damping, tolerances and fd_step must be positive".into()));
        }
        if !(self.damping_up > 1.0 && self.damping_down > 1.0) {
            return Err(Error::Config("damping factors must exceed 1".into()));
        }
        if self.start[1] <= 0.0 {
            return Err(Error::NonpositiveDilaton(self.start[1].to_string()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Converged,
    MaxIterations,
    SingularJacobian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Iterate {
    pub iteration: usize,
    pub a: f64,
    pub e2phi: f64,
    pub objective: f64,
    pub damping: f64,
    pub step_norm: f64,
    pub accepted: bool,
}

/// Checks at a converged point: the Ricci eigenvalues should all be `s/3`
/// with `kappa s = -24` and `e^{2 phi} = 48/kappa`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionCheck {
    pub ricci_eigenvalues: [f64; 3],
    pub s: f64,
    pub kappa_s: f64,
    pub harmonic_defect: f64,
    pub einstein_defect: f64,
    pub e2phi_defect: f64,
    pub classified_branch: Branch,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub family: String,
    pub kappa: f64,
    pub start: [f64; 2],
    pub status: SearchStatus,
    pub iterations: usize,
    pub a: f64,
    pub e2phi: f64,
    pub objective: f64,
    /// Times the normal equations were singular and the damping was raised.
    pub damped_restarts: usize,
    pub history: Vec<Iterate>,
    pub check: Option<SolutionCheck>,
}

impl SearchReport {
    pub fn converged(&self) -> bool {
        self.status == SearchStatus::Converged
    }

    /// The report as an error when the run did not converge.
    pub fn into_result(self) -> Result<SearchReport> {
        match self.status {
            SearchStatus::Converged => Ok(self),
            SearchStatus::MaxIterations => Err(Error::MaxIterations { iterations: self.iterations, best: self.objective }),
            SearchStatus::SingularJacobian => Err(Error::SingularJacobian(MAX_DAMPING)),
        }
    }
}

struct Problem<'a> {
    fam: &'a LieFamily,
    params: &'a SolitonParams<f64>,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Problem<'_> {
    fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].clamp(self.lo[0], self.hi[0]), x[1].clamp(self.lo[1], self.hi[1])]
    }

    fn residual(&self, x: [f64; 2]) -> Result<Vec<f64>> {
        residual_vector(self.fam, x[0], x[1].exp(), self.params)
    }

    fn jacobian(&self, x: [f64; 2], rel: f64) -> Result<Vec<[f64; 2]>> {
        let mut cols = Vec::with_capacity(2);
        for k in 0..2 {
            let h = rel * x[k].abs().max(1.0);
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (self.residual(xp)?, self.residual(xm)?);
            cols.push(rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<_>>());
        }
        Ok((0..cols[0].len()).map(|i| [cols[0][i], cols[1][i]]).collect())
    }
}

fn objective(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Damped Gauss-Newton on the residual vector of the soliton system over a
/// homogeneous family. Never fails on non-convergence; the status says so.
pub fn lm_solve(fam: &LieFamily, params: &SolitonParams<f64>, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let b = &fam.bounds;
    let prob = Problem { fam, params, lo: [b.a[0], b.e2phi[0].ln()], hi: [b.a[1], b.e2phi[1].ln()] };
    let mut x = [cfg.start[0], cfg.start[1].ln()];
    if prob.clamp(x) != x {
        return Err(Error::Config(format!(
            "start ({}, {}) lies outside the bounds of `{}`",
            cfg.start[0], cfg.start[1], fam.name
        )));
    }
    let mut r = prob.residual(x)?;
    let mut obj = objective(&r);
    let mut lambda = cfg.damping;
    let mut history = Vec::new();
    let mut damped_restarts = 0;
    let mut status = SearchStatus::MaxIterations;

    for iteration in 0..=cfg.max_iterations {
        let jac = prob.jacobian(x, cfg.fd_step)?;
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (row, ri) in jac.iter().zip(&r) {
            let v = Vector2::new(row[0], row[1]);
            jtj += v * v.transpose();
            jtr += v * *ri;
        }
        let Some(step) = (jtj + Matrix2::identity() * lambda).lu().solve(&(-jtr)) else {
            damped_restarts += 1;
            lambda *= cfg.damping_up;
            if lambda > MAX_DAMPING {
                status = SearchStatus::SingularJacobian;
                break;
            }
            continue;
        };
        let trial = prob.clamp([x[0] + step[0], x[1] + step[1]]);
        let step_norm = ((trial[0] - x[0]).powi(2) + (trial[1] - x[1]).powi(2)).sqrt();
        if obj <= cfg.tolerance && step_norm < cfg.step_tolerance {
            status = SearchStatus::Converged;
            break;
        }
        if iteration == cfg.max_iterations {
            break;
        }
        let r_trial = prob.residual(trial)?;
        let obj_trial = objective(&r_trial);
        let ok = obj_trial < obj;
        if ok {
            x = trial;
            r = r_trial;
            obj = obj_trial;
            lambda /= cfg.damping_down;
        } else {
            lambda = (lambda * cfg.damping_up).min(MAX_DAMPING);
        }
        history.push(Iterate {
            iteration: iteration + 1,
            a: x[0],
            e2phi: x[1].exp(),
            objective: obj,
            damping: lambda,
            step_norm,
            accepted: ok,
        });
    }
    let (a, e2phi) = (x[0], x[1].exp());
    let check = match status {
        SearchStatus::Converged => Some(solution_check(fam, params, a, e2phi)?),
        _ => None,
    };
    Ok(SearchReport {
        family: fam.name.clone(),
        kappa: params.kappa,
        start: cfg.start,
        status,
        iterations: history.len(),
        a,
        e2phi,
        objective: obj,
        damped_restarts,
        history,
        check,
    })
}

/// Cross-checks a solution against the constant-dilaton classification.
pub fn solution_check(fam: &LieFamily, params: &SolitonParams<f64>, a: f64, e2phi: f64) -> Result<SolutionCheck> {
    let (geo, der) = lie_geometry(fam, &a, Some(e2phi))?;
    let eig = eigen_report(&geo.metric, &geo.ric)?;
    let cls = classify_constant_dilaton(params);
    let third = geo.s / 3.0;
    let scale = geo.s.abs().max(1.0);
    let einstein_defect = eig.deviation_from([third; 3]) / scale;
    let kappa_s = params.kappa * geo.s;
    let e2phi_defect = (e2phi - cls.e2phi).abs();
    let harmonic_defect = der.dstar_r.max_abs();
    let consistent = cls.branch == Branch::Hyperbolic
        && einstein_defect < 1e-6
        && (kappa_s + 24.0).abs() < 1e-6 * scale
        && e2phi_defect < 1e-4 * cls.e2phi.abs().max(1.0)
        && harmonic_defect < 1e-6 * scale;
    Ok(SolutionCheck {
        ricci_eigenvalues: eig.eigenvalues,
        s: geo.s,
        kappa_s,
        harmonic_defect,
        einstein_defect,
        e2phi_defect,
        classified_branch: cls.branch,
        consistent,
    })
}

/// `cfg.start` plus `extra` starts drawn from the bounds (`e^{2 phi}`
/// log-uniform) with `cfg.seed`, solved on separate threads. Reports come
/// back in start order.
pub fn multi_start(fam: &LieFamily, params: &SolitonParams<f64>, cfg: &SearchConfig, extra: usize) -> Result<Vec<SearchReport>> {
    let mut rng = SuiteRng::seed_from_u64(cfg.seed);
    let b = &fam.bounds;
    let mut starts = vec![cfg.start];
    for _ in 0..extra {
        let a = rng.gen_range(b.a[0]..=b.a[1]);
        let e2phi = rng.gen_range(b.e2phi[0].ln()..=b.e2phi[1].ln()).exp();
        starts.push([a, e2phi]);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .iter()
            .map(|&start| {
                let cfg = SearchConfig { start, ..cfg.clone() };
                scope.spawn(move || lm_solve(fam, params, &cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    })
}

/// The solved run with the smallest objective, or the smallest objective overall.
pub fn best_report(reports: &[SearchReport]) -> Option<&SearchReport> {
    reports.iter().min_by(|x, y| {
        (!x.converged()).cmp(&!y.converged()).then(x.objective.total_cmp(&y.objective))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridScan {
    pub family: String,
    pub a: Vec<f64>,
    pub e2phi: Vec<f64>,
    /// `objective[i][j]` at `(a[i], e2phi[j])`.
    pub objective: Vec<Vec<f64>>,
    pub min_objective: f64,
    pub argmin: [f64; 2],
}

impl GridScan {
    pub fn all_positive(&self) -> bool {
        self.min_objective > 0.0
    }
}

/// Objective on an `n x n` grid over the family bounds, `a` linear and
/// `e^{2 phi}` logarithmic.
pub fn grid_scan(fam: &LieFamily, params: &SolitonParams<f64>, n: usize) -> Result<GridScan> {
    if n < 2 {
        return Err(Error::Config("grid needs at least two points per axis".into()));
    }
    let b = &fam.bounds;
    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    let a: Vec<f64> = (0..n).map(|k| lin(b.a[0], b.a[1], k)).collect();
    let e2phi: Vec<f64> = (0..n).map(|k| lin(b.e2phi[0].ln(), b.e2phi[1].ln(), k).exp()).collect();
    let mut objective = Vec::with_capacity(n);
    let (mut min_objective, mut argmin) = (f64::INFINITY, [0.0; 2]);
    for &ai in &a {
        let mut row = Vec::with_capacity(n);
        for &pj in &e2phi {
            let v = objective_f64(fam, params, ai, pj)?;
            if v < min_objective {
                min_objective = v;
                argmin = [ai, pj];
            }
            row.push(v);
        }
        objective.push(row);
    }
    Ok(GridScan { family: fam.name.clone(), a, e2phi, objective, min_objective, argmin })
}

fn objective_f64(fam: &LieFamily, params: &SolitonParams<f64>, a: f64, e2phi: f64) -> Result<f64> {
    super::geometry::soliton_objective(fam, &a, &e2phi, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homgeo::Catalogue;

    fn kappa_one() -> SolitonParams<f64> {
        SolitonParams::new(1.0).unwrap()
    }

    fn family(name: &str) -> LieFamily {
        Catalogue::builtin().get(name).unwrap().clone()
    }

    #[test]
    fn recovers_the_hyperbolic_soliton() {
        let rep = lm_solve(&family("hyperbolic-solvable"), &kappa_one(), &SearchConfig::default()).unwrap();
        assert!(rep.converged(), "{:?}", rep.status);
        assert!((rep.a - 2.0).abs() < 1e-6 && (rep.e2phi - 48.0).abs() < 1e-4, "{} {}", rep.a, rep.e2phi);
        assert!(rep.objective < 1e-10);
        assert!(rep.iterations < 200);
        let check = rep.check.unwrap();
        assert!(check.consistent, "{check:?}");
    }

    #[test]
    fn exact_start_takes_no_iterations() {
        let cfg = SearchConfig { start: [2.0, 48.0], ..SearchConfig::default() };
        let rep = lm_solve(&family("hyperbolic-solvable"), &kappa_one(), &cfg).unwrap();
        assert!(rep.converged());
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn heisenberg_does_not_converge() {
        let rep = lm_solve(&family("heisenberg"), &kappa_one(), &SearchConfig::default()).unwrap();
        assert_eq!(rep.status, SearchStatus::MaxIterations);
        assert!(rep.objective > 0.0);
        assert!(matches!(rep.into_result(), Err(Error::MaxIterations { .. })));
    }

    #[test]
    fn other_kappa_moves_the_solution() {
        let params = SolitonParams::new(2.0).unwrap();
        let cfg = SearchConfig { start: [1.2, 20.0], ..SearchConfig::default() };
        let rep = lm_solve(&family("hyperbolic-solvable"), &params, &cfg).unwrap();
        assert!(rep.converged());
        // s = -6 a^2 = -24/kappa.
        assert!((rep.a - 2f64.sqrt()).abs() < 1e-6 && (rep.e2phi - 24.0).abs() < 1e-4);
    }

    #[test]
    fn multi_start_is_deterministic() {
        let fam = family("hyperbolic-solvable");
        let cfg = SearchConfig { seed: 3, ..SearchConfig::default() };
        let one = multi_start(&fam, &kappa_one(), &cfg, 3).unwrap();
        let two = multi_start(&fam, &kappa_one(), &cfg, 3).unwrap();
        assert_eq!(one, two);
        let best = best_report(&one).unwrap();
        assert!(best.converged());
    }

    #[test]
    fn grids_exclude_flat_and_nilpotent_families() {
        for name in ["abelian", "heisenberg"] {
            let scan = grid_scan(&family(name), &kappa_one(), 20).unwrap();
            assert!(scan.all_positive(), "{name}: {}", scan.min_objective);
        }
        let scan = grid_scan(&family("hyperbolic-solvable"), &kappa_one(), 20).unwrap();
        assert_eq!(scan.objective.len(), 20);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let fam = family("abelian");
        let bad = SearchConfig { tolerance: 0.0, ..SearchConfig::default() };
        assert!(matches!(lm_solve(&fam, &kappa_one(), &bad), Err(Error::Config(_))));
        let outside = SearchConfig { start: [10.0, 30.0], ..SearchConfig::default() };
        assert!(matches!(lm_solve(&fam, &kappa_one(), &outside), Err(Error::Config(_))));
    }
}
