use serde::Serialize;

use super::residual::SolitonParams;
use crate::algebra3::{eigen_report, harmonic_ricci_reduction, Metric3, Sym2, Tensor3, Vec3};
use crate::chartfield::{packets, ChartGeometry, DerivativePacket, GeometryPacket, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pointwise data consumed by [`harmonic_sample_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicSample<F> {
    pub metric: Metric3<F>,
    pub ric: Sym2<F>,
    pub s: F,
    pub dphi: Vec3<F>,
    pub e2phi: F,
    pub dstar_r: Tensor3<F>,
}

impl<F: Scalar> HarmonicSample<F> {
    /// Algebraic sample with harmonic curvature assumed (`d*R = 0`).
    pub fn new(metric: Metric3<F>, ric: Sym2<F>, dphi: Vec3<F>, e2phi: F) -> Self {
        let s = metric.trace(&ric);
        HarmonicSample { metric, ric, s, dphi, e2phi, dstar_r: Tensor3::zero() }
    }

    pub fn from_packets(geo: &GeometryPacket<F>, der: &DerivativePacket<F>) -> Result<Self> {
        Ok(HarmonicSample {
            metric: geo.metric.clone(),
            ric: geo.ric.clone(),
            s: geo.s.clone(),
            dphi: der.dphi.clone(),
            e2phi: der.e2phi()?,
            dstar_r: der.dstar_r.clone(),
        })
    }

    /// `g = I`, `Ric = diag(0, s/2, s/2)`, `dphi = (t, 0, 0)` and `e^{2 phi}`
    /// chosen so that `|dphi|^2 - (5/2) e^{2 phi} = -s - (3 kappa/4) s^2`.
    pub fn canonical(s: F, t: F, kappa: &F) -> Self {
        let half = s.clone() * F::ratio(1, 2);
        let e2phi = (t.square() + s.clone() + F::ratio(3, 4) * kappa.clone() * s.square()) * F::ratio(2, 5);
        HarmonicSample::new(Metric3::euclidean(), Sym2::diag(F::zero(), half.clone(), half), Vec3::new(t, F::zero(), F::zero()), e2phi)
    }

    /// `f = |dphi|^2 - (5/2) e^{2 phi}`.
    pub fn f_value(&self) -> F {
        self.metric.inner_covector(&self.dphi, &self.dphi) - self.e2phi.clone() * F::ratio(5, 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicStep {
    /// `Ric(dphi) = 0`.
    RicciKillsGradient,
    /// Ricci eigenvalues `(0, s/2, s/2)`.
    Eigenstructure,
    /// `Ric = (s/2)(g - u (x) u)`.
    RicciReconstruction,
    /// `|Ric|^2 = s^2/2`.
    RicciNorm,
    /// `f = -s - (3 kappa/4) s^2`.
    FValue,
    /// `f` takes one value over the samples where `dphi != 0`.
    FConstancy,
}

impl HarmonicStep {
    pub fn label(self) -> &'static str {
        match self {
            HarmonicStep::RicciKillsGradient => "Ric(dphi) = 0",
            HarmonicStep::Eigenstructure => "Ricci eigenvalues (0, s/2, s/2)",
            HarmonicStep::RicciReconstruction => "Ric = (s/2)(g - u u)",
            HarmonicStep::RicciNorm => "|Ric|^2 = s^2/2",
            HarmonicStep::FValue => "f = -s - (3 kappa/4) s^2",
            HarmonicStep::FConstancy => "f constant on U",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepCheck {
    pub sample: usize,
    pub step: HarmonicStep,
    pub defect: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicReport {
    pub samples: usize,
    /// Indices of samples with `dphi != 0`.
    pub gradient_support: Vec<usize>,
    pub vacuous: bool,
    pub f_values: Vec<f64>,
    pub checks: Vec<StepCheck>,
    pub first_failure: Option<StepCheck>,
    pub summary: String,
}

impl HarmonicReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn check<F: Scalar>(sample: usize, step: HarmonicStep, diff: &F, scale: f64, tol: f64) -> StepCheck {
    StepCheck { sample, step, defect: diff.magnitude(), pass: diff.is_negligible(tol, scale), detail: String::new() }
}

/// Runs the reduction steps on every sample. `tol` is the float-mode
/// relative tolerance; exact mode compares literally.
pub fn harmonic_sample_test<F: Scalar>(
    samples: &[HarmonicSample<F>],
    params: &SolitonParams<F>,
    tol: f64,
) -> Result<HarmonicReport> {
    for (i, smp) in samples.iter().enumerate() {
        let scale = smp.ric.max_abs().max(smp.s.magnitude()).max(1.0);
        if smp.dstar_r.0.iter().any(|x| !x.is_negligible(tol, scale)) {
            return Err(Error::NotHarmonic { sample: i, defect: smp.dstar_r.max_abs() });
        }
    }

    let k = &params.kappa;
    let mut support = Vec::new();
    let mut checks = Vec::new();
    let mut f_exact: Vec<(usize, F)> = Vec::new();
    for (i, smp) in samples.iter().enumerate() {
        if smp.dphi.0.iter().all(|x| x.is_negligible(tol, 1.0)) {
            continue;
        }
        support.push(i);
        let g = &smp.metric;
        let s = &smp.s;
        let scale = smp.ric.max_abs().max(s.magnitude()).max(1.0) * smp.dphi.max_abs().max(1.0);

        let kill = smp.ric.apply(&g.raise(&smp.dphi));
        let worst = kill.0.iter().cloned().fold(F::zero(), |m, x| if x.abs() > m { x.abs() } else { m });
        let c = check(i, HarmonicStep::RicciKillsGradient, &worst, scale, tol);
        let ok = c.pass;
        checks.push(c);
        if !ok {
            continue;
        }

        let eig = eigen_report(g, &smp.ric)?;
        let half = s.to_f64() / 2.0;
        let mut expected = [0.0, half, half];
        expected.sort_by(f64::total_cmp);
        let dev = eig.deviation_from(expected);
        let pass = dev <= tol.max(1e-9) * s.magnitude().max(1.0);
        checks.push(StepCheck {
            sample: i,
            step: HarmonicStep::Eigenstructure,
            defect: dev,
            pass,
            detail: format!("eigenvalues {:?}", eig.eigenvalues),
        });
        if !pass {
            continue;
        }

        match harmonic_ricci_reduction(g, &smp.ric, &smp.dphi, s) {
            Ok(red) => {
                let diff = (smp.ric.clone() - red.reconstructed).max_abs();
                checks.push(StepCheck {
                    sample: i,
                    step: HarmonicStep::RicciReconstruction,
                    defect: diff,
                    pass: true,
                    detail: String::new(),
                });
                let c = check(i, HarmonicStep::RicciNorm, &(red.ricci_norm_sq - s.square() * F::ratio(1, 2)), scale * scale, tol);
                let ok = c.pass;
                checks.push(c);
                if !ok {
                    continue;
                }
            }
            Err(e) => {
                checks.push(StepCheck {
                    sample: i,
                    step: HarmonicStep::RicciReconstruction,
                    defect: f64::NAN,
                    pass: false,
                    detail: e.to_string(),
                });
                continue;
            }
        }

        let f = smp.f_value();
        let target = -s.clone() - F::ratio(3, 4) * k.clone() * s.square();
        let c = check(i, HarmonicStep::FValue, &(f.clone() - target), scale * scale, tol);
        checks.push(c);
        f_exact.push((i, f));
    }

    if let Some((_, f0)) = f_exact.first() {
        let f0 = f0.clone();
        for (i, f) in f_exact.iter().skip(1) {
            let scale = f0.magnitude().max(1.0);
            checks.push(check(*i, HarmonicStep::FConstancy, &(f.clone() - f0.clone()), scale, tol));
        }
    }

    let first_failure = checks.iter().find(|c| !c.pass).cloned();
    let vacuous = support.is_empty();
    let summary = if vacuous {
        "U empty, vacuously hyperbolic regime".to_string()
    } else if let Some(fail) = &first_failure {
        format!("sample {}: step `{}` violated (defect {:e})", fail.sample, fail.step.label(), fail.defect)
    } else {
        format!("all reduction steps hold on {} of {} samples with dphi != 0", support.len(), samples.len())
    };
    Ok(HarmonicReport {
        samples: samples.len(),
        gradient_support: support,
        vacuous,
        f_values: f_exact.iter().map(|(_, f)| f.to_f64()).collect(),
        checks,
        first_failure,
        summary,
    })
}

pub fn harmonic_dilaton_test<F: Scalar>(
    chart: &ChartGeometry,
    points: &[Point],
    params: &SolitonParams<F>,
    tol: f64,
) -> Result<HarmonicReport> {
    let samples = points
        .iter()
        .map(|p| {
            let (geo, der) = packets::<F>(chart, p)?;
            HarmonicSample::from_packets(&geo, &der)
        })
        .collect::<Result<Vec<_>>>()?;
    harmonic_sample_test(&samples, params, tol)
}
