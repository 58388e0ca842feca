//! Finite-difference oracle.
//!
//! Everything here is computed from plain `f64` evaluations of the metric
//! and dilaton components with nested central differences. None of the jet
//! machinery is used, so agreement with [`super::geometry`] is a genuine
//! cross-check. Truncation error is `O(step^2)`; roundoff grows like
//! `eps / step^k` for a `k`-th derivative, so quantities involving third
//! derivatives of the metric want a step near `1e-3`.

use super::chart::{ChartGeometry, Point};
use super::geometry::{DerivativePacket, GeometryPacket};
use crate::algebra3::{Curv3, Metric3, Sym2, Tensor3, Vec3};
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-4;

type M3 = [[f64; 3]; 3];

fn shifted(x: [f64; 3], i: usize, h: f64) -> [f64; 3] {
    let mut y = x;
    y[i] += h;
    y
}

fn inv3(m: &M3) -> M3 {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let c = |i: usize, j: usize| {
        let (a0, a1) = ((i + 1) % 3, (i + 2) % 3);
        let (b0, b1) = ((j + 1) % 3, (j + 2) % 3);
        m[a0][b0] * m[a1][b1] - m[a0][b1] * m[a1][b0]
    };
    std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / det))
}

/// Central-difference evaluator bound to a chart and a step.
pub struct Stencil<'a> {
    chart: &'a ChartGeometry,
    h: f64,
}

impl<'a> Stencil<'a> {
    pub fn new(chart: &'a ChartGeometry, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Config(format!("finite-difference step must be positive, got {step}")));
        }
        Ok(Stencil { chart, h: step })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn metric(&self, x: [f64; 3]) -> Result<M3> {
        if !self.chart.contains_f64(x) {
            return Err(Error::StencilOutOfDomain);
        }
        self.chart.metric_f64(x)
    }

    fn phi(&self, x: [f64; 3]) -> Result<f64> {
        if !self.chart.contains_f64(x) {
            return Err(Error::StencilOutOfDomain);
        }
        self.chart.phi_f64(x)
    }

    /// `d/dx_i` of an array-valued function.
    fn diff<const N: usize>(&self, x: [f64; 3], i: usize, f: &impl Fn([f64; 3]) -> Result<[f64; N]>) -> Result<[f64; N]> {
        let a = f(shifted(x, i, self.h))?;
        let b = f(shifted(x, i, -self.h))?;
        Ok(std::array::from_fn(|k| (a[k] - b[k]) / (2.0 * self.h)))
    }

    /// `Gamma^k_ij` at `9k + 3i + j`.
    pub fn christoffel(&self, x: [f64; 3]) -> Result<[f64; 27]> {
        let flat = |y: [f64; 3]| -> Result<[f64; 9]> {
            let g = self.metric(y)?;
            Ok(std::array::from_fn(|k| g[k / 3][k % 3]))
        };
        let g = self.metric(x)?;
        let gi = inv3(&g);
        let dg: Vec<[f64; 9]> = (0..3).map(|m| self.diff(x, m, &flat)).collect::<Result<_>>()?;
        Ok(std::array::from_fn(|n| {
            let (k, i, j) = (n / 9, (n / 3) % 3, n % 3);
            0.5 * (0..3)
                .map(|l| gi[k][l] * (dg[i][3 * j + l] + dg[j][3 * i + l] - dg[l][3 * i + j]))
                .sum::<f64>()
        }))
    }

    /// `R_ijkl` at `27i + 9j + 3k + l`.
    pub fn riemann(&self, x: [f64; 3]) -> Result<[f64; 81]> {
        let gam = self.christoffel(x)?;
        let dgam: Vec<[f64; 27]> = (0..3).map(|m| self.diff(x, m, &|y| self.christoffel(y))).collect::<Result<_>>()?;
        let g = self.metric(x)?;
        let gm = |l: usize, i: usize, j: usize| gam[9 * l + 3 * i + j];
        let mut rup = [0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut t = dgam[i][9 * l + 3 * j + k] - dgam[j][9 * l + 3 * i + k];
                        for m in 0..3 {
                            t += gm(l, i, m) * gm(m, j, k) - gm(l, j, m) * gm(m, i, k);
                        }
                        rup[27 * l + 9 * i + 3 * j + k] = t;
                    }
                }
            }
        }
        Ok(std::array::from_fn(|n| {
            let (i, j, k, l) = (n / 27, (n / 9) % 3, (n / 3) % 3, n % 3);
            (0..3).map(|m| g[l][m] * rup[27 * m + 9 * i + 3 * j + k]).sum()
        }))
    }

    /// `(Ric, s)` with `Ric` flattened row-major.
    pub fn ricci(&self, x: [f64; 3]) -> Result<([f64; 9], f64)> {
        let r = self.riemann(x)?;
        let gi = inv3(&self.metric(x)?);
        let ric: [f64; 9] = std::array::from_fn(|n| {
            let (j, k) = (n / 3, n % 3);
            let mut acc = 0.0;
            for i in 0..3 {
                for l in 0..3 {
                    acc += gi[i][l] * r[27 * i + 9 * j + 3 * k + l];
                }
            }
            acc
        });
        let s = (0..9).map(|n| gi[n / 3][n % 3] * ric[n]).sum();
        Ok((ric, s))
    }

    /// `(nabla_m h)_ij` at `9m + 3i + j` for a symmetric field given
    /// pointwise.
    pub fn nabla_sym(&self, x: [f64; 3], field: &impl Fn([f64; 3]) -> Result<M3>) -> Result<[f64; 27]> {
        let flat = |y: [f64; 3]| -> Result<[f64; 9]> {
            let m = field(y)?;
            Ok(std::array::from_fn(|k| m[k / 3][k % 3]))
        };
        let h = field(x)?;
        let gam = self.christoffel(x)?;
        let dh: Vec<[f64; 9]> = (0..3).map(|m| self.diff(x, m, &flat)).collect::<Result<_>>()?;
        Ok(std::array::from_fn(|n| {
            let (m, i, j) = (n / 9, (n / 3) % 3, n % 3);
            let mut t = dh[m][3 * i + j];
            for e in 0..3 {
                t -= gam[9 * e + 3 * m + i] * h[e][j] + gam[9 * e + 3 * m + j] * h[i][e];
            }
            t
        }))
    }

    /// `(nabla* h)_j = -g^{ab} (nabla_a h)_bj`.
    pub fn divergence_sym(&self, x: [f64; 3], field: &impl Fn([f64; 3]) -> Result<M3>) -> Result<[f64; 3]> {
        let nh = self.nabla_sym(x, field)?;
        let gi = inv3(&self.metric(x)?);
        Ok(std::array::from_fn(|j| {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc -= gi[a][b] * nh[9 * a + 3 * b + j];
                }
            }
            acc
        }))
    }

    /// `(nabla* nabla h)_ij = -g^{nm} (nabla_n nabla_m h)_ij`.
    pub fn rough_laplacian_sym(&self, x: [f64; 3], field: &impl Fn([f64; 3]) -> Result<M3>) -> Result<M3> {
        let nh = self.nabla_sym(x, field)?;
        let dnh: Vec<[f64; 27]> = (0..3).map(|n| self.diff(x, n, &|y| self.nabla_sym(y, field))).collect::<Result<_>>()?;
        let gam = self.christoffel(x)?;
        let gi = inv3(&self.metric(x)?);
        let gm = |e: usize, a: usize, b: usize| gam[9 * e + 3 * a + b];
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = 0.0;
                for n in 0..3 {
                    for m in 0..3 {
                        let mut t = dnh[n][9 * m + 3 * i + j];
                        for e in 0..3 {
                            t -= gm(e, n, m) * nh[9 * e + 3 * i + j]
                                + gm(e, n, i) * nh[9 * m + 3 * e + j]
                                + gm(e, n, j) * nh[9 * m + 3 * i + e];
                        }
                        acc -= gi[n][m] * t;
                    }
                }
                acc
            })
        }))
    }

    fn raw(&self, x: [f64; 3]) -> Result<Raw> {
        let g = self.metric(x)?;
        let gamma = self.christoffel(x)?;
        let riem = self.riemann(x)?;
        let (ric, s) = self.ricci(x)?;
        let gm = |e: usize, a: usize, b: usize| gamma[9 * e + 3 * a + b];

        let dr: Vec<[f64; 81]> = (0..3).map(|m| self.diff(x, m, &|y| self.riemann(y))).collect::<Result<_>>()?;
        let mut nabla_r = vec![0.0; 243];
        for m in 0..3 {
            for n in 0..81 {
                let idx = [n / 27, (n / 9) % 3, (n / 3) % 3, n % 3];
                let mut t = dr[m][n];
                for slot in 0..4 {
                    for e in 0..3 {
                        let mut j = idx;
                        j[slot] = e;
                        t -= gm(e, m, idx[slot]) * riem[27 * j[0] + 9 * j[1] + 3 * j[2] + j[3]];
                    }
                }
                nabla_r[81 * m + n] = t;
            }
        }
        let dric: Vec<[f64; 10]> = (0..3)
            .map(|m| {
                self.diff(x, m, &|y| {
                    let (r, s) = self.ricci(y)?;
                    Ok(std::array::from_fn(|k| if k < 9 { r[k] } else { s }))
                })
            })
            .collect::<Result<_>>()?;
        let nabla_ric: Vec<f64> = (0..27)
            .map(|n| {
                let (m, a, b) = (n / 9, (n / 3) % 3, n % 3);
                let mut t = dric[m][3 * a + b];
                for e in 0..3 {
                    t -= gm(e, m, a) * ric[3 * e + b] + gm(e, m, b) * ric[3 * a + e];
                }
                t
            })
            .collect();
        let ds = [dric[0][9], dric[1][9], dric[2][9]];

        let phi = self.phi(x)?;
        let h = self.h;
        let mut dphi = [0.0; 3];
        let mut hess = [0.0; 9];
        for i in 0..3 {
            dphi[i] = (self.phi(shifted(x, i, h))? - self.phi(shifted(x, i, -h))?) / (2.0 * h);
            for j in 0..3 {
                let pp = self.phi(shifted(shifted(x, i, h), j, h))?;
                let pm = self.phi(shifted(shifted(x, i, h), j, -h))?;
                let mp = self.phi(shifted(shifted(x, i, -h), j, h))?;
                let mm = self.phi(shifted(shifted(x, i, -h), j, -h))?;
                hess[3 * i + j] = (pp - pm - mp + mm) / (4.0 * h * h);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                hess[3 * i + j] -= (0..3).map(|m| gm(m, i, j) * dphi[m]).sum::<f64>();
            }
        }
        Ok(Raw {
            g: (0..9).map(|k| g[k / 3][k % 3]).collect(),
            gamma: gamma.to_vec(),
            riem: riem.to_vec(),
            ric: ric.to_vec(),
            s: vec![s],
            nabla_r,
            nabla_ric,
            ds: ds.to_vec(),
            dphi: dphi.to_vec(),
            hess: hess.to_vec(),
            phi: vec![phi],
        })
    }
}

/// Flattened finite-difference results, kept separate so that Richardson
/// extrapolation can act on every entry uniformly.
struct Raw {
    g: Vec<f64>,
    gamma: Vec<f64>,
    riem: Vec<f64>,
    ric: Vec<f64>,
    s: Vec<f64>,
    nabla_r: Vec<f64>,
    nabla_ric: Vec<f64>,
    ds: Vec<f64>,
    dphi: Vec<f64>,
    hess: Vec<f64>,
    phi: Vec<f64>,
}

impl Raw {
    fn fields_mut(&mut self) -> [&mut Vec<f64>; 11] {
        [
            &mut self.g,
            &mut self.gamma,
            &mut self.riem,
            &mut self.ric,
            &mut self.s,
            &mut self.nabla_r,
            &mut self.nabla_ric,
            &mut self.ds,
            &mut self.dphi,
            &mut self.hess,
            &mut self.phi,
        ]
    }

    /// `(4 fine - coarse) / 3`, cancelling the `step^2` error term.
    fn richardson(mut fine: Raw, mut coarse: Raw) -> Raw {
        for (f, c) in fine.fields_mut().into_iter().zip(coarse.fields_mut()) {
            for (a, b) in f.iter_mut().zip(c.iter()) {
                *a = (4.0 * *a - *b) / 3.0;
            }
        }
        fine
    }

    fn into_packets(self) -> Result<(GeometryPacket<f64>, DerivativePacket<f64>)> {
        let metric = Metric3::new(Sym2::from_fn(|i, j| self.g[3 * i + j]))?;
        let curvature = Curv3::from_components(&self.riem, metric.clone());
        let ric = Sym2::from_fn(|i, j| 0.5 * (self.ric[3 * i + j] + self.ric[3 * j + i]));
        let hess_phi = Sym2::from_fn(|i, j| 0.5 * (self.hess[3 * i + j] + self.hess[3 * j + i]));
        let dphi = Vec3::from_fn(|i| self.dphi[i]);
        let inv = metric.inverse().clone();
        let dstar_r = Tensor3::from_fn(|a, b, c| {
            let mut acc = 0.0;
            for j in 0..3 {
                for m in 0..3 {
                    acc -= inv.get(j, m) * self.nabla_r[81 * m + 27 * j + 9 * a + 3 * b + c];
                }
            }
            acc
        });
        let nabla_ric = Tensor3::from_fn(|m, a, b| self.nabla_ric[9 * m + 3 * a + b]);
        let d_ric = Tensor3::from_fn(|x, y, z| nabla_ric.get(x, y, z) - nabla_ric.get(y, x, z));
        let geo = GeometryPacket { metric: metric.clone(), christoffel: self.gamma, curvature, ric, s: self.s[0] };
        let der = DerivativePacket {
            delta_dphi: -metric.trace(&hess_phi),
            grad_sq: metric.inner_covector(&dphi, &dphi),
            dphi,
            hess_phi,
            e2phi: Some((2.0 * self.phi[0]).exp()),
            dstar_r,
            d_ric,
            nabla_ric,
            ds: Vec3::from_fn(|i| self.ds[i]),
        };
        Ok((geo, der))
    }
}

/// Both packets by central differences with the given step.
pub fn fd_oracle(chart: &ChartGeometry, p: &Point, step: f64) -> Result<(GeometryPacket<f64>, DerivativePacket<f64>)> {
    let x = chart.real_coords(p);
    Stencil::new(chart, step)?.raw(x)?.into_packets()
}

/// As [`fd_oracle`], with one Richardson step between `step` and `step / 2`.
pub fn fd_oracle_richardson(
    chart: &ChartGeometry,
    p: &Point,
    step: f64,
) -> Result<(GeometryPacket<f64>, DerivativePacket<f64>)> {
    let x = chart.real_coords(p);
    let coarse = Stencil::new(chart, step)?.raw(x)?;
    let fine = Stencil::new(chart, step / 2.0)?.raw(x)?;
    Raw::richardson(fine, coarse).into_packets()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartfield::{Dilaton, FieldExpr};
    use crate::scalar::{Rational, Scalar};

    #[test]
    fn euclidean_is_flat_to_roundoff() {
        let chart = ChartGeometry::euclidean(Dilaton::Phi(FieldExpr::zero()));
        let (geo, _) = fd_oracle(&chart, &[Rational::ratio(1, 2), Rational::ratio(1, 3), Rational::from_i64(2)], DEFAULT_STEP)
            .unwrap();
        assert!(geo.curvature.max_abs() < 1e-12);
    }

    #[test]
    fn poincare_ball_scalar_curvature() {
        let chart = ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()));
        let zero = Rational::from_i64(0);
        let (geo, _) = fd_oracle(&chart, &[zero.clone(), zero.clone(), zero], DEFAULT_STEP).unwrap();
        assert!((geo.s + 6.0).abs() < 1e-6, "s = {}", geo.s);
    }

    #[test]
    fn stencil_must_stay_inside_the_ball() {
        let chart = ChartGeometry::poincare_ball(Dilaton::Phi(FieldExpr::zero()));
        let p = [Rational::ratio(99999, 100000), Rational::from_i64(0), Rational::from_i64(0)];
        assert_eq!(fd_oracle(&chart, &p, 1e-3).unwrap_err(), Error::StencilOutOfDomain);
    }
}
