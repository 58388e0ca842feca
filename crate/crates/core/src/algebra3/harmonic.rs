use serde::Serialize;

use super::tensor::{Metric3, Sym2, TwoForm, Vec3};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Output of [`harmonic_ricci_reduction`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciReduction<F> {
    /// `(s/2)(g - u (x) u)` with `u = dphi / |dphi|`.
    pub reconstructed: Sym2<F>,
    /// `|Ric|^2`, equal to `s^2/2` in this regime.
    pub ricci_norm_sq: F,
}

/// Recovers the Ricci tensor from `s` and the direction of `dphi` when
/// `Ric(dphi) = 0` and `dphi ^ ((s/2) v - Ric(v)) = 0` for every `v`.
///
/// `dphi` is a 1-form. The reconstruction uses `u (x) u = dphi (x) dphi / |dphi|^2`,
/// so it stays rational in exact mode.
pub fn harmonic_ricci_reduction<F: Scalar>(
    g: &Metric3<F>,
    ric: &Sym2<F>,
    dphi: &Vec3<F>,
    s: &F,
) -> Result<RicciReduction<F>> {
    let scale = ric.max_abs().max(s.magnitude()).max(1.0) * dphi.max_abs().max(1.0);
    let grad_sq = g.inner_covector(dphi, dphi);
    if grad_sq.near_zero(dphi.max_abs().powi(2)) {
        return Err(Error::PreconditionViolated("dphi vanishes at the point".into()));
    }
    let grad = g.raise(dphi);
    let ric_dphi = ric.apply(&grad);
    if let Some(bad) = ric_dphi.0.iter().find(|x| !x.near_zero(scale)) {
        return Err(Error::PreconditionViolated(format!("Ric(dphi) = 0 fails (component {bad})")));
    }
    let half_s = s.clone() * F::ratio(1, 2);
    for i in 0..3 {
        let e = Vec3::basis(i);
        let w = g.lower(&e).scale(&half_s) - ric.apply(&e);
        let wedge: TwoForm<F> = TwoForm::wedge(dphi, &w);
        if let Some(bad) = wedge.0.iter().find(|x| !x.near_zero(scale)) {
            return Err(Error::PreconditionViolated(format!(
                "dphi ^ ((s/2) e_{} - Ric(e_{})) = 0 fails (component {bad})",
                i + 1,
                i + 1
            )));
        }
    }
    let uu = Sym2::outer(dphi).scale(&(F::one() / grad_sq));
    let reconstructed = (g.form().clone() - uu).scale(&half_s);
    let diff = ric.clone() - reconstructed.clone();
    if let Some(bad) = diff.0.iter().find(|x| !x.near_zero(scale)) {
        return Err(Error::PreconditionViolated(format!(
            "Ricci tensor differs from (s/2)(g - u u) (component {bad})"
        )));
    }
    let ricci_norm_sq = g.norm_sq_sym(ric);
    Ok(RicciReduction { reconstructed, ricci_norm_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn canonical_frame() {
        let g = Metric3::<Rational>::euclidean();
        let s = q(-10);
        let ric = Sym2::diag(q(0), q(-5), q(-5));
        let out = harmonic_ricci_reduction(&g, &ric, &Vec3::new(q(3), q(0), q(0)), &s).unwrap();
        assert_eq!(out.reconstructed, ric);
        assert_eq!(out.ricci_norm_sq, s.square() / q(2));
    }

    #[test]
    fn unequal_transverse_eigenvalues_are_rejected() {
        let g = Metric3::<Rational>::euclidean();
        let ric = Sym2::diag(q(0), q(1), q(2));
        let err = harmonic_ricci_reduction(&g, &ric, &Vec3::new(q(1), q(0), q(0)), &q(3)).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));
    }

    #[test]
    fn ricci_must_kill_the_gradient() {
        let g = Metric3::<Rational>::euclidean();
        let ric = Sym2::diag(q(1), q(1), q(1));
        assert!(harmonic_ricci_reduction(&g, &ric, &Vec3::new(q(1), q(0), q(0)), &q(2)).is_err());
        assert!(harmonic_ricci_reduction(&g, &ric, &Vec3::zero(), &q(2)).is_err());
    }
}
