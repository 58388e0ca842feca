use serde::Serialize;

use super::residual::SolitonParams;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Hyperbolic,
    ProductExcluded,
}

/// Outcome of the constant-dilaton analysis for a given coupling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport<F> {
    pub kappa: F,
    pub branch: Branch,
    /// Scalar curvature `-24/kappa` of the surviving branch.
    pub s: F,
    /// `e^{2 phi} = 48/kappa`.
    pub e2phi: F,
    /// `Ric = ricci_factor * g` with `ricci_factor = -8/kappa`.
    pub ricci_factor: F,
    /// Quadratic evaluated at `(ricci_factor, s)`.
    pub hyperbolic_residue: F,
    /// Double eigenvalue `mu = -2/kappa` of the product candidate.
    pub product_mu: F,
    /// Scalar curvature `2 mu` of the product candidate.
    pub product_s: F,
    /// Quadratic evaluated at the zero eigenvalue of the product candidate.
    pub product_zero_residue: F,
    /// Quadratic evaluated at `(mu, 2 mu)`, equal to `-2/kappa`.
    pub product_defect: F,
    /// False when `kappa < 0`, where `e^{2 phi} = 48/kappa` cannot hold.
    pub dilaton_positive: bool,
}

/// `kappa lambda^2 - (1 + kappa s) lambda + kappa s^2/4 + s`, satisfied by
/// every Ricci eigenvalue of a constant-dilaton solution.
pub fn eigenvalue_quadratic<F: Scalar>(kappa: &F, s: &F, lambda: &F) -> F {
    kappa.clone() * lambda.square() - (F::one() + kappa.clone() * s.clone()) * lambda.clone()
        + kappa.clone() * s.square() * F::ratio(1, 4)
        + s.clone()
}

pub fn classify_constant_dilaton<F: Scalar>(params: &SolitonParams<F>) -> ClassificationReport<F> {
    let k = params.kappa.clone();
    let inv = F::one() / k.clone();
    let s = inv.clone() * F::from_i64(-24);
    let e2phi = inv.clone() * F::from_i64(48);
    let ricci_factor = inv.clone() * F::from_i64(-8);
    let hyperbolic_residue = eigenvalue_quadratic(&k, &s, &ricci_factor);

    let product_mu = inv * F::from_i64(-2);
    let product_s = product_mu.clone() * F::from_i64(2);
    let product_zero_residue = eigenvalue_quadratic(&k, &product_s, &F::zero());
    let product_defect = eigenvalue_quadratic(&k, &product_s, &product_mu);

    // The residue's terms are of size |kappa| s^2.
    let scale = (k.clone() * s.square()).magnitude();
    let branch = if hyperbolic_residue.near_zero(scale) { Branch::Hyperbolic } else { Branch::ProductExcluded };
    ClassificationReport {
        dilaton_positive: k > F::zero(),
        kappa: k,
        branch,
        s,
        e2phi,
        ricci_factor,
        hyperbolic_residue,
        product_mu,
        product_s,
        product_zero_residue,
        product_defect,
    }
}
