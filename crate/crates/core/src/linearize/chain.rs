use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::soliton::SolitonParams;

/// Constants of the hyperbolic torsionless background:
/// `kappa s = -24`, `kappa e^{2 phi} = 48`, `Ric = lambda g` with `lambda = s/3`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackgroundConstants<F> {
    pub kappa: F,
    pub s: F,
    pub e2phi: F,
    pub lambda: F,
}

impl<F: Scalar> BackgroundConstants<F> {
    pub fn hyperbolic(kappa: F) -> Result<Self> {
        if kappa.is_zero() {
            return Err(Error::InvalidKappa);
        }
        let s = F::from_i64(-24) / kappa.clone();
        let e2phi = F::from_i64(48) / kappa.clone();
        let lambda = s.clone() / F::from_i64(3);
        Ok(BackgroundConstants { kappa, s, e2phi, lambda })
    }

    /// Largest violation of the three defining relations.
    pub fn defect(&self) -> f64 {
        let k = &self.kappa;
        [
            k.clone() * self.s.clone() + F::from_i64(24),
            k.clone() * self.e2phi.clone() - F::from_i64(48),
            self.lambda.clone() * F::from_i64(3) - self.s.clone(),
        ]
        .iter()
        .map(Scalar::magnitude)
        .fold(0.0, f64::max)
    }
}

/// One coefficient of the chain, with its closed form `numerator / kappa^power`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainCoefficient<F> {
    pub name: &'static str,
    pub description: &'static str,
    pub value: F,
    pub numerator: i64,
    pub kappa_power: u32,
    pub closed_form: F,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowStatus {
    Verified,
    Failed,
    /// Supplied by a theorem outside this crate.
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Implication {
    pub from: &'static str,
    pub to: &'static str,
    pub status: ArrowStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssentialChain<F> {
    pub constants: BackgroundConstants<F>,
    pub coefficients: Vec<ChainCoefficient<F>>,
    /// Determinant of the `(d s(h), xi)` system from the dilaton equation
    /// and the trace of the Einstein equation.
    pub determinant: F,
    /// `-s/3`, the zeroth-order coefficient in the equation for `tr h`.
    pub trace_coercivity: F,
    pub implications: Vec<Implication>,
}

impl<F: Scalar> EssentialChain<F> {
    pub fn passed(&self) -> bool {
        self.coefficients.iter().all(|c| c.pass) && self.implications.iter().all(|i| i.status != ArrowStatus::Failed)
    }

    pub fn values(&self) -> Vec<F> {
        self.coefficients.iter().map(|c| c.value.clone()).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<&ChainCoefficient<F>> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

fn closed<F: Scalar>(kappa: &F, numerator: i64, power: u32) -> F {
    (0..power).fold(F::from_i64(numerator), |acc, _| acc / kappa.clone())
}

/// Evaluates the coefficients that force an essential deformation of the
/// hyperbolic background to be an infinitesimal Einstein deformation.
pub fn essential_chain<F: Scalar>(params: &SolitonParams<F>, tol: f64) -> Result<EssentialChain<F>> {
    let bg = BackgroundConstants::hyperbolic(params.kappa.clone())?;
    let k = bg.kappa.clone();
    let s = bg.s.clone();
    let psi = bg.e2phi.clone();
    let one = F::one();
    let ks = k.clone() * s.clone();

    // Exterior derivative of the dilaton equation's linearisation.
    let c1 = one.clone() + ks.clone() * F::ratio(1, 2);
    let c2 = c1.clone() * F::ratio(2, 3) * s.clone() - F::from_i64(5) * psi.clone();
    // d s(h) = c3 xi, so kappa d s(h) = -24 xi.
    let c3 = F::from_i64(12) * psi.clone() / ks.clone();
    let c4 = (one.clone() + ks.clone() / F::from_i64(3)) * c3.clone() - F::from_i64(3) * psi.clone();
    let c5 = one.clone() + ks.clone() / F::from_i64(3);
    let c6 = -(psi.clone() * F::ratio(1, 2) + k.clone() * s.square() / F::from_i64(18));

    let specs: [(&'static str, &'static str, F, i64, u32); 6] = [
        ("exterior_derivative", "1 + kappa s/2", c1, -11, 0),
        ("combined_dxi", "(1 + kappa s/2)(2/3)s - 5 e^{2 phi}", c2, -64, 1),
        ("scalar_from_xi", "d s(h) = c xi", c3, -24, 1),
        ("final_xi", "coefficient of xi after substitution", c4, 24, 1),
        ("ricci_coefficient", "coefficient of d Ric(h)", c5, -7, 0),
        ("h_coefficient", "coefficient of h", c6, -56, 1),
    ];
    let coefficients: Vec<_> = specs
        .into_iter()
        .map(|(name, description, value, numerator, kappa_power)| {
            let closed_form = closed(&k, numerator, kappa_power);
            let scale = closed_form.magnitude().max(1.0);
            let pass = (value.clone() - closed_form.clone()).is_negligible(tol, scale);
            ChainCoefficient { name, description, value, numerator, kappa_power, closed_form, pass }
        })
        .collect();

    let determinant = ks.clone() / F::from_i64(6) * (-F::from_i64(3) * psi.clone())
        + F::from_i64(2) * psi.clone() * (one.clone() + ks.clone() / F::from_i64(3));
    let trace_coercivity = -s.clone() / F::from_i64(3);

    let nonzero = |x: &F| !x.is_negligible(tol, 1.0);
    let arrow = |ok: bool| if ok { ArrowStatus::Verified } else { ArrowStatus::Failed };
    let c = |i: usize| &coefficients[i].value;
    let ratio = -c(5).clone() / c(4).clone();
    let lambda_gap = ratio.clone() - bg.lambda.clone();
    let implications = vec![
        Implication {
            from: "linearised system",
            to: "xi = 0",
            status: arrow(nonzero(c(3)) && nonzero(&determinant)),
            detail: format!("final coefficient {}, determinant {}", c(3), determinant),
        },
        Implication {
            from: "xi = 0",
            to: "tr h = 0",
            status: arrow(trace_coercivity > F::zero()),
            detail: format!("(delta d - s/3) tr h = 0 with -s/3 = {trace_coercivity}"),
        },
        Implication {
            from: "tr h = 0",
            to: "d Ric(h) = (s/3) h",
            status: arrow(nonzero(c(4)) && lambda_gap.is_negligible(tol, bg.lambda.magnitude().max(1.0))),
            detail: format!("-c6/c5 = {ratio}, s/3 = {}", bg.lambda),
        },
        Implication {
            from: "d Ric(h) = (s/3) h",
            to: "h = 0",
            status: ArrowStatus::External,
            detail: "rigidity of compact hyperbolic Einstein metrics (Koiso)".into(),
        },
    ];
    Ok(EssentialChain { constants: bg, coefficients, determinant, trace_coercivity, implications })
}
