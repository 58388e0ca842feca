//! Exact pointwise tensor algebra in dimension three.
//!
//! In three dimensions the Weyl tensor vanishes, so the full curvature
//! tensor is an algebraic function of `(g, Ric, s)`. This module holds that
//! dictionary together with the algebraic reductions built on it.

mod curvature;
mod eigen;
mod harmonic;
mod tensor;

pub use curvature::{
    curv_norm, curv_square, kn_product, ricci_contract, riemann_from_ricci, two_form_action, Curv3, RicciData,
};
pub use eigen::{eigen_report, EigenReport};
pub use harmonic::{harmonic_ricci_reduction, RicciReduction};
pub use tensor::{det3, pair_index, Metric3, Sym2, Tensor3, TwoForm, Vec3, SYM_INDEX, SYM_PAIRS, TWO_FORM_PAIRS};
