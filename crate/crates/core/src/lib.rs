//! Exact and floating-point verification of the torsionless heterotic
//! soliton system on Riemannian 3-manifolds.
//!
//! Every computation is generic over [`Scalar`]: [`Rational`] for exact
//! arithmetic and `f64` for floats.
//!
//! ```
//! use hetsol_core::soliton::{classify_constant_dilaton, Branch, SolitonParams};
//! use hetsol_core::{Rational, Scalar};
//!
//! let r = classify_constant_dilaton(&SolitonParams::new(Rational::from_i64(2)).unwrap());
//! assert_eq!(r.branch, Branch::Hyperbolic);
//! assert_eq!(r.s, Rational::from_i64(-12));
//! ```

pub mod algebra3;
pub mod chartfield;
pub mod error;
pub mod jet;
pub mod homgeo;
pub mod linearize;
pub mod oracle;
pub mod sample;
pub mod scalar;
pub mod soliton;

pub use error::{Error, Result};
pub use scalar::{Mode, Rational, Scalar};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    mod curvature {}
    #[doc = include_str!("../../../book/src/charts.md")]
    mod charts {}
    #[doc = include_str!("../../../book/src/soliton.md")]
    mod soliton {}
    #[doc = include_str!("../../../book/src/linearization.md")]
    mod linearization {}
    #[doc = include_str!("../../../book/src/harmonic.md")]
    mod harmonic {}
    #[doc = include_str!("../../../book/src/homogeneous.md")]
    mod homogeneous {}
}
