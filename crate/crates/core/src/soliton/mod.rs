//! The torsionless soliton system: residuals in both formulations, the
//! identities linking them, the constant-dilaton classification and the
//! harmonic-curvature reduction.

mod classify;
mod harmonic;
mod residual;

pub use classify::{classify_constant_dilaton, eigenvalue_quadratic, Branch, ClassificationReport};
pub use harmonic::{harmonic_dilaton_test, harmonic_sample_test, HarmonicReport, HarmonicSample, HarmonicStep, StepCheck};
pub use residual::{
    formulation_defects, residuals, residuals_from, residuals_v2, residuals_v2_from, scalar_identity,
    scalar_identity_from, yang_mills, ym_trace_defect_from, ym_trace_identity, FormulationDefects, SolitonParams,
    SolitonResidual,
};
