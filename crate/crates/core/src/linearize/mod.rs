//! Linearised curvature operators, the gauge pair, the coefficient chain
//! for essential deformations of the hyperbolic background and the
//! infinitesimal Einstein operator.

mod chain;
mod einstein;
mod fd;
mod gauge;
mod operators;

pub use chain::{essential_chain, ArrowStatus, BackgroundConstants, ChainCoefficient, EssentialChain, Implication};
pub use einstein::{einstein_def_from, einstein_def_residual, EinsteinDeformation, TtBasis};
pub use fd::{
    compare_with_fd, curvature_sample, directional_difference, fd_einstein_residual, linearized_sample, perturbed_chart,
    CurvatureSample, FdComparison,
};
pub use gauge::{
    gauge_adjoint, gauge_image, lie_derivative_coordinate, lie_derivative_field, torus_pairing_exact, torus_pairing_float,
    GaugeImage, PairingReport, VectorField,
};
pub use operators::{
    check_einstein, einstein_defect, lin_curv_einstein, lin_curv_einstein_from, lin_curv_general, lin_curv_norm_via_ricci,
    lin_ricci, lin_scalar, scalar_trace_defect, Deformation, DeformationData, LinearCurvature,
};
