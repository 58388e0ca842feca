//! Exact differential geometry on coordinate charts.
//!
//! A [`ChartGeometry`] carries a metric and a dilaton whose components are
//! polynomials, rational functions or trigonometric polynomials. Jets of
//! these fields feed [`FrameJets`], which assembles connection, curvature
//! and their covariant derivatives without rounding in exact mode.
//! [`fd_oracle`] recomputes the same packets by finite differences.

mod chart;
mod expr;
mod fd;
mod geometry;

pub use chart::{field_to_json, parse_coeff, parse_field, ChartGeometry, Dilaton, DilatonJet, Domain, Point, Sym2Field, SYM_KEYS};
pub use expr::{Coords, FieldExpr, Poly, TrigPoly};
pub use fd::{fd_oracle, fd_oracle_richardson, Stencil, DEFAULT_STEP};
pub use geometry::{
    bianchi_defect, bianchi_residual, derivative_packet, geometry_packet, packets, DerivativePacket, FrameJets,
    GeometryPacket, Structure, TensorJets,
};
