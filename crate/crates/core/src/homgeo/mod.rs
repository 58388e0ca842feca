//! Left-invariant metrics on three-dimensional Lie groups and a
//! least-squares search for homogeneous solitons.

mod family;
mod geometry;
mod search;

pub use family::{jacobi_defect, Bounds, Catalogue, CatalogueFile, FamilySpec, LieFamily};
pub use geometry::{lie_geometry, residual_vector, soliton_objective, soliton_residual};
pub use search::{
    best_report, grid_scan, lm_solve, multi_start, solution_check, GridScan, Iterate, SearchConfig, SearchReport,
    SearchStatus, SolutionCheck,
};
