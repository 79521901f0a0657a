//! Phase functions and sampled verification of their transversality/curvature geometry.

pub mod geometry;
pub mod jet;
pub mod model;
pub mod region;

pub use geometry::{
    assumption_report, cone_transversality_margin, curvature_margin_on_sigma, curvature_quotient_min,
    sampled_shifts, sigma_residual, sigma_solve, transversality_margin, transversality_witness, wedge_norm,
    CurvatureMargin, GeometryReport, Shift, SigmaSolution, Witness,
};
pub use model::{eval_phase_suite, PhaseEval, PhaseKind, PhaseModel, Rescale};
pub use region::FreqRegion;
