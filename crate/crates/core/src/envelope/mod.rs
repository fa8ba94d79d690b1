//! Envelope algorithms: lamination on grids, one-cell estimates on
//! piecewise-affine fields, and a discrete convexification lower bound.

mod bracket;
mod convex;
mod grid;
mod hull;
mod lamination;
mod mesh;
mod zest;

pub use convex::convex_lower;
pub use grid::GridFn;
pub use hull::hull_1d;
pub use lamination::{
    check_rank_one_convexity, lamination_step, laminate_at, rank_one_envelope, rank_one_envelope_from, Laminate, Trace,
    Violation, WORK_BUDGET,
};
pub use mesh::{MeshParams, TestFieldMesh};
pub use zest::{z_estimate, z_search, zinf_estimate, ZResult, STEP_FLOOR};
pub use bracket::{p_ample_probe, qw_bracket, Bracketer, EnvelopeParams, EnvelopeReport, ZParams};
