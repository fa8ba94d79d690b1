//! Brackets for quasiconvex envelopes of extended-real integrands.
//!
//! The crate samples an integrand `W: M^{m x N} -> [0, +inf]` on a grid,
//! pushes it down with rank-one lamination, bounds it from below with a
//! discrete convexification, and estimates the one-cell envelopes on
//! piecewise-affine test fields. On top of that sit the 3d to 2d fiber
//! reduction, a thin-film energy probe, brute-force oracles, and the CLI.

pub mod cli;
pub mod envelope;
pub mod error;
pub mod expr;
pub mod extreal;
pub mod gamma;
pub mod integrand;
pub mod matspace;
pub mod oracle;
pub mod reduction;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use matspace::{Mat, MatBox, RankOneDir};
