//! Mean curvature flow simulation and singularity diagnostics.
//!
//! The crate evolves closed hypersurfaces by their mean curvature vector
//! (triangle meshes and axisymmetric profiles, with a closed-form catalog
//! as the oracle layer) and computes the analytic quantities that control
//! singularity formation: Gaussian densities and their monotonicity,
//! scale-invariant curvature norms, local regularity energies, parabolic
//! rescalings and tangent-flow residuals.

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod rescaling;

pub use error::{Error, Result};
