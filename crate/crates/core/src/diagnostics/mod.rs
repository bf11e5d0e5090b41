//! Analytic quantities over flow tracks: backward heat kernel, Gaussian
//! density and its monotonicity, spacetime and slice norms, local
//! regularity energies, pinching ratios and threshold verdicts.

pub mod density;
pub mod kernel;
pub mod local;
pub mod norms;

use nalgebra::Point3;

pub use density::{
    density_limit, gaussian_density, monotonicity_audit, state_density, DensityReport,
    BELOW2_MARGIN, MONOTONE_TOL_ANALYTIC, MONOTONE_TOL_DISCRETE, WHITE_MARGIN,
};
pub use kernel::backward_heat_kernel;
pub use local::{
    distance_bound_audit, eps_regularity_check, local_energy, DistanceAudit, EpsRegularityReport,
};
pub use norms::{
    lpq_a_norm, pinching_ratio, running_sup_ls, slice_ls_product, spacetime_h_norm, LpqNorm,
    RunningSupSeries, SliceSeries,
};

/// A candidate singular spacetime point (y0, T).
#[derive(Debug, Clone, Copy)]
pub struct SpacetimePoint {
    pub y0: Point3<f64>,
    /// The blow-up time the backward kernel is centered at.
    pub t_singular: f64,
}

impl SpacetimePoint {
    pub fn new(y0: Point3<f64>, t_singular: f64) -> Self {
        SpacetimePoint { y0, t_singular }
    }
}

/// Outcome of the density-threshold criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Density limit within the unit margin: the local regularity
    /// threshold of density close to one.
    RegularUnitDensity,
    /// Density limit below 2 minus the margin: the below-two criterion.
    RegularBelowTwo,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::RegularUnitDensity => write!(f, "regular_white"),
            Verdict::RegularBelowTwo => write!(f, "regular_below2"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}
