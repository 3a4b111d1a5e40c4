//! Auxiliary functions of the test-function method.

mod bfunc;
mod cutoff;
mod integral;
mod profile;
mod radial;

pub use bfunc::{
    b_bounds, BBoundReport, BFunction, BSamples, PhiLambdaCache, DEFAULT_QUAD_NODES, PANEL_LEVELS,
};
pub use cutoff::{eta_unit, theta_unit, CutoffKind, CutoffSpec};
pub use integral::{
    cone_integral, integral_estimate_check, travelling_residual, IntegralEstimateReport,
    TravellingResidual, TREND_THRESHOLD,
};
pub use profile::{CoefficientProfile, ProfileKind, RadialSampler};
pub use radial::{
    japanese, solve_mode, solve_phi0, AsymptoticRatio, ModeKind, RadialTable, TableMeta,
    TwoSidedBound, RESIDUAL_R_MIN,
};
