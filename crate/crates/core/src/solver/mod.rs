//! Radial finite-difference solver for the coupled system.

mod export;
mod oracle;
mod scheme;
mod system;
mod weak;

pub use export::{save_snapshots_csv, write_snapshots_csv, RunManifest};
pub use oracle::{linear_oracle, OracleField};
pub use scheme::{
    evolve, BlowupRecord, Diagnostics, EnergySample, EvolveOptions, RunResult, Snapshot, Trigger,
    DEFAULT_THRESHOLD, SECONDARY_THRESHOLD_RATIO, SUPPORT_FLOOR,
};
pub use system::{
    make_initial_data, Component, ComponentWeights, Field, GridSpec, InitialData, Source,
    SourceDerivative, SystemSpec, DEFAULT_CFL, MAX_CFL,
};
pub use weak::{
    sphere_area, weak_form_residual, SpatialFactor, TestFunction, WeakEquation, WeakResidual,
};
