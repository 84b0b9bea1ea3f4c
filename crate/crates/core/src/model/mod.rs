pub mod config;
pub mod control;
pub mod field;
pub mod grid;
pub mod params;
pub mod potential;

pub use config::{
    amplitude_factor, AnalyticOptions, CondensateProfile, PulseSpec, SimulationConfig, SolverTier,
};
pub use control::{evaluate_control, integral_weight, ControlSchedule};
pub use field::ComplexField1D;
pub use grid::{build_grid, Grid1D};
pub use params::{chemical_phase_rate, ParamsBuilder, PhysicalParams};
pub use potential::{PotentialFrame, PotentialKind, PotentialSpec};
