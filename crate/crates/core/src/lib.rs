//! Weak probe pulse propagating through a three-level Lambda-type
//! Bose-Einstein condensate under electromagnetically induced transparency.

pub mod analytic;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod gpe;
pub mod io;
pub mod model;
pub mod propagation;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use model::*;

/// Run the tier selected by `config`.
pub fn run(config: &SimulationConfig) -> Result<propagation::RunOutput> {
    match config.solver_tier {
        SolverTier::Full => propagation::run_full_tier(config),
        SolverTier::Reduced => propagation::run_reduced_tier(config),
        SolverTier::Analytic => analytic::run_analytic_tier(config),
    }
}
