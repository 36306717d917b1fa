//! Simulation of the periodic α-FPU oscillator chain and spectral-entropy
//! diagnostics of its relaxation towards energy equipartition.
//!
//! * [`lattice`]: parameters, phase-space state, Hamiltonian and forces.
//! * [`modes`]: unitary normal-mode transform and per-mode energies.
//! * [`integrators`]: leap-frog and the spectral splitting, behind a
//!   name-keyed registry.
//! * [`estimators`]: `n_eff` on instantaneous mode energies or on packets.
//! * [`experiment`]: relaxation runs, sweeps and equilibrium-time detection.
//! * [`io`]: configuration and CSV formats.
//! * [`checks`]: the built-in invariant suite.

pub mod checks;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fft;
pub mod integrators;
pub mod io;
pub mod lattice;
pub mod modes;
mod unimodular;

pub use error::{FpuError, Result};
pub use estimators::{equilibrium_asymptote, n_eff, EstimatorVariant, NeffSample};
pub use experiment::{
    run_experiment, sweep, ExperimentConfig, ExperimentError, RelaxationRecord, RelaxationSample,
};
pub use integrators::{Integrator, IntegratorKind, IntegratorRegistry, StepSize};
pub use lattice::{ChainState, ModelParams};
pub use modes::{EnergySpectrum, ModeState, ModeTransform};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
