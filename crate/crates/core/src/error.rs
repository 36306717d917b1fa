use thiserror::Error;

/// Errors raised by the chain model, transforms, integrators and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FpuError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid chain state: {0}")]
    InvalidState(String),

    #[error("invalid mode state: Hermitian symmetry defect {defect:e} exceeds tolerance")]
    InvalidModeState { defect: f64 },

    #[error("mode index {k} out of range for chain of {n_sites} sites")]
    ModeOutOfRange { k: usize, n_sites: usize },

    #[error("invalid step size: {0}")]
    InvalidStep(String),

    #[error("numerical blow-up at step {step} (t = {t})")]
    BlowUp { step: u64, t: f64 },

    #[error("degenerate spectrum: no positive energy")]
    DegenerateSpectrum,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("packet size {packet_size} does not divide {n_entries} spectrum entries")]
    IncompatiblePacketSize {
        packet_size: usize,
        n_entries: usize,
    },

    #[error("unknown integrator `{0}`")]
    UnknownIntegrator(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, FpuError>;
