//! Time stepping for the chain.
//!
//! Every scheme implements [`Integrator`] and is looked up by name through an
//! [`IntegratorRegistry`]. Two are built in:
//!
//! * `leapfrog`: kick-drift-kick velocity Verlet on the full force.
//! * `spectral`: the symmetric splitting `K(h/2) ∘ R(h) ∘ K(h/2)`, where `K`
//!   is the exact flow of the cubic potential (a momentum kick) and `R` the
//!   exact harmonic flow, a rotation of every normal mode.
//!
//! [`integrate`] drives any of them across a list of sample times.

mod leapfrog;
mod registry;
mod spectral;

use std::fmt;
use std::str::FromStr;

use crate::error::{FpuError, Result};
use crate::lattice::{cubic_force_into, ChainState, ModelParams};
use crate::modes::{mode_frequencies, ModeState};

pub use leapfrog::Leapfrog;
pub use registry::{IntegratorFactory, IntegratorRegistry};
pub use spectral::{RotationTable, SpectralSplit};

/// Positive, finite integration step.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StepSize(f64);

impl StepSize {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 {
            Ok(Self(h))
        } else {
            Err(FpuError::InvalidStep(format!(
                "h = {h} must be positive and finite"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The built-in schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegratorKind {
    Leapfrog,
    SpectralSplit,
}

impl IntegratorKind {
    /// Registry name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Leapfrog => Leapfrog::NAME,
            Self::SpectralSplit => SpectralSplit::NAME,
        }
    }

    /// Step used when none is configured: 0.02 for leap-frog, 1 for the
    /// spectral splitting.
    pub fn default_step(self) -> StepSize {
        match self {
            Self::Leapfrog => StepSize(0.02),
            Self::SpectralSplit => StepSize(1.0),
        }
    }

    pub fn build(self, params: &ModelParams) -> Result<Box<dyn Integrator>> {
        IntegratorRegistry::with_builtins().create(self.name(), params)
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegratorKind {
    type Err = FpuError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leapfrog" | "leap-frog" | "verlet" => Ok(Self::Leapfrog),
            "spectral" | "spectral_split" | "spectral-split" => Ok(Self::SpectralSplit),
            other => Err(FpuError::UnknownIntegrator(other.to_string())),
        }
    }
}

/// A one-step map of the chain's phase space.
pub trait Integrator: Send {
    fn name(&self) -> &'static str;

    /// Rejects steps the scheme cannot take stably.
    fn check_step(&self, h: StepSize) -> Result<()>;

    /// Advances `q` and `p` by `h` in place. Time bookkeeping is the caller's.
    fn advance(&mut self, state: &mut ChainState, params: &ModelParams, h: f64);
}

/// `p += h · F₃(q)`: the exact flow of the cubic potential, in place.
pub fn cubic_kick_in_place(
    state: &mut ChainState,
    params: &ModelParams,
    h: f64,
    buffer: &mut Vec<f64>,
) {
    if params.alpha() == 0.0 || h == 0.0 {
        return;
    }
    buffer.resize(state.n_sites(), 0.0);
    cubic_force_into(&state.q, params, buffer);
    for (p, f) in state.p.iter_mut().zip(buffer.iter()) {
        *p += h * f;
    }
}

pub fn cubic_kick(state: &ChainState, params: &ModelParams, h: f64) -> Result<ChainState> {
    state.validate(params)?;
    let mut next = state.clone();
    cubic_kick_in_place(&mut next, params, h, &mut Vec::new());
    Ok(next)
}

/// Exact harmonic flow over `h`: every mode rotates at its own frequency.
pub fn linear_flow(modes: &ModeState, n_sites: usize, h: f64) -> Result<ModeState> {
    if modes.n_sites() != n_sites {
        return Err(FpuError::InvalidState(format!(
            "mode state has {} entries, expected {n_sites}",
            modes.n_sites()
        )));
    }
    let table = RotationTable::new(&mode_frequencies(n_sites), h);
    let mut next = modes.clone();
    table.apply(&mut next.amplitudes, &mut next.momenta);
    next.t = modes.t + h;
    Ok(next)
}

fn check_blow_up(state: &ChainState, step: u64) -> Result<()> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(FpuError::BlowUp { step, t: state.t })
    }
}

fn single_step(
    mut integrator: impl Integrator,
    state: &ChainState,
    params: &ModelParams,
    h: StepSize,
) -> Result<ChainState> {
    state.validate(params)?;
    integrator.check_step(h)?;
    let mut next = state.clone();
    integrator.advance(&mut next, params, h.get());
    next.t = state.t + h.get();
    check_blow_up(&next, 1)?;
    Ok(next)
}

pub fn leapfrog_step(state: &ChainState, params: &ModelParams, h: StepSize) -> Result<ChainState> {
    single_step(Leapfrog::new(), state, params, h)
}

pub fn spectral_split_step(
    state: &ChainState,
    params: &ModelParams,
    h: StepSize,
) -> Result<ChainState> {
    single_step(SpectralSplit::new(params.n_sites())?, state, params, h)
}

/// Relative slack when deciding whether a stop lies on the `t0 + n·h` grid.
const GRID_SLACK: f64 = 1e-9;

/// Steps `state` to `t_end`, calling `sampler` at every requested sample time.
///
/// Time is tracked as `t0 + n·h` from the last off-grid stop, so stops that
/// are integer multiples of `h` are hit without accumulated drift. A stop off
/// the grid (typically `t_end`) is reached with one shortened step.
pub fn integrate<F>(
    mut state: ChainState,
    params: &ModelParams,
    integrator: &mut dyn Integrator,
    h: StepSize,
    t_end: f64,
    sample_times: &[f64],
    mut sampler: F,
) -> Result<ChainState>
where
    F: FnMut(&ChainState) -> Result<()>,
{
    state.validate(params)?;
    integrator.check_step(h)?;
    if t_end.is_nan() || t_end < state.t {
        return Err(FpuError::InvalidConfig(format!(
            "t_end = {t_end} precedes the state time {}",
            state.t
        )));
    }

    let mut stops: Vec<(f64, bool)> = sample_times
        .iter()
        .filter(|&&t| t >= state.t && t <= t_end)
        .map(|&t| (t, true))
        .collect();
    stops.push((t_end, false));
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
    stops.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 |= later.1;
            true
        } else {
            false
        }
    });

    let h = h.get();
    let mut base_t = state.t;
    let mut grid_steps: u64 = 0;
    let mut total_steps: u64 = 0;
    for (stop, is_sample) in stops {
        let offset = (stop - base_t) / h;
        let nearest = offset.round();
        let on_grid = (offset - nearest).abs() <= GRID_SLACK * nearest.max(1.0);
        let full_steps = if on_grid {
            nearest as u64
        } else {
            offset.floor() as u64
        };
        while grid_steps < full_steps {
            integrator.advance(&mut state, params, h);
            grid_steps += 1;
            total_steps += 1;
            state.t = base_t + grid_steps as f64 * h;
            check_blow_up(&state, total_steps)?;
        }
        if !on_grid {
            let remainder = stop - state.t;
            if remainder > 0.0 {
                integrator.advance(&mut state, params, remainder);
                total_steps += 1;
            }
            state.t = stop;
            check_blow_up(&state, total_steps)?;
            base_t = stop;
            grid_steps = 0;
        }
        if is_sample {
            sampler(&state)?;
        }
    }
    Ok(state)
}
