use crate::error::{FpuError, Result};
use crate::lattice::{force_into, ChainState, ModelParams};

use super::{Integrator, StepSize};

/// Kick-drift-kick velocity Verlet.
///
/// Explicit, so it inherits the harmonic stability limit `h·ω_max < 2`; with
/// `ω_max = 2` every step must satisfy `h < 1`.
#[derive(Debug, Clone, Default)]
pub struct Leapfrog {
    force: Vec<f64>,
}

impl Leapfrog {
    pub const NAME: &'static str = "leapfrog";

    /// Largest normal-mode frequency of the periodic chain.
    const MAX_FREQUENCY: f64 = 2.0;

    pub fn new() -> Self {
        Self::default()
    }

    fn kick(&mut self, state: &mut ChainState, params: &ModelParams, dt: f64) {
        force_into(&state.q, params, &mut self.force);
        for (p, f) in state.p.iter_mut().zip(&self.force) {
            *p += dt * f;
        }
    }
}

impl Integrator for Leapfrog {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn check_step(&self, h: StepSize) -> Result<()> {
        if h.get() * Self::MAX_FREQUENCY < 2.0 {
            Ok(())
        } else {
            Err(FpuError::InvalidStep(format!(
                "leap-frog needs h < 1 for stability (h·ω_max < 2), got h = {h}"
            )))
        }
    }

    fn advance(&mut self, state: &mut ChainState, params: &ModelParams, h: f64) {
        self.force.resize(state.n_sites(), 0.0);
        let half = 0.5 * h;
        self.kick(state, params, half);
        for (q, p) in state.q.iter_mut().zip(&state.p) {
            *q += h * p;
        }
        self.kick(state, params, half);
    }
}
