//! The periodic FPU chain: parameters, phase-space state and the Hamiltonian.
//!
//! Sites are indexed `0..N` with all index arithmetic taken modulo `N`, so the
//! chain has `N` bonds `d_k = q_k - q_{k-1}` and the pair potential
//! `V(d) = d²/2 + α d³/3 + β d⁴/4` is summed over every bond.

use crate::error::{FpuError, Result};

/// Chain size and anharmonic couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n_sites: usize,
    alpha: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(n_sites: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !n_sites.is_power_of_two() {
            return Err(FpuError::InvalidParams(format!(
                "n_sites = {n_sites} must be a power of two"
            )));
        }
        Self::real_space(n_sites, alpha, beta)
    }

    /// Parameters for real-space evaluation only (energy, forces, leap-frog).
    ///
    /// Any `n_sites >= 3` is accepted; the normal-mode transform still
    /// rejects sizes that are not powers of two.
    pub fn real_space(n_sites: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n_sites < 3 {
            return Err(FpuError::InvalidParams(format!(
                "n_sites = {n_sites} must be at least 3"
            )));
        }
        for (name, value) in [("alpha", alpha), ("beta", beta)] {
            if !value.is_finite() || value < 0.0 {
                return Err(FpuError::InvalidParams(format!(
                    "{name} = {value} must be finite and non-negative"
                )));
            }
        }
        Ok(Self {
            n_sites,
            alpha,
            beta,
        })
    }

    /// The α-FPU chain (β = 0).
    pub fn alpha_fpu(n_sites: usize, alpha: f64) -> Result<Self> {
        Self::new(n_sites, alpha, 0.0)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same chain with the anharmonic couplings switched off.
    pub fn harmonic(&self) -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            ..*self
        }
    }
}

impl Default for ModelParams {
    /// N = 512, α = 1/4, β = 0.
    fn default() -> Self {
        Self {
            n_sites: 512,
            alpha: 0.25,
            beta: 0.0,
        }
    }
}

/// Positions, momenta and time of the chain (unit masses).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl ChainState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        let state = Self { q, p, t };
        if state.q.len() != state.p.len() {
            return Err(FpuError::InvalidState(format!(
                "q has {} entries but p has {}",
                state.q.len(),
                state.p.len()
            )));
        }
        state.check_finite()?;
        Ok(state)
    }

    /// The chain at rest in its equilibrium configuration.
    pub fn zero(n_sites: usize) -> Self {
        Self {
            q: vec![0.0; n_sites],
            p: vec![0.0; n_sites],
            t: 0.0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.p).all(|x| x.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(FpuError::InvalidState("non-finite component".into()))
        }
    }

    /// Checks that the state has the shape required by `params` and is finite.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let n = params.n_sites();
        if self.q.len() != n || self.p.len() != n {
            return Err(FpuError::InvalidState(format!(
                "state has {}/{} entries, expected {n}",
                self.q.len(),
                self.p.len()
            )));
        }
        if self.t < 0.0 {
            return Err(FpuError::InvalidState(format!("negative time {}", self.t)));
        }
        self.check_finite()
    }

    pub fn total_momentum(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// The Hamiltonian split into its homogeneous pieces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub quadratic: f64,
    pub cubic: f64,
    pub quartic: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.quadratic + self.cubic + self.quartic
    }

    /// `T + V₂`, the part diagonalised by the normal-mode transform.
    pub fn harmonic(&self) -> f64 {
        self.kinetic + self.quadratic
    }
}

#[inline]
fn bond(q: &[f64], k: usize) -> f64 {
    let n = q.len();
    q[k] - q[(k + n - 1) % n]
}

/// Kinetic energy and the three potential pieces, summed over all sites and bonds.
pub fn energy_parts(state: &ChainState, params: &ModelParams) -> Result<EnergyParts> {
    state.validate(params)?;
    let q = &state.q;
    let mut parts = EnergyParts {
        kinetic: 0.5 * state.p.iter().map(|p| p * p).sum::<f64>(),
        ..EnergyParts::default()
    };
    let (mut d2, mut d3, mut d4) = (0.0, 0.0, 0.0);
    for k in 0..q.len() {
        let d = bond(q, k);
        let sq = d * d;
        d2 += sq;
        d3 += sq * d;
        d4 += sq * sq;
    }
    parts.quadratic = 0.5 * d2;
    parts.cubic = params.alpha() * d3 / 3.0;
    parts.quartic = params.beta() * d4 / 4.0;
    Ok(parts)
}

pub fn total_energy(state: &ChainState, params: &ModelParams) -> Result<f64> {
    energy_parts(state, params).map(|parts| parts.total())
}

/// Writes `F_k = g(d_{k+1}) - g(d_k)` into `out`, where `g` is the bond tension.
fn bond_force_into(q: &[f64], out: &mut [f64], tension: impl Fn(f64) -> f64) {
    let n = q.len();
    debug_assert_eq!(out.len(), n);
    for (k, o) in out.iter_mut().enumerate() {
        *o = tension(bond(q, k));
    }
    let first = out[0];
    for k in 0..n - 1 {
        out[k] = out[k + 1] - out[k];
    }
    out[n - 1] = first - out[n - 1];
}

/// Full force `-∂H/∂q` into a caller-provided buffer. No validation.
pub fn force_into(q: &[f64], params: &ModelParams, out: &mut [f64]) {
    let (alpha, beta) = (params.alpha(), params.beta());
    if beta == 0.0 {
        bond_force_into(q, out, |d| d + alpha * d * d);
    } else {
        bond_force_into(q, out, |d| d + d * d * (alpha + beta * d));
    }
}

/// Cubic-only force `-∂V₃/∂q` into a caller-provided buffer. No validation.
pub fn cubic_force_into(q: &[f64], params: &ModelParams, out: &mut [f64]) {
    let alpha = params.alpha();
    bond_force_into(q, out, |d| alpha * d * d);
}

pub fn force(state: &ChainState, params: &ModelParams) -> Result<Vec<f64>> {
    state.validate(params)?;
    let mut out = vec![0.0; state.n_sites()];
    force_into(&state.q, params, &mut out);
    Ok(out)
}

pub fn cubic_force(state: &ChainState, params: &ModelParams) -> Result<Vec<f64>> {
    state.validate(params)?;
    let mut out = vec![0.0; state.n_sites()];
    cubic_force_into(&state.q, params, &mut out);
    Ok(out)
}
