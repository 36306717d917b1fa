//! Spectral-entropy estimate of how many modes share the energy.
//!
//! With normalized energies `e_i = E_i / Σ E`, the entropy is
//! `S = -Σ e_i ln e_i` and the effective fraction of active entries is
//! `n_eff = exp(S) / n`, where `n` is the number of entries fed in. It is
//! `1/n` when one entry holds everything and `1` at exact equipartition.

use crate::error::{FpuError, Result};
use crate::modes::EnergySpectrum;

/// Which energies the entropy is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorVariant {
    /// Every spectrum entry on its own.
    Instantaneous,
    /// Sums over contiguous blocks of `n_per_packet` entries.
    Packets { n_per_packet: usize },
}

impl EstimatorVariant {
    /// Number of entries the entropy runs over for a spectrum of `len` values.
    pub fn n_entries(&self, len: usize) -> Result<usize> {
        match *self {
            Self::Instantaneous => Ok(len),
            Self::Packets { n_per_packet } => {
                if n_per_packet == 0 || !len.is_multiple_of(n_per_packet) {
                    Err(FpuError::IncompatiblePacketSize {
                        packet_size: n_per_packet,
                        n_entries: len,
                    })
                } else {
                    Ok(len / n_per_packet)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeffSample {
    pub t: f64,
    pub n_eff: f64,
    pub entropy: f64,
    pub n_entries: usize,
}

pub fn normalize_energies(spectrum: &EnergySpectrum) -> Result<Vec<f64>> {
    normalize(&spectrum.energies)
}

fn normalize(energies: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = energies.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(FpuError::InvalidDistribution(format!(
            "energy {bad} is negative or not finite"
        )));
    }
    let total: f64 = energies.iter().sum();
    if total <= 0.0 {
        return Err(FpuError::DegenerateSpectrum);
    }
    Ok(energies.iter().map(|e| e / total).collect())
}

/// `-Σ e ln e` with `0 ln 0 = 0`, clamped to `[0, ln n]` against rounding.
/// Exactly equal entries give exactly `ln n`.
pub fn spectral_entropy(e: &[f64]) -> Result<f64> {
    if let Some(bad) = e.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(FpuError::InvalidDistribution(format!(
            "entry {bad} is negative or not finite"
        )));
    }
    let total: f64 = e.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(FpuError::InvalidDistribution(format!(
            "entries sum to {total}, not 1"
        )));
    }
    let max_entropy = (e.len() as f64).ln();
    if e.windows(2).all(|w| w[0] == w[1]) {
        return Ok(max_entropy);
    }
    let s: f64 = e.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    Ok(s.clamp(0.0, max_entropy))
}

/// Block sums over `n_per_packet` consecutive entries.
pub fn packet_energies(energies: &[f64], n_per_packet: usize) -> Result<Vec<f64>> {
    EstimatorVariant::Packets { n_per_packet }.n_entries(energies.len())?;
    Ok(energies
        .chunks_exact(n_per_packet)
        .map(|c| c.iter().sum())
        .collect())
}

pub fn n_eff(spectrum: &EnergySpectrum, variant: EstimatorVariant) -> Result<NeffSample> {
    let packed;
    let entries: &[f64] = match variant {
        EstimatorVariant::Instantaneous => &spectrum.energies,
        EstimatorVariant::Packets { n_per_packet } => {
            packed = packet_energies(&spectrum.energies, n_per_packet)?;
            &packed
        }
    };
    let entropy = spectral_entropy(&normalize(entries)?)?;
    let n_entries = entries.len();
    let max_entropy = (n_entries as f64).ln();
    let n_eff = if entropy == max_entropy {
        1.0
    } else {
        entropy.exp() / n_entries as f64
    };
    Ok(NeffSample {
        t: spectrum.t,
        n_eff,
        entropy,
        n_entries,
    })
}

/// Plateau `exp(-1/2)` expected at equilibrium once Boltzmann-distributed
/// fluctuations of the normalized energies (`⟨δe²⟩ = ē²`) are accounted for
/// to second order.
pub fn equilibrium_asymptote() -> f64 {
    (-0.5f64).exp()
}
