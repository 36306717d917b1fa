//! Normal-mode coordinates of the periodic chain.
//!
//! The transform is unitary, `A_k = N^{-1/2} Σ_j q_j exp(2πi jk/N)` and the
//! same for `π_k`, so the harmonic Hamiltonian becomes
//! `Σ_k (|π_k|² + ω_k² |A_k|²)/2` with `ω_k = 2 sin(πk/N)`.
//!
//! Both real fields are packed into one complex transform (`q + i p`) and
//! separated afterwards using the Hermitian symmetry of real-input spectra.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{FpuError, Result};
use crate::fft::{Direction, Radix2Plan};
use crate::lattice::ChainState;

/// Relative Hermitian-symmetry defect tolerated by [`from_modes`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

pub fn mode_frequency(k: usize, n_sites: usize) -> Result<f64> {
    if k >= n_sites {
        return Err(FpuError::ModeOutOfRange { k, n_sites });
    }
    // Mirror into [0, N/2] so that ω_k == ω_{N-k} bitwise.
    let k = k.min(n_sites - k);
    Ok(2.0 * (PI * k as f64 / n_sites as f64).sin())
}

/// All `N` frequencies, exactly symmetric under `k -> N - k`.
pub fn mode_frequencies(n_sites: usize) -> Vec<f64> {
    (0..n_sites)
        .map(|k| mode_frequency(k, n_sites).expect("index in range"))
        .collect()
}

/// Complex normal-mode amplitudes `A_k` and momenta `π_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub amplitudes: Vec<Complex64>,
    pub momenta: Vec<Complex64>,
    pub t: f64,
}

impl ModeState {
    pub fn zero(n_sites: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); n_sites],
            momenta: vec![Complex64::new(0.0, 0.0); n_sites],
            t: 0.0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len()
    }

    /// `max_k |X_k - conj(X_{N-k})|` over amplitudes and momenta, including
    /// the imaginary parts of the self-conjugate entries `0` and `N/2`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n_sites();
        [&self.amplitudes, &self.momenta]
            .into_iter()
            .flat_map(|x| (0..n).map(move |k| (x[k] - x[(n - k) % n].conj()).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.amplitudes
            .iter()
            .chain(&self.momenta)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Per-mode harmonic energies at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    pub energies: Vec<f64>,
    pub t: f64,
}

impl EnergySpectrum {
    pub fn new(energies: Vec<f64>, t: f64) -> Self {
        Self { energies, t }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }

    /// Drops the `k = 0` translation mode, leaving the `N - 1` oscillating modes.
    pub fn without_zero_mode(&self) -> Self {
        Self {
            energies: self.energies.iter().skip(1).copied().collect(),
            t: self.t,
        }
    }
}

/// Reusable transform for one chain size: FFT plan, frequencies and scratch.
#[derive(Debug, Clone)]
pub struct ModeTransform {
    plan: Radix2Plan,
    frequencies: Vec<f64>,
    scale: f64,
    scratch: Vec<Complex64>,
}

impl ModeTransform {
    pub fn new(n_sites: usize) -> Result<Self> {
        let plan = Radix2Plan::new(n_sites)?;
        Ok(Self {
            plan,
            frequencies: mode_frequencies(n_sites),
            scale: 1.0 / (n_sites as f64).sqrt(),
            scratch: vec![Complex64::new(0.0, 0.0); n_sites],
        })
    }

    pub fn n_sites(&self) -> usize {
        self.plan.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Real space to modes, writing into caller buffers.
    pub fn forward_into(
        &mut self,
        q: &[f64],
        p: &[f64],
        amplitudes: &mut [Complex64],
        momenta: &mut [Complex64],
    ) {
        let n = self.n_sites();
        for ((z, &qj), &pj) in self.scratch.iter_mut().zip(q).zip(p) {
            *z = Complex64::new(qj, pj);
        }
        self.plan.process(&mut self.scratch, Direction::Positive);
        let half_scale = 0.5 * self.scale;
        for k in 0..n {
            let z = self.scratch[k];
            let mirror = self.scratch[(n - k) % n].conj();
            amplitudes[k] = (z + mirror) * half_scale;
            // (z - mirror) / 2i
            let d = z - mirror;
            momenta[k] = Complex64::new(d.im, -d.re) * half_scale;
        }
    }

    /// Modes to real space, writing into caller buffers. Assumes Hermitian input.
    pub fn inverse_into(
        &mut self,
        amplitudes: &[Complex64],
        momenta: &[Complex64],
        q: &mut [f64],
        p: &mut [f64],
    ) {
        for ((z, &a), &m) in self.scratch.iter_mut().zip(amplitudes).zip(momenta) {
            // a + i m
            *z = Complex64::new(a.re - m.im, a.im + m.re);
        }
        self.plan.process(&mut self.scratch, Direction::Negative);
        for ((z, qj), pj) in self.scratch.iter().zip(q.iter_mut()).zip(p.iter_mut()) {
            *qj = z.re * self.scale;
            *pj = z.im * self.scale;
        }
    }

    pub fn to_modes(&mut self, state: &ChainState) -> Result<ModeState> {
        self.check_len(state.n_sites())?;
        let mut modes = ModeState::zero(self.n_sites());
        self.forward_into(
            &state.q,
            &state.p,
            &mut modes.amplitudes,
            &mut modes.momenta,
        );
        modes.t = state.t;
        Ok(modes)
    }

    pub fn from_modes(&mut self, modes: &ModeState) -> Result<ChainState> {
        self.check_len(modes.n_sites())?;
        let defect = modes.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE * modes.max_magnitude() {
            return Err(FpuError::InvalidModeState { defect });
        }
        let mut state = ChainState::zero(self.n_sites());
        self.inverse_into(
            &modes.amplitudes,
            &modes.momenta,
            &mut state.q,
            &mut state.p,
        );
        state.t = modes.t;
        Ok(state)
    }

    pub fn energies_into(&self, amplitudes: &[Complex64], momenta: &[Complex64], out: &mut [f64]) {
        for (((e, a), m), w) in out
            .iter_mut()
            .zip(amplitudes)
            .zip(momenta)
            .zip(&self.frequencies)
        {
            *e = 0.5 * (m.norm_sqr() + w * w * a.norm_sqr());
        }
    }

    pub fn mode_energies(&self, modes: &ModeState) -> Result<EnergySpectrum> {
        self.check_len(modes.n_sites())?;
        let mut energies = vec![0.0; self.n_sites()];
        self.energies_into(&modes.amplitudes, &modes.momenta, &mut energies);
        Ok(EnergySpectrum::new(energies, modes.t))
    }

    /// Mode energies of a real-space state.
    pub fn spectrum(&mut self, state: &ChainState) -> Result<EnergySpectrum> {
        let modes = self.to_modes(state)?;
        self.mode_energies(&modes)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n_sites() {
            Ok(())
        } else {
            Err(FpuError::InvalidState(format!(
                "state has {len} sites, transform expects {}",
                self.n_sites()
            )))
        }
    }
}

pub fn to_modes(state: &ChainState) -> Result<ModeState> {
    ModeTransform::new(state.n_sites())?.to_modes(state)
}

pub fn from_modes(modes: &ModeState) -> Result<ChainState> {
    ModeTransform::new(modes.n_sites())?.from_modes(modes)
}

pub fn mode_energies(modes: &ModeState, n_sites: usize) -> Result<EnergySpectrum> {
    if modes.n_sites() != n_sites {
        return Err(FpuError::InvalidState(format!(
            "mode state has {} entries, expected {n_sites}",
            modes.n_sites()
        )));
    }
    ModeTransform::new(n_sites)?.mode_energies(modes)
}

/// Standing wave of mode `k` at rest, carrying harmonic energy `ω_k² a² / 2`.
///
/// The phase is fixed so that `q_j ∝ cos(2πkj/N)`. For `k < N/2` the energy is
/// shared equally by the degenerate pair `(k, N - k)`.
pub fn excite_mode(k: usize, amplitude: f64, n_sites: usize) -> Result<ChainState> {
    if !n_sites.is_power_of_two() || n_sites < 4 {
        return Err(FpuError::InvalidParams(format!(
            "n_sites = {n_sites} must be a power of two and at least 4"
        )));
    }
    if k == 0 || k > n_sites / 2 {
        return Err(FpuError::ModeOutOfRange { k, n_sites });
    }
    if !amplitude.is_finite() {
        return Err(FpuError::InvalidState(format!(
            "amplitude {amplitude} is not finite"
        )));
    }
    let n = n_sites as f64;
    let coefficient = if 2 * k == n_sites {
        amplitude / n.sqrt()
    } else {
        amplitude * (2.0 / n).sqrt()
    };
    let q = (0..n_sites)
        .map(|j| {
            // Reduce kj mod N before scaling so the phase is exact for large indices.
            let phase = 2.0 * PI * ((k * j) % n_sites) as f64 / n;
            coefficient * phase.cos()
        })
        .collect();
    ChainState::new(q, vec![0.0; n_sites], 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{energy_parts, ModelParams};

    fn sample_state(n: usize) -> ChainState {
        let q = (0..n).map(|j| (j as f64 * 0.91).sin() + 0.3).collect();
        let p = (0..n).map(|j| (j as f64 * 1.7).cos() - 0.1).collect();
        ChainState::new(q, p, 0.0).unwrap()
    }

    #[test]
    fn frequencies() {
        assert_eq!(mode_frequency(0, 4).unwrap(), 0.0);
        assert!((mode_frequency(2, 4).unwrap() - 2.0).abs() < 1e-15);
        assert!((mode_frequency(1, 4).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            mode_frequency(4, 4),
            Err(FpuError::ModeOutOfRange { k: 4, n_sites: 4 })
        ));
        let w = mode_frequencies(64);
        for k in 1..64 {
            assert_eq!(w[k], w[64 - k]);
        }
    }

    #[test]
    fn zero_and_constant_states() {
        let modes = to_modes(&ChainState::zero(8)).unwrap();
        assert_eq!(modes.max_magnitude(), 0.0);
        assert_eq!(from_modes(&modes).unwrap(), ChainState::zero(8));

        let constant = ChainState::new(vec![1.5; 8], vec![0.0; 8], 0.0).unwrap();
        let modes = to_modes(&constant).unwrap();
        assert!((modes.amplitudes[0] - Complex64::new(1.5 * 8f64.sqrt(), 0.0)).norm() < 1e-14);
        for k in 1..8 {
            assert!(modes.amplitudes[k].norm() < 1e-14);
            assert!(modes.momenta[k].norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_symmetry() {
        let state = sample_state(16);
        let mut transform = ModeTransform::new(16).unwrap();
        let modes = transform.to_modes(&state).unwrap();
        assert!(modes.hermitian_defect() <= 1e-12 * modes.max_magnitude());
        assert!(modes.amplitudes[0].im.abs() < 1e-15 && modes.momenta[0].im.abs() < 1e-15);
        let back = transform.from_modes(&modes).unwrap();
        for (a, b) in back
            .q
            .iter()
            .chain(&back.p)
            .zip(state.q.iter().chain(&state.p))
        {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval() {
        let state = sample_state(32);
        let params = ModelParams::alpha_fpu(32, 0.0).unwrap();
        let harmonic = energy_parts(&state, &params).unwrap().harmonic();
        let spectrum = ModeTransform::new(32).unwrap().spectrum(&state).unwrap();
        assert!((spectrum.total() - harmonic).abs() < 1e-12 * harmonic);
        for k in 1..32 {
            assert!(
                (spectrum.energies[k] - spectrum.energies[32 - k]).abs()
                    <= 1e-10 * spectrum.energies[k]
            );
        }
    }

    #[test]
    fn non_hermitian_modes_are_rejected() {
        let mut modes = ModeState::zero(8);
        modes.amplitudes[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            from_modes(&modes),
            Err(FpuError::InvalidModeState { .. })
        ));
        modes.amplitudes[7] = Complex64::new(1.0, 0.0);
        assert!(from_modes(&modes).is_ok());
    }

    #[test]
    fn conjugate_pair_gives_cosine() {
        let mut modes = ModeState::zero(8);
        let a = Complex64::from_polar(0.7, 0.4);
        modes.amplitudes[3] = a;
        modes.amplitudes[5] = a.conj();
        let state = from_modes(&modes).unwrap();
        for j in 0..8 {
            // q_j = 2|a| cos(θ - 2π·3j/8) / √8
            let expected = 2.0 * 0.7 * (0.4 - 2.0 * PI * 3.0 * j as f64 / 8.0).cos() / 8f64.sqrt();
            assert!((state.q[j] - expected).abs() < 1e-14);
            assert!(state.p[j].abs() < 1e-15);
        }
    }

    #[test]
    fn single_pair_energy() {
        let mut modes = ModeState::zero(16);
        modes.amplitudes[1] = Complex64::new(0.0, 0.5);
        modes.amplitudes[15] = Complex64::new(0.0, -0.5);
        let spectrum = mode_energies(&modes, 16).unwrap();
        let w = mode_frequency(1, 16).unwrap();
        assert!((spectrum.energies[1] - w * w * 0.125).abs() < 1e-16);
        assert_eq!(spectrum.energies[1], spectrum.energies[15]);
        assert!(spectrum
            .energies
            .iter()
            .enumerate()
            .all(|(k, &e)| k == 1 || k == 15 || e == 0.0));
    }

    #[test]
    fn excitation_energy() {
        for (n, k, a) in [(8, 2, 1.0), (8, 4, 1.3), (512, 1, 40.0), (64, 5, 2.0)] {
            let state = excite_mode(k, a, n).unwrap();
            assert!(state.p.iter().all(|&p| p == 0.0));
            let spectrum = ModeTransform::new(n).unwrap().spectrum(&state).unwrap();
            let w = mode_frequency(k, n).unwrap();
            let target = 0.5 * w * w * a * a;
            let pair = if 2 * k == n {
                spectrum.energies[k]
            } else {
                spectrum.energies[k] + spectrum.energies[n - k]
            };
            assert!((pair - target).abs() <= 1e-10 * target, "n={n} k={k}");
            for (i, &e) in spectrum.energies.iter().enumerate() {
                if i != k && i != n - k {
                    assert!(e <= 1e-12 * target, "n={n} k={k} leak at {i}");
                }
            }
        }
        let big = excite_mode(1, 40.0, 512).unwrap();
        let e = energy_parts(&big, &ModelParams::alpha_fpu(512, 0.0).unwrap())
            .unwrap()
            .total();
        assert!((e - 0.12047705736873454).abs() < 1e-9);
    }

    #[test]
    fn excitation_errors() {
        assert_eq!(excite_mode(1, 0.0, 8).unwrap(), ChainState::zero(8));
        assert!(matches!(
            excite_mode(0, 1.0, 8),
            Err(FpuError::ModeOutOfRange { .. })
        ));
        assert!(matches!(
            excite_mode(5, 1.0, 8),
            Err(FpuError::ModeOutOfRange { .. })
        ));
        assert!(excite_mode(1, f64::NAN, 8).is_err());
    }
}
