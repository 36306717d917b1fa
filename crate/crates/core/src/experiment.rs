//! Relaxation experiments: single-mode initial data, integration on a
//! logarithmic sampling grid, both estimator variants per sample, and
//! detection of the time at which equipartition sets in.

use rayon::prelude::*;
use thiserror::Error;

use crate::error::{FpuError, Result};
use crate::estimators::{equilibrium_asymptote, n_eff, EstimatorVariant, NeffSample};
use crate::integrators::{integrate, IntegratorKind, StepSize};
use crate::lattice::{total_energy, ModelParams};
use crate::modes::{excite_mode, EnergySpectrum, ModeTransform};

/// Fraction of the asymptote a series must hold to count as relaxed.
pub const EQUILIBRIUM_FRACTION: f64 = 0.9;
/// Minimum span, in decades of time, over which the threshold must hold.
pub const SUSTAIN_DECADES: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub integrator: IntegratorKind,
    pub h: StepSize,
    pub initial_mode: usize,
    pub initial_amplitude: f64,
    pub t_end: f64,
    pub samples_per_decade: u32,
    pub packet_size: usize,
}

impl ExperimentConfig {
    pub const DEFAULT_AMPLITUDE: f64 = 40.0;
    pub const DEFAULT_T_END: f64 = 1e4;
    pub const DEFAULT_SAMPLES_PER_DECADE: u32 = 20;
    pub const DEFAULT_PACKET_SIZE: usize = 8;

    /// Mode 1, amplitude 40, `t_end = 10⁴`, 20 samples per decade, packets of
    /// 8, and the scheme's default step.
    pub fn new(params: ModelParams, integrator: IntegratorKind) -> Self {
        Self {
            params,
            integrator,
            h: integrator.default_step(),
            initial_mode: 1,
            initial_amplitude: Self::DEFAULT_AMPLITUDE,
            t_end: Self::DEFAULT_T_END,
            samples_per_decade: Self::DEFAULT_SAMPLES_PER_DECADE,
            packet_size: Self::DEFAULT_PACKET_SIZE,
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            initial_amplitude: amplitude,
            ..self.clone()
        }
    }

    pub fn packet_variant(&self) -> EstimatorVariant {
        EstimatorVariant::Packets {
            n_per_packet: self.packet_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n_sites();
        let invalid = |msg: String| Err(FpuError::InvalidConfig(msg));
        if !n.is_power_of_two() {
            return invalid(format!("n = {n} is not a power of two"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return invalid(format!(
                "t_end = {} must be positive and finite",
                self.t_end
            ));
        }
        if self.initial_mode == 0 || self.initial_mode > n / 2 {
            return invalid(format!(
                "mode = {} must lie in [1, {}]",
                self.initial_mode,
                n / 2
            ));
        }
        if !self.initial_amplitude.is_finite() || self.initial_amplitude == 0.0 {
            return invalid(format!(
                "amplitude = {} must be finite and non-zero",
                self.initial_amplitude
            ));
        }
        if self.samples_per_decade == 0 {
            return invalid("samples_per_decade must be positive".into());
        }
        if self.packet_size == 0 || !n.is_multiple_of(self.packet_size) {
            return invalid(format!(
                "packet_size = {} does not divide n = {n}",
                self.packet_size
            ));
        }
        self.integrator.build(&self.params)?.check_step(self.h)
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new(ModelParams::default(), IntegratorKind::Leapfrog)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSample {
    pub t: f64,
    pub n_eff_inst: f64,
    pub n_eff_packet: f64,
    pub total_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelaxationRecord {
    pub samples: Vec<RelaxationSample>,
    pub t_eq_instantaneous: Option<f64>,
    pub t_eq_packet: Option<f64>,
    pub max_energy_drift: f64,
}

impl RelaxationRecord {
    pub fn initial_energy(&self) -> Option<f64> {
        self.samples.first().map(|s| s.total_energy)
    }

    /// `|E(t) - E(0)| / |E(0)|` (absolute difference when `E(0) = 0`).
    pub fn drift(&self, index: usize) -> f64 {
        let e0 = self.samples[0].total_energy;
        let diff = (self.samples[index].total_energy - e0).abs();
        if e0 == 0.0 {
            diff
        } else {
            diff / e0.abs()
        }
    }

    fn finalize(&mut self) {
        let times: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let inst: Vec<f64> = self.samples.iter().map(|s| s.n_eff_inst).collect();
        let packet: Vec<f64> = self.samples.iter().map(|s| s.n_eff_packet).collect();
        let asymptote = equilibrium_asymptote();
        self.t_eq_instantaneous = detect_equilibrium(&times, &inst, asymptote);
        self.t_eq_packet = detect_equilibrium(&times, &packet, asymptote);
        self.max_energy_drift = (0..self.samples.len())
            .map(|i| self.drift(i))
            .fold(0.0, f64::max);
    }
}

/// A run that stopped early; carries everything sampled before the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("experiment aborted after {} samples: {source}", record.samples.len())]
pub struct ExperimentError {
    pub record: RelaxationRecord,
    #[source]
    pub source: FpuError,
}

impl From<FpuError> for ExperimentError {
    fn from(source: FpuError) -> Self {
        Self {
            record: RelaxationRecord::default(),
            source,
        }
    }
}

/// Both estimators on one spectrum: the instantaneous one over the `N - 1`
/// oscillating modes, the packet one over blocks of the full spectrum.
pub fn sample_estimators(
    spectrum: &EnergySpectrum,
    packet_size: usize,
) -> Result<(NeffSample, NeffSample)> {
    let inst = n_eff(
        &spectrum.without_zero_mode(),
        EstimatorVariant::Instantaneous,
    )?;
    let packet = n_eff(
        spectrum,
        EstimatorVariant::Packets {
            n_per_packet: packet_size,
        },
    )?;
    Ok((inst, packet))
}

pub fn run_experiment(
    config: &ExperimentConfig,
) -> std::result::Result<RelaxationRecord, ExperimentError> {
    run_experiment_with(config, |_, _| Ok(()))
}

/// As [`run_experiment`], additionally handing every sample and its mode
/// spectrum to `observer`.
pub fn run_experiment_with<F>(
    config: &ExperimentConfig,
    mut observer: F,
) -> std::result::Result<RelaxationRecord, ExperimentError>
where
    F: FnMut(&RelaxationSample, &EnergySpectrum) -> Result<()>,
{
    config.validate()?;
    let params = config.params;
    let state = excite_mode(
        config.initial_mode,
        config.initial_amplitude,
        params.n_sites(),
    )?;
    let mut transform = ModeTransform::new(params.n_sites())?;
    let mut integrator = config.integrator.build(&params)?;
    let times = sample_schedule(config.t_end, config.samples_per_decade, config.h);

    let mut record = RelaxationRecord::default();
    let outcome = integrate(
        state,
        &params,
        integrator.as_mut(),
        config.h,
        config.t_end,
        &times,
        |s| {
            if record.samples.last().is_some_and(|last| s.t <= last.t) {
                return Ok(());
            }
            let spectrum = transform.spectrum(s)?;
            let energy = total_energy(s, &params)?;
            if !(energy.is_finite() && spectrum.energies.iter().all(|e| e.is_finite())) {
                // Coordinates can stay finite while their squares overflow.
                return Err(FpuError::BlowUp {
                    step: (s.t / config.h.get()).round() as u64,
                    t: s.t,
                });
            }
            let (inst, packet) = sample_estimators(&spectrum, config.packet_size)?;
            let sample = RelaxationSample {
                t: s.t,
                n_eff_inst: inst.n_eff,
                n_eff_packet: packet.n_eff,
                total_energy: energy,
            };
            record.samples.push(sample);
            observer(&sample, &spectrum)
        },
    );
    record.finalize();
    match outcome {
        Ok(_) => Ok(record),
        Err(source) => Err(ExperimentError { record, source }),
    }
}

/// One independent run per amplitude, in input order. Runs execute in parallel.
pub fn sweep(
    base: &ExperimentConfig,
    amplitudes: &[f64],
) -> Result<Vec<std::result::Result<RelaxationRecord, ExperimentError>>> {
    if amplitudes.is_empty() {
        return Err(FpuError::InvalidConfig(
            "sweep needs at least one amplitude".into(),
        ));
    }
    Ok(amplitudes
        .par_iter()
        .map(|&a| run_experiment(&base.with_amplitude(a)))
        .collect())
}

/// Earliest sample time after which `values` stays at or above
/// `EQUILIBRIUM_FRACTION · asymptote` until the end of the series, provided
/// that tail covers at least `SUSTAIN_DECADES` of time.
pub fn detect_equilibrium(times: &[f64], values: &[f64], asymptote: f64) -> Option<f64> {
    assert_eq!(
        times.len(),
        values.len(),
        "times and values differ in length"
    );
    let threshold = EQUILIBRIUM_FRACTION * asymptote;
    let start = values
        .iter()
        .rposition(|&v| v.is_nan() || v < threshold)
        .map_or(0, |i| i + 1);
    let (&t_start, &t_last) = (times.get(start)?, times.last()?);
    (t_start == 0.0 || t_last >= t_start * 10f64.powf(SUSTAIN_DECADES)).then_some(t_start)
}

/// Logarithmically spaced sample times on the `k·h` grid.
///
/// Contains `0`, then times roughly `samples_per_decade` per decade from `h`
/// upward, then `t_end`. A horizon shorter than `h` yields only `[0]`.
pub fn sample_schedule(t_end: f64, samples_per_decade: u32, h: StepSize) -> Vec<f64> {
    let h = h.get();
    let mut times = vec![0.0];
    if t_end < h {
        return times;
    }
    let spd = samples_per_decade.max(1) as f64;
    for i in 0u32.. {
        let target = h * 10f64.powf(i as f64 / spd);
        if target > t_end {
            break;
        }
        let t = (target / h).round() * h;
        let last = *times.last().expect("non-empty");
        if t > last && t_end - t > 1e-6 * h {
            times.push(t);
        }
    }
    if t_end > *times.last().expect("non-empty") {
        times.push(t_end);
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(x: f64) -> StepSize {
        StepSize::new(x).unwrap()
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(sample_schedule(0.02, 20, h(0.02)), vec![0.0, 0.02]);
        let step = 0.5;
        assert_eq!(
            sample_schedule(100.0 * step, 1, h(step)),
            vec![0.0, step, 10.0 * step, 100.0 * step]
        );
        assert_eq!(sample_schedule(0.01, 20, h(0.02)), vec![0.0]);
    }

    #[test]
    fn schedule_is_log_uniform_on_grid() {
        let step = 0.02;
        let times = sample_schedule(1e4, 20, h(step));
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 1e4);
        let ratio_bound = 10f64.powf(1.0 / 20.0);
        for pair in times.windows(2) {
            assert!(pair[1] > pair[0]);
            if pair[0] > 0.0 {
                // One grid step of slack for the rounding at small times.
                assert!(
                    pair[1] <= pair[0] * ratio_bound + step * 1.000001,
                    "{pair:?}"
                );
            }
        }
        for &t in &times {
            let k = (t / step).round();
            assert!((t - k * step).abs() <= 1e-9 * t.max(1.0));
        }
    }

    #[test]
    fn detection_examples() {
        let asymptote = equilibrium_asymptote();
        let times: Vec<f64> = (0..=40).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        assert_eq!(
            detect_equilibrium(&times, &vec![0.61; times.len()], asymptote),
            Some(1.0)
        );
        assert_eq!(
            detect_equilibrium(&times, &vec![0.3; times.len()], asymptote),
            None
        );
        assert_eq!(
            detect_equilibrium(&[0.0, 1.0], &[0.61, 0.61], asymptote),
            Some(0.0)
        );

        // Tail shorter than half a decade does not count.
        let mut late = vec![0.1; times.len()];
        late[38..].iter_mut().for_each(|v| *v = 0.6);
        assert_eq!(detect_equilibrium(&times, &late, asymptote), None);

        // A dip after crossing restarts the clock.
        let mut dip = vec![0.6; times.len()];
        dip[..5].iter_mut().for_each(|v| *v = 0.1);
        dip[20] = 0.5;
        assert_eq!(detect_equilibrium(&times, &dip, asymptote), Some(times[21]));
    }

    #[test]
    fn logistic_crossing() {
        let asymptote = equilibrium_asymptote();
        let threshold = EQUILIBRIUM_FRACTION * asymptote;
        let times: Vec<f64> = (0..=100)
            .map(|i| 10f64.powf(1.0 + 3.0 * i as f64 / 100.0))
            .collect();
        // Logistic in log t that passes the threshold exactly at t = 1000.
        let crossing: f64 = 1000.0;
        let width = 0.2;
        let ratio: f64 = 0.61 / threshold - 1.0;
        let values: Vec<f64> = times
            .iter()
            .map(|&t| 0.61 / (1.0 + ratio * (-(t.log10() - crossing.log10()) / width).exp()))
            .collect();
        // Scalar scan oracle: first time with value at or above the threshold.
        let mut expected = None;
        for (t, v) in times.iter().zip(&values) {
            if *v >= threshold {
                expected = Some(*t);
                break;
            }
        }
        assert_eq!(detect_equilibrium(&times, &values, asymptote), expected);
        assert!(expected.unwrap() >= 1000.0 * (1.0 - 1e-12));
    }

    #[test]
    fn config_validation() {
        let base = ExperimentConfig::default();
        assert!(base.validate().is_ok());
        let bad = [
            ExperimentConfig {
                t_end: 0.0,
                ..base.clone()
            },
            ExperimentConfig {
                initial_mode: 0,
                ..base.clone()
            },
            ExperimentConfig {
                initial_mode: 257,
                ..base.clone()
            },
            ExperimentConfig {
                packet_size: 7,
                ..base.clone()
            },
            ExperimentConfig {
                samples_per_decade: 0,
                ..base.clone()
            },
            ExperimentConfig {
                initial_amplitude: 0.0,
                ..base.clone()
            },
            ExperimentConfig {
                h: h(1.5),
                ..base.clone()
            },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
        let spectral = ExperimentConfig {
            integrator: IntegratorKind::SpectralSplit,
            h: h(1.5),
            ..base
        };
        assert!(spectral.validate().is_ok());
    }

    #[test]
    fn short_run_has_only_initial_sample() {
        let params = ModelParams::alpha_fpu(64, 0.25).unwrap();
        let config = ExperimentConfig {
            t_end: 0.01,
            ..ExperimentConfig::new(params, IntegratorKind::Leapfrog)
        };
        let record = run_experiment(&config).unwrap();
        assert_eq!(record.samples.len(), 1);
        let first = record.samples[0];
        assert_eq!(first.t, 0.0);
        // Mode 1 is a standing wave, so its energy sits on the pair (1, 63),
        // which falls into two different packets.
        assert!((first.n_eff_inst - 2.0 / 63.0).abs() < 1e-12);
        assert!((first.n_eff_packet - 2.0 / 8.0).abs() < 1e-12);
        assert_eq!(record.max_energy_drift, 0.0);
    }

    #[test]
    fn runs_are_deterministic_and_sweeps_ordered() {
        let params = ModelParams::alpha_fpu(32, 0.25).unwrap();
        let config = ExperimentConfig {
            t_end: 50.0,
            ..ExperimentConfig::new(params, IntegratorKind::SpectralSplit)
        }
        .with_amplitude(2.0);
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);
        let records = sweep(&config, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(
            records[1].as_ref().unwrap(),
            &run_experiment(&config.with_amplitude(1.0)).unwrap()
        );
        assert_eq!(
            sweep(&config, &[2.0]).unwrap()[0].as_ref().unwrap(),
            &run_experiment(&config).unwrap()
        );
        assert!(sweep(&config, &[]).is_err());
    }

    #[test]
    fn blow_up_returns_partial_record() {
        let params = ModelParams::alpha_fpu(16, 0.25).unwrap();
        // Far outside the cubic well: the chain escapes to infinity.
        let config = ExperimentConfig {
            initial_amplitude: 400.0,
            t_end: 1e4,
            h: h(0.5),
            ..ExperimentConfig::new(params, IntegratorKind::SpectralSplit)
        };
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err.source, FpuError::BlowUp { .. }), "{err}");
        assert!(!err.record.samples.is_empty());
    }
}
