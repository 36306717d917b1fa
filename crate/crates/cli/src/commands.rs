use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fpu_core::checks;
use fpu_core::experiment::{run_experiment_with, sample_estimators};
use fpu_core::io::{
    manifest_file_name, parse_config, read_spectra, read_text, series_file_name, spectra_file_name,
    write_estimates, write_series_file, write_summary, ConfigError, IoError, RunManifest, Settings,
    SpectrumWriter, SummaryRow, SUMMARY_FILE_NAME,
};
use fpu_core::{ExperimentConfig, ExperimentError, FpuError, RelaxationRecord};

use crate::{ConfigArgs, EstimateArgs, RunArgs, SweepArgs};

const OUT_ENV: &str = "FPU_LAB_OUT";
const DEFAULT_AMPLITUDES: [f64; 5] = [10.0, 20.0, 30.0, 35.0, 40.0];

/// Error classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    BlowUp(String),
    Numerical(String),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Check(_) => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
            Self::BlowUp(_) => 4,
            Self::Numerical(_) => 5,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<FpuError> for Failure {
    fn from(e: FpuError) -> Self {
        match e {
            FpuError::BlowUp { .. } => Self::BlowUp(e.to_string()),
            FpuError::InvalidParams(_)
            | FpuError::InvalidConfig(_)
            | FpuError::InvalidStep(_)
            | FpuError::UnknownIntegrator(_)
            | FpuError::ModeOutOfRange { .. }
            | FpuError::IncompatiblePacketSize { .. } => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let message = e.to_string();
        match Failure::from(e.source) {
            Self::BlowUp(_) => Self::BlowUp(message),
            Self::Usage(_) => Self::Usage(message),
            _ => Self::Numerical(message),
        }
    }
}

fn load_settings(args: &ConfigArgs, extra: &[(String, String)]) -> Result<Settings, Failure> {
    let text = match &args.config {
        Some(path) => Some(read_text(path)?),
        None => None,
    };
    let mut flags = args.flags();
    flags.extend_from_slice(extra);
    Ok(parse_config(text.as_deref(), &flags)?)
}

fn output_dir(flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

fn show(t: Option<f64>) -> String {
    t.map_or_else(|| "not reached".into(), |t| format!("{t:.4e}"))
}

fn summary_line(amplitude: f64, record: &RelaxationRecord) -> String {
    format!(
        "A={amplitude}: T_eq inst {}, packet {}, max drift {:.3e}",
        show(record.t_eq_instantaneous),
        show(record.t_eq_packet),
        record.max_energy_drift
    )
}

fn write_manifest(
    dir: &Path,
    config: &ExperimentConfig,
    started: f64,
    outputs: Vec<PathBuf>,
) -> Result<PathBuf, Failure> {
    let manifest = RunManifest {
        config: config.clone(),
        version: fpu_core::VERSION.to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs,
    };
    let path = dir.join(manifest_file_name(config.initial_amplitude));
    manifest.write(&path)?;
    Ok(path)
}

pub fn run(args: RunArgs) -> Result<(), Failure> {
    let settings = load_settings(&args.config, &[])?;
    let dir = output_dir(settings.out)?;
    let config = settings.experiment;
    let amplitude = config.initial_amplitude;
    let started = unix_now();

    let series_path = dir.join(series_file_name(amplitude));
    let spectra_path = dir.join(spectra_file_name(amplitude));
    let mut spectra = SpectrumWriter::create(&spectra_path, config.params.n_sites())?;
    let mut write_error = None;
    let mut next_report = 1.0;
    eprintln!(
        "running N={} alpha={} {} h={} A={amplitude} to t={}",
        config.params.n_sites(),
        config.params.alpha(),
        config.integrator,
        config.h,
        config.t_end
    );
    let outcome = run_experiment_with(&config, |sample, spectrum| {
        if sample.t >= next_report {
            eprintln!(
                "  t={:.3e} n_eff inst {:.4} packet {:.4}",
                sample.t, sample.n_eff_inst, sample.n_eff_packet
            );
            next_report = sample.t * 10.0;
        }
        if let Err(e) = spectra.write(spectrum) {
            write_error.get_or_insert(e);
        }
        Ok(())
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }
    spectra.finish()?;
    let (record, failure) = match outcome {
        Ok(record) => (record, None),
        Err(e) => (e.record.clone(), Some(Failure::from(e))),
    };
    write_series_file(&record, &series_path)?;
    let manifest = write_manifest(
        &dir,
        &config,
        started,
        vec![series_path.clone(), spectra_path.clone()],
    )?;
    eprintln!(
        "wrote {}, {}, {}",
        series_path.display(),
        spectra_path.display(),
        manifest.display()
    );
    match failure {
        Some(f) => Err(f),
        None => {
            eprintln!("{}", summary_line(amplitude, &record));
            Ok(())
        }
    }
}

pub fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let extra: Vec<(String, String)> = args
        .amplitudes
        .iter()
        .map(|a| ("amplitudes".to_string(), a.clone()))
        .collect();
    let settings = load_settings(&args.config, &extra)?;
    let dir = output_dir(settings.out)?;
    let amplitudes = settings
        .amplitudes
        .unwrap_or_else(|| DEFAULT_AMPLITUDES.to_vec());
    let config = settings.experiment;
    for &a in &amplitudes {
        config
            .with_amplitude(a)
            .validate()
            .map_err(|e| Failure::Usage(format!("amplitudes: {e}")))?;
    }
    eprintln!(
        "sweeping {} amplitudes to t={} with {}",
        amplitudes.len(),
        config.t_end,
        config.integrator
    );
    let started = unix_now();
    let outcomes = fpu_core::sweep(&config, &amplitudes)?;

    let mut rows = Vec::new();
    let mut first_failure = None;
    for (&amplitude, outcome) in amplitudes.iter().zip(outcomes) {
        let record = match outcome {
            Ok(record) => record,
            Err(e) => {
                eprintln!("A={amplitude}: {e}");
                let record = e.record.clone();
                first_failure.get_or_insert(Failure::from(e));
                record
            }
        };
        let series_path = dir.join(series_file_name(amplitude));
        write_series_file(&record, &series_path)?;
        write_manifest(
            &dir,
            &config.with_amplitude(amplitude),
            started,
            vec![series_path],
        )?;
        eprintln!("{}", summary_line(amplitude, &record));
        rows.push(SummaryRow::from_record(amplitude, &record));
    }
    let summary = dir.join(SUMMARY_FILE_NAME);
    write_summary(&rows, &summary)?;
    eprintln!("wrote {}", summary.display());
    first_failure.map_or(Ok(()), Err)
}

pub fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let dir = output_dir(args.out)?;
    let spectra = read_spectra(&args.input)?;
    if spectra.is_empty() {
        return Err(Failure::Io(format!(
            "{}: no spectra rows",
            args.input.display()
        )));
    }
    let estimates = spectra
        .iter()
        .map(|s| sample_estimators(s, args.packet_size))
        .collect::<Result<Vec<_>, _>>()?;
    let stem = args
        .input
        .file_stem()
        .map_or_else(|| "spectra".into(), |s| s.to_string_lossy().into_owned());
    let path = dir.join(format!("estimates_{stem}.csv"));
    write_estimates(&estimates, &path)?;
    let (inst, packet) = estimates.last().expect("non-empty");
    eprintln!(
        "{} spectra, final t={:.4e}: n_eff inst {:.4}, packet {:.4}; wrote {}",
        estimates.len(),
        inst.t,
        inst.n_eff,
        packet.n_eff,
        path.display()
    );
    Ok(())
}

pub fn check() -> Result<(), Failure> {
    let outcomes = checks::run_all();
    for outcome in &outcomes {
        println!(
            "{} {}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.name,
            outcome.detail
        );
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
