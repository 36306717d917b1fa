//! Text formats: `key=value` configuration and manifests, and the CSV files
//! written for series, mode spectra, estimates and sweep summaries.
//!
//! Every real is written with 17 significant digits, which round-trips any
//! `f64` exactly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::estimators::NeffSample;
use crate::experiment::{ExperimentConfig, RelaxationRecord, RelaxationSample};
use crate::integrators::StepSize;
use crate::lattice::ModelParams;
use crate::modes::EnergySpectrum;

pub const SERIES_HEADER: [&str; 5] = ["t", "n_eff_inst", "n_eff_packet", "e_total", "drift"];
pub const SUMMARY_HEADER: [&str; 4] = ["amplitude", "t_eq_inst", "t_eq_packet", "max_drift"];
pub const ESTIMATE_HEADER: [&str; 3] = ["t", "n_eff_inst", "n_eff_packet"];

/// Keys recognised in configuration files and as CLI flags.
pub const CONFIG_KEYS: [&str; 12] = [
    "n",
    "alpha",
    "beta",
    "mode",
    "amplitude",
    "integrator",
    "h",
    "t_end",
    "samples_per_decade",
    "packet_size",
    "out",
    "amplitudes",
];

/// Prefix of manifest-only keys; ignored when a manifest is read as a config.
pub const MANIFEST_PREFIX: &str = "manifest.";

/// A configuration problem, always naming the offending key.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn csv(path: &Path, source: csv::Error) -> Self {
        Self::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Lossless 17-significant-digit rendering.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_optional(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

/// Canonical spelling of a key: flags use dashes, files may use either.
pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::new(
                format!("line {}", number + 1),
                format!("expected key=value, got `{line}`"),
            )
        })?;
        entries.push((normalize_key(key), value.trim().to_string()));
    }
    Ok(entries)
}

/// Everything a config file or command line can set.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: ExperimentConfig,
    pub out: Option<PathBuf>,
    pub amplitudes: Option<Vec<f64>>,
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(key, format!("`{value}` is not a valid number")))
}

/// Builds settings from entries applied in order, so later entries (flags)
/// override earlier ones (file). Missing keys take their defaults; the step
/// defaults per integrator (0.02 leap-frog, 1 spectral).
pub fn build_settings(entries: &[(String, String)]) -> Result<Settings, ConfigError> {
    let defaults = ExperimentConfig::default();
    let base = defaults.params;
    let (mut n, mut alpha, mut beta) = (base.n_sites(), base.alpha(), base.beta());
    let mut integrator = defaults.integrator;
    let mut h: Option<f64> = None;
    let mut config = defaults;
    let mut out = None;
    let mut amplitudes = None;

    for (raw_key, value) in entries {
        let key = normalize_key(raw_key);
        let key = key.as_str();
        match key {
            "n" => n = parse_number(key, value)?,
            "alpha" => alpha = parse_number(key, value)?,
            "beta" => beta = parse_number(key, value)?,
            "mode" => config.initial_mode = parse_number(key, value)?,
            "amplitude" => config.initial_amplitude = parse_number(key, value)?,
            "integrator" => {
                integrator = value
                    .parse()
                    .map_err(|e: crate::FpuError| ConfigError::new(key, e.to_string()))?
            }
            "h" => h = Some(parse_number(key, value)?),
            "t_end" => config.t_end = parse_number(key, value)?,
            "samples_per_decade" => config.samples_per_decade = parse_number(key, value)?,
            "packet_size" => config.packet_size = parse_number(key, value)?,
            "out" => out = Some(PathBuf::from(value)),
            "amplitudes" => {
                let list = value
                    .split(',')
                    .map(|a| parse_number::<f64>(key, a.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                if list.is_empty() {
                    return Err(ConfigError::new(key, "empty amplitude list"));
                }
                amplitudes = Some(list);
            }
            _ if key.starts_with(MANIFEST_PREFIX) => {}
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
    }

    if !n.is_power_of_two() || n < 4 {
        return Err(ConfigError::new(
            "n",
            format!("{n} is not a power of two (>= 4)"),
        ));
    }
    config.params = ModelParams::new(n, alpha, beta).map_err(|e| {
        let key = if alpha.is_finite() && alpha >= 0.0 {
            "beta"
        } else {
            "alpha"
        };
        ConfigError::new(key, e.to_string())
    })?;
    config.integrator = integrator;
    config.h = match h {
        Some(h) => StepSize::new(h).map_err(|e| ConfigError::new("h", e.to_string()))?,
        None => integrator.default_step(),
    };
    let blame = |config: &ExperimentConfig| -> &'static str {
        if config
            .integrator
            .build(&config.params)
            .and_then(|i| i.check_step(config.h))
            .is_err()
        {
            "h"
        } else if !(config.t_end > 0.0 && config.t_end.is_finite()) {
            "t_end"
        } else if config.initial_mode == 0 || config.initial_mode > n / 2 {
            "mode"
        } else if !config.initial_amplitude.is_finite() || config.initial_amplitude == 0.0 {
            "amplitude"
        } else if config.samples_per_decade == 0 {
            "samples_per_decade"
        } else {
            "packet_size"
        }
    };
    config
        .validate()
        .map_err(|e| ConfigError::new(blame(&config), e.to_string()))?;
    Ok(Settings {
        experiment: config,
        out,
        amplitudes,
    })
}

pub fn parse_config(
    file_text: Option<&str>,
    flags: &[(String, String)],
) -> Result<Settings, ConfigError> {
    let mut entries = match file_text {
        Some(text) => parse_key_values(text)?,
        None => Vec::new(),
    };
    entries.extend(flags.iter().cloned());
    build_settings(&entries)
}

/// The experiment configuration as `key=value` pairs that parse back to it.
pub fn config_entries(config: &ExperimentConfig) -> Vec<(&'static str, String)> {
    vec![
        ("n", config.params.n_sites().to_string()),
        ("alpha", config.params.alpha().to_string()),
        ("beta", config.params.beta().to_string()),
        ("mode", config.initial_mode.to_string()),
        ("amplitude", config.initial_amplitude.to_string()),
        ("integrator", config.integrator.name().to_string()),
        ("h", config.h.get().to_string()),
        ("t_end", config.t_end.to_string()),
        ("samples_per_decade", config.samples_per_decade.to_string()),
        ("packet_size", config.packet_size.to_string()),
    ]
}

/// Run provenance written next to the data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut text = String::new();
        for (key, value) in config_entries(&self.config) {
            let _ = writeln!(text, "{key}={value}");
        }
        let _ = writeln!(text, "{MANIFEST_PREFIX}version={}", self.version);
        let _ = writeln!(text, "{MANIFEST_PREFIX}started_unix={}", self.started_unix);
        let _ = writeln!(
            text,
            "{MANIFEST_PREFIX}finished_unix={}",
            self.finished_unix
        );
        for (i, path) in self.outputs.iter().enumerate() {
            let _ = writeln!(text, "{MANIFEST_PREFIX}output.{i}={}", path.display());
        }
        text
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.render()).map_err(|e| IoError::io(path, e))
    }
}

fn csv_writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(inner)
}

/// Series CSV with a `#` footer carrying the detected times and maximum drift.
pub fn write_series<W: Write>(record: &RelaxationRecord, out: W) -> csv::Result<()> {
    let mut writer = csv_writer(out);
    writer.write_record(SERIES_HEADER)?;
    for (i, s) in record.samples.iter().enumerate() {
        writer.write_record([
            format_real(s.t),
            format_real(s.n_eff_inst),
            format_real(s.n_eff_packet),
            format_real(s.total_energy),
            format_real(record.drift(i)),
        ])?;
    }
    writer.flush()?;
    let mut out = writer
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    let footer = |x: Option<f64>| x.map(format_real).unwrap_or_else(|| "none".into());
    writeln!(out, "# t_eq_inst={}", footer(record.t_eq_instantaneous))?;
    writeln!(out, "# t_eq_packet={}", footer(record.t_eq_packet))?;
    writeln!(out, "# max_drift={}", format_real(record.max_energy_drift))?;
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| IoError::io(path, e))
}

pub fn write_series_file(record: &RelaxationRecord, path: &Path) -> Result<(), IoError> {
    write_series(record, create(path)?).map_err(|e| IoError::csv(path, e))
}

fn parse_real(path: &Path, field: &str) -> Result<f64, IoError> {
    field
        .trim()
        .parse()
        .map_err(|_| IoError::format(path, format!("`{field}` is not a number")))
}

fn parse_optional(path: &Path, field: &str) -> Result<Option<f64>, IoError> {
    match field.trim() {
        "" | "none" => Ok(None),
        other => parse_real(path, other).map(Some),
    }
}

fn read_rows<R: Read>(
    path: &Path,
    input: R,
    expected_header: &[&str],
) -> Result<Vec<Vec<f64>>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let header = reader.headers().map_err(|e| IoError::csv(path, e))?;
    if !expected_header.is_empty() && header.iter().ne(expected_header.iter().copied()) {
        return Err(IoError::format(
            path,
            format!("unexpected header {header:?}"),
        ));
    }
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IoError::csv(path, e))?;
        rows.push(
            row.iter()
                .map(|f| parse_real(path, f))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(rows)
}

/// Reads a series CSV back, including its footer.
pub fn read_series(path: &Path) -> Result<RelaxationRecord, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let rows = read_rows(path, text.as_bytes(), &SERIES_HEADER)?;
    let mut record = RelaxationRecord {
        samples: rows
            .iter()
            .map(|r| RelaxationSample {
                t: r[0],
                n_eff_inst: r[1],
                n_eff_packet: r[2],
                total_energy: r[3],
            })
            .collect(),
        ..RelaxationRecord::default()
    };
    for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
        if let Some((key, value)) = line.trim().split_once('=') {
            match key.trim() {
                "t_eq_inst" => record.t_eq_instantaneous = parse_optional(path, value)?,
                "t_eq_packet" => record.t_eq_packet = parse_optional(path, value)?,
                "max_drift" => record.max_energy_drift = parse_real(path, value)?,
                _ => {}
            }
        }
    }
    Ok(record)
}

/// Streams mode spectra to CSV, one row `t,e0,...,e{N-1}` per sample.
pub struct SpectrumWriter {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    n_modes: usize,
}

impl SpectrumWriter {
    pub fn create(path: &Path, n_modes: usize) -> Result<Self, IoError> {
        let mut writer = csv_writer(create(path)?);
        let header = std::iter::once("t".to_string()).chain((0..n_modes).map(|k| format!("e{k}")));
        writer
            .write_record(header)
            .map_err(|e| IoError::csv(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
            n_modes,
        })
    }

    pub fn write(&mut self, spectrum: &EnergySpectrum) -> Result<(), IoError> {
        if spectrum.len() != self.n_modes {
            return Err(IoError::format(
                &self.path,
                format!(
                    "spectrum has {} modes, file has {}",
                    spectrum.len(),
                    self.n_modes
                ),
            ));
        }
        let row = std::iter::once(format_real(spectrum.t))
            .chain(spectrum.energies.iter().map(|&e| format_real(e)));
        self.writer
            .write_record(row)
            .map_err(|e| IoError::csv(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), IoError> {
        self.writer.flush().map_err(|e| IoError::io(&self.path, e))
    }
}

pub fn read_spectra(path: &Path) -> Result<Vec<EnergySpectrum>, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let rows = read_rows(path, BufReader::new(file), &[])?;
    rows.into_iter()
        .map(|row| match row.split_first() {
            Some((&t, energies)) if !energies.is_empty() => {
                Ok(EnergySpectrum::new(energies.to_vec(), t))
            }
            _ => Err(IoError::format(path, "spectrum row without energies")),
        })
        .collect()
}

pub fn write_estimates(samples: &[(NeffSample, NeffSample)], path: &Path) -> Result<(), IoError> {
    let mut writer = csv_writer(create(path)?);
    let result: csv::Result<()> = (|| {
        writer.write_record(ESTIMATE_HEADER)?;
        for (inst, packet) in samples {
            writer.write_record([
                format_real(inst.t),
                format_real(inst.n_eff),
                format_real(packet.n_eff),
            ])?;
        }
        writer.flush()?;
        Ok(())
    })();
    result.map_err(|e| IoError::csv(path, e))
}

pub fn read_estimates(path: &Path) -> Result<Vec<(f64, f64, f64)>, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    Ok(read_rows(path, BufReader::new(file), &ESTIMATE_HEADER)?
        .into_iter()
        .map(|r| (r[0], r[1], r[2]))
        .collect())
}

/// One summary row per sweep entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub amplitude: f64,
    pub t_eq_inst: Option<f64>,
    pub t_eq_packet: Option<f64>,
    pub max_drift: f64,
}

impl SummaryRow {
    pub fn from_record(amplitude: f64, record: &RelaxationRecord) -> Self {
        Self {
            amplitude,
            t_eq_inst: record.t_eq_instantaneous,
            t_eq_packet: record.t_eq_packet,
            max_drift: record.max_energy_drift,
        }
    }
}

/// Summary CSV; absent equilibrium times are empty cells.
pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<(), IoError> {
    let mut writer = csv_writer(create(path)?);
    let result: csv::Result<()> = (|| {
        writer.write_record(SUMMARY_HEADER)?;
        for row in rows {
            writer.write_record([
                format_real(row.amplitude),
                format_optional(row.t_eq_inst),
                format_optional(row.t_eq_packet),
                format_real(row.max_drift),
            ])?;
        }
        writer.flush()?;
        Ok(())
    })();
    result.map_err(|e| IoError::csv(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::csv(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        rows.push(SummaryRow {
            amplitude: parse_real(path, field(0))?,
            t_eq_inst: parse_optional(path, field(1))?,
            t_eq_packet: parse_optional(path, field(2))?,
            max_drift: parse_real(path, field(3))?,
        });
    }
    Ok(rows)
}

/// File stem fragment for an amplitude, e.g. `A40` or `A2.5`.
pub fn amplitude_tag(amplitude: f64) -> String {
    format!("A{amplitude}")
}

pub fn series_file_name(amplitude: f64) -> String {
    format!("series_{}.csv", amplitude_tag(amplitude))
}

pub fn spectra_file_name(amplitude: f64) -> String {
    format!("spectra_{}.csv", amplitude_tag(amplitude))
}

pub fn manifest_file_name(amplitude: f64) -> String {
    format!("manifest_{}.txt", amplitude_tag(amplitude))
}

pub const SUMMARY_FILE_NAME: &str = "sweep_summary.csv";

/// Reads a whole text file, mapping failures to [`IoError`].
pub fn read_text(path: &Path) -> Result<String, IoError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| IoError::io(path, e))?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::IntegratorKind;

    fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults() {
        let settings = parse_config(None, &[]).unwrap();
        let c = &settings.experiment;
        assert_eq!(c.params, ModelParams::new(512, 0.25, 0.0).unwrap());
        assert_eq!(c.integrator, IntegratorKind::Leapfrog);
        assert_eq!(c.h.get(), 0.02);
        assert_eq!(
            (c.initial_mode, c.packet_size, c.samples_per_decade),
            (1, 8, 20)
        );
        assert!(settings.out.is_none() && settings.amplitudes.is_none());

        let spectral = parse_config(None, &flags(&[("integrator", "spectral")])).unwrap();
        assert_eq!(spectral.experiment.h.get(), 1.0);
    }

    #[test]
    fn flags_override_file() {
        let file = "# run file\nn = 64\namplitude=30\nt-end=100\n\nintegrator=spectral\n";
        let settings = parse_config(
            Some(file),
            &flags(&[("--amplitude", "40"), ("t-end", "1e4")]),
        )
        .unwrap();
        let c = &settings.experiment;
        assert_eq!(c.params.n_sites(), 64);
        assert_eq!(c.initial_amplitude, 40.0);
        assert_eq!(c.t_end, 1e4);
        assert_eq!(c.integrator, IntegratorKind::SpectralSplit);
    }

    #[test]
    fn errors_name_the_key() {
        let err = parse_config(None, &flags(&[("n", "500")])).unwrap_err();
        assert_eq!(err.key, "n");
        assert!(err.message.contains("power of two"));
        assert_eq!(
            parse_config(None, &flags(&[("alpha", "x")]))
                .unwrap_err()
                .key,
            "alpha"
        );
        assert_eq!(
            parse_config(None, &flags(&[("colour", "red")]))
                .unwrap_err()
                .key,
            "colour"
        );
        assert_eq!(
            parse_config(Some("just text"), &[]).unwrap_err().key,
            "line 1"
        );
        let unstable = flags(&[("h", "1.5"), ("integrator", "leapfrog")]);
        assert_eq!(parse_config(None, &unstable).unwrap_err().key, "h");
        assert_eq!(
            parse_config(None, &flags(&[("packet_size", "7")]))
                .unwrap_err()
                .key,
            "packet_size"
        );
        assert_eq!(
            parse_config(None, &flags(&[("integrator", "euler")]))
                .unwrap_err()
                .key,
            "integrator"
        );
    }

    #[test]
    fn amplitude_list() {
        let settings = parse_config(None, &flags(&[("amplitudes", "40, 30,10")])).unwrap();
        assert_eq!(settings.amplitudes, Some(vec![40.0, 30.0, 10.0]));
        assert_eq!(
            parse_config(None, &flags(&[("amplitudes", "40,,10")]))
                .unwrap_err()
                .key,
            "amplitudes"
        );
    }

    #[test]
    fn manifest_reproduces_config() {
        let config = parse_config(
            None,
            &flags(&[("amplitude", "0.1"), ("alpha", "0.3"), ("h", "0.013")]),
        )
        .unwrap()
        .experiment;
        let manifest = RunManifest {
            config: config.clone(),
            version: "0.1.0".into(),
            started_unix: 1.0,
            finished_unix: 2.5,
            outputs: vec![PathBuf::from("out/series_A0.1.csv")],
        };
        let text = manifest.render();
        assert!(text.contains("manifest.version=0.1.0"));
        assert_eq!(parse_config(Some(&text), &[]).unwrap().experiment, config);
    }

    #[test]
    fn real_formatting_is_lossless() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -2.5e-300,
            f64::MIN_POSITIVE,
            0.0,
        ] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn file_names_embed_amplitude() {
        assert_eq!(series_file_name(40.0), "series_A40.csv");
        assert_eq!(spectra_file_name(2.5), "spectra_A2.5.csv");
        assert_eq!(manifest_file_name(5.0), "manifest_A5.txt");
    }
}
