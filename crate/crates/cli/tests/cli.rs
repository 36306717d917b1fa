use std::path::Path;
use std::process::{Command, Output};

fn fpu_lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpu-lab"))
        .args(args)
        .env("FPU_LAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let output = fpu_lab(&["check"], dir.path());
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let report = String::from_utf8(output.stdout).unwrap();
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn usage_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (args, key) in [
        (vec!["run", "--n", "500"], "n:"),
        (vec!["run", "--integrator", "leapfrog", "--h", "1.5"], "h:"),
        (vec!["run", "--amplitude", "forty"], "amplitude:"),
        (vec!["sweep", "--amplitudes", "10,x"], "amplitudes:"),
    ] {
        let output = fpu_lab(&args, dir.path());
        assert_eq!(output.status.code(), Some(2), "{args:?}");
        let message = stderr(&output);
        assert!(message.contains(key), "{args:?}: {message}");
        assert_eq!(message.lines().count(), 1, "{message}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = fpu_lab(&["estimate", "--input", "/no/such/spectra.csv"], dir.path());
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("/no/such/spectra.csv"));
}

#[test]
fn blow_up_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--n",
        "16",
        "--amplitude",
        "400",
        "--integrator",
        "spectral",
        "--h",
        "0.5",
        "--t-end",
        "1e4",
    ];
    let output = fpu_lab(&args, dir.path());
    assert_eq!(output.status.code(), Some(4), "{}", stderr(&output));
    // the partial series is still written
    assert!(dir.path().join("series_A400.csv").exists());
}

#[test]
fn run_then_estimate_reproduces_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let output = fpu_lab(
        &[
            "run",
            "--n",
            "32",
            "--amplitude",
            "3",
            "--integrator",
            "spectral",
            "--t-end",
            "300",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(output.stdout.is_empty());
    assert!(stderr(&output).contains("T_eq"));
    for name in ["series_A3.csv", "spectra_A3.csv", "manifest_A3.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }

    let spectra = dir.path().join("spectra_A3.csv");
    let output = fpu_lab(
        &["estimate", "--input", spectra.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let series = rows(&dir.path().join("series_A3.csv"));
    let estimates = rows(&dir.path().join("estimates_spectra_A3.csv"));
    assert_eq!(series.len(), estimates.len());
    for (s, e) in series.iter().zip(&estimates) {
        assert_eq!(&s[..3], &e[..]);
    }
}

#[test]
fn manifest_replays_bit_exactly() {
    let first = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--n",
        "16",
        "--amplitude",
        "2.5",
        "--t-end",
        "50",
        "--samples-per-decade",
        "7",
    ];
    assert_eq!(fpu_lab(&args, first.path()).status.code(), Some(0));
    let manifest = first.path().join("manifest_A2.5.txt");

    let second = tempfile::tempdir().unwrap();
    let output = fpu_lab(
        &["run", "--config", manifest.to_str().unwrap()],
        second.path(),
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let read = |dir: &Path| std::fs::read(dir.join("series_A2.5.csv")).unwrap();
    assert_eq!(read(first.path()), read(second.path()));
}

#[test]
fn sweep_writes_one_series_per_amplitude_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let output = fpu_lab(
        &[
            "sweep",
            "--n",
            "16",
            "--t-end",
            "100",
            "--integrator",
            "spectral",
            "--amplitudes",
            "1,2.5",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(dir.path().join("series_A1.csv").exists());
    assert!(dir.path().join("series_A2.5.csv").exists());
    let summary = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "amplitude,t_eq_inst,t_eq_packet,max_drift");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("2.5"));
}

#[test]
fn out_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--n",
        "8",
        "--amplitude",
        "1",
        "--t-end",
        "5",
        "--out",
        flag_dir.path().to_str().unwrap(),
    ];
    assert_eq!(fpu_lab(&args, env_dir.path()).status.code(), Some(0));
    assert!(flag_dir.path().join("series_A1.csv").exists());
    assert!(!env_dir.path().join("series_A1.csv").exists());
}
