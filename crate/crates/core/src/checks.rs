//! Built-in invariant suite behind `fpu-lab check`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrators::{integrate, Integrator, SpectralSplit, StepSize};
use crate::lattice::{
    cubic_force, energy_parts, force, total_energy, ChainState, EnergyParts, ModelParams,
};
use crate::modes::ModeTransform;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity against its bound.
    pub detail: String,
}

impl CheckOutcome {
    fn bounded(name: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            name,
            passed: measured <= bound,
            detail: format!("{measured:.3e} <= {bound:.0e}"),
        }
    }
}

pub fn random_state(rng: &mut impl Rng, n: usize, scale: f64) -> ChainState {
    let mut draw = || scale * (2.0 * rng.random::<f64>() - 1.0);
    let q = (0..n).map(|_| draw()).collect();
    let p = (0..n).map(|_| draw()).collect();
    ChainState::new(q, p, 0.0).expect("finite draws")
}

fn direct_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| Complex64::from_polar(v, 2.0 * PI * ((j * k) % n) as f64 / n as f64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

fn max_abs_diff<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn round_trip(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for n in [8, 64, 512] {
        let mut transform = ModeTransform::new(n).expect("power of two");
        for _ in 0..5 {
            let state = random_state(rng, n, 1.0);
            let modes = transform.to_modes(&state).expect("size");
            let back = transform.from_modes(&modes).expect("hermitian");
            worst = worst
                .max(max_abs_diff(back.q.iter(), state.q.iter()))
                .max(max_abs_diff(back.p.iter(), state.p.iter()));
        }
    }
    CheckOutcome::bounded("transform round trip", worst, 1e-12)
}

fn fast_vs_direct(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for n in [8, 16, 64] {
        let mut transform = ModeTransform::new(n).expect("power of two");
        let state = random_state(rng, n, 1.0);
        let modes = transform.to_modes(&state).expect("size");
        for (fast, slow) in [
            (&modes.amplitudes, direct_dft(&state.q)),
            (&modes.momenta, direct_dft(&state.p)),
        ] {
            worst = fast
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).norm())
                .fold(worst, f64::max);
        }
    }
    CheckOutcome::bounded("fast transform vs direct DFT", worst, 1e-10)
}

fn parseval(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let n = 64;
    let params = ModelParams::alpha_fpu(n, 0.0).expect("valid");
    let mut transform = ModeTransform::new(n).expect("power of two");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let state = random_state(rng, n, 1.0);
        let harmonic = total_energy(&state, &params).expect("valid");
        let modal = transform.spectrum(&state).expect("size").total();
        worst = worst.max((modal - harmonic).abs() / harmonic);
    }
    CheckOutcome::bounded("Parseval", worst, 1e-10)
}

fn cubic_energy(state: &ChainState, params: &ModelParams) -> f64 {
    let EnergyParts { cubic, .. } = energy_parts(state, params).expect("valid");
    cubic
}

fn force_gradient(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for n in [3, 8, 32] {
        let params = ModelParams::real_space(n, 0.25, 0.0).expect("valid");
        for _ in 0..10 {
            let state = random_state(rng, n, 0.5);
            let full = force(&state, &params).expect("valid");
            let cubic = cubic_force(&state, &params).expect("valid");
            for (forces, potential) in [
                (
                    &full,
                    total_energy as fn(&ChainState, &ModelParams) -> crate::Result<f64>,
                ),
                (&cubic, |s: &ChainState, p: &ModelParams| {
                    Ok(cubic_energy(s, p))
                }),
            ] {
                let scale = forces
                    .iter()
                    .fold(0.0f64, |m, f| m.max(f.abs()))
                    .max(1e-300);
                for (k, &fk) in forces.iter().enumerate() {
                    let (mut plus, mut minus) = (state.clone(), state.clone());
                    plus.q[k] += step;
                    minus.q[k] -= step;
                    let grad = (potential(&plus, &params).expect("valid")
                        - potential(&minus, &params).expect("valid"))
                        / (2.0 * step);
                    worst = worst.max((fk + grad).abs() / scale);
                }
            }
        }
    }
    CheckOutcome::bounded("force vs energy gradient", worst, 1e-6)
}

fn run_to(state: &ChainState, params: &ModelParams, h: f64, t_end: f64) -> ChainState {
    let mut split = SpectralSplit::new(params.n_sites()).expect("power of two");
    let h = StepSize::new(h).expect("positive");
    integrate(state.clone(), params, &mut split, h, t_end, &[], |_| Ok(())).expect("no blow-up")
}

fn state_distance(a: &ChainState, b: &ChainState) -> f64 {
    max_abs_diff(a.q.iter(), b.q.iter()).max(max_abs_diff(a.p.iter(), b.p.iter()))
}

/// Ratio of global errors `e(h) / e(h/2)` at `t = 10`, against an `h/16` reference.
pub fn splitting_convergence_ratio(state: &ChainState, params: &ModelParams, h: f64) -> f64 {
    let t_end = 10.0;
    let reference = run_to(state, params, h / 16.0, t_end);
    let coarse = state_distance(&run_to(state, params, h, t_end), &reference);
    let fine = state_distance(&run_to(state, params, h / 2.0, t_end), &reference);
    coarse / fine
}

fn splitting_order(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let params = ModelParams::alpha_fpu(8, 0.25).expect("valid");
    let state = random_state(rng, 8, 0.3);
    let ratio = splitting_convergence_ratio(&state, &params, 0.1);
    CheckOutcome {
        name: "splitting order",
        passed: (3.4..=4.6).contains(&ratio),
        detail: format!("ratio {ratio:.3} in [3.4, 4.6]"),
    }
}

/// Random state with the centre of mass at rest, so the free zero mode does
/// not drift and inflate the coordinates over long runs.
pub fn random_state_at_rest(rng: &mut impl Rng, n: usize, scale: f64) -> ChainState {
    let mut state = random_state(rng, n, scale);
    let mean = state.p.iter().sum::<f64>() / n as f64;
    state.p.iter_mut().for_each(|p| *p -= mean);
    state
}

/// Largest change of any mode energy after `steps` exact harmonic steps at
/// `h = 1`. Nonzero modes are measured against themselves and the zero mode,
/// which holds almost nothing once the centre of mass is at rest, against the
/// total.
pub fn harmonic_flow_error(state: &ChainState, steps: usize) -> f64 {
    let n = state.n_sites();
    let params = ModelParams::alpha_fpu(n, 0.0).expect("valid");
    let mut transform = ModeTransform::new(n).expect("power of two");
    let before = transform.spectrum(state).expect("size");
    let mut split = SpectralSplit::new(n).expect("power of two");
    let mut evolved = state.clone();
    for _ in 0..steps {
        split.advance(&mut evolved, &params, 1.0);
    }
    let after = transform.spectrum(&evolved).expect("size");
    let total = before.total();
    before
        .energies
        .iter()
        .zip(&after.energies)
        .enumerate()
        .map(|(k, (a, b))| (a - b).abs() / if k == 0 { total } else { *a })
        .fold(0.0, f64::max)
}

fn harmonic_exactness(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let state = random_state_at_rest(rng, 64, 1.0);
    CheckOutcome::bounded(
        "exact harmonic flow",
        harmonic_flow_error(&state, 10_000),
        1e-12,
    )
}

/// Runs every check with a fixed seed.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    vec![
        round_trip(&mut rng),
        fast_vs_direct(&mut rng),
        parseval(&mut rng),
        force_gradient(&mut rng),
        harmonic_exactness(&mut rng),
        splitting_order(&mut rng),
    ]
}
