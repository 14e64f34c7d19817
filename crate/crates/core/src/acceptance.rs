//! The acceptance suite: every closed-form phase of the models checked by
//! an independent numerical route at a fixed tolerance.
//!
//! Expected values are written out here from the closed forms rather than
//! read from [`crate::models::AnalyticReference`], so a mistake in a model's
//! reference table cannot hide a mistake in the numerics.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::action::{sample_loop, to_frames, torus_connection_samples, torus_phase};
use crate::angle::{circular_distance, spectrum_distance};
use crate::error::Result;
use crate::evolution::{aa_phase, aa_phase_with_threshold, evolve, evolve_with, EvolveOptions};
use crate::holonomy::{
    berry_phase, connection_samples, eigenphases, gauge_transform, loop_grid, phase_matrix, phase_matrix_eigenvalues,
    random_smooth_gauge, sample_frames, wilson_loop, FramePath, FrameSource,
};
use crate::invariants::check_invariant;
use crate::linalg::{ComplexMatrix, C64};
use crate::models::{
    ring_action, ring_rotating, ring_static, spin_half, Branch, OperatorFamily, RingModelParams, SpinModelParams,
};
use crate::ring_state::{blockwise_evolve, RingState};

/// Loop points and propagation steps used by the suite.
pub const GRID: usize = 4096;
/// Angle points on the ring for action-operator eigenfunctions.
pub const ANGLE_POINTS: usize = 64;
/// Loop points for the gauge sweep.
pub const GAUGE_GRID: usize = 1024;
/// Gauges per model in the gauge sweep.
pub const GAUGES_PER_MODEL: u64 = 10;
/// Minimum error reduction per halving of the step.
pub const CONVERGENCE_RATIO: f64 = 3.5;
/// Deviations below this are roundoff; schemes that are exact for a
/// fixture sit here at every resolution and carry no order information.
/// Summing a few thousand steps of a dynamic phase of tens of radians
/// already costs ~1e-11.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;
/// Time step for the adiabatic runs, in units of `1/Ω`.
pub const ADIABATIC_TIME_STEP: f64 = 0.004;

/// Titles of the ten criteria, in order.
pub const TITLES: [&str; 10] = [
    "spin-1/2 invariant-operator phases",
    "Aharonov-Anandan decomposition of the spin evolution",
    "static ring phases by holonomy and by evolution",
    "non-Abelian phase matrix of the rotating ring",
    "action-operator phases of the ring",
    "invariance residuals of every model pair",
    "gauge invariance of the Wilson-loop spectrum",
    "direct sum over ring blocks",
    "second-order convergence",
    "adiabatic limit of the rotating ring",
];

/// Result of one criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{status}] criterion {:>2}: {}: {}",
            self.id, self.title, self.detail
        )
    }
}

/// Runs criterion `id` (1-based).
///
/// # Panics
/// If `id` is not in `1..=10`.
pub fn run_criterion(id: usize) -> CriterionOutcome {
    let checks = match id {
        1 => spin_phases(),
        2 => spin_decomposition(),
        3 => static_ring(),
        4 => rotating_ring(),
        5 => action_phases(),
        6 => invariance(),
        7 => gauge_sweep(),
        8 => direct_sum(),
        9 => convergence(),
        10 => adiabatic(),
        _ => panic!("no criterion {id}"),
    };
    let title = TITLES[id - 1];
    match checks {
        Ok(tally) => tally.finish(id, title),
        Err(e) => CriterionOutcome {
            id,
            title,
            passed: false,
            detail: format!("computation failed: {e}"),
        },
    }
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=TITLES.len()).map(run_criterion).collect()
}

/// Collects individual comparisons for one criterion.
#[derive(Default)]
struct Tally {
    count: usize,
    failures: Vec<String>,
    /// Largest `value / bound` seen among upper-bound checks.
    worst: Option<(String, f64, f64)>,
    notes: Vec<String>,
}

impl Tally {
    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        let label = label.into();
        self.count += 1;
        if !(value <= bound) {
            self.failures.push(format!("{label}: {value:.3e} > {bound:.1e}"));
        }
        let ratio = value / bound;
        if self
            .worst
            .as_ref()
            .map_or(true, |(_, v, b)| ratio > v / b || ratio.is_nan())
        {
            self.worst = Some((label, value, bound));
        }
    }

    fn at_least(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.count += 1;
        if !(value >= bound) {
            self.failures
                .push(format!("{}: {value:.3e} < {bound:.1e}", label.into()));
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn finish(self, id: usize, title: &'static str) -> CriterionOutcome {
        let mut detail = format!("{} checks", self.count);
        if let Some((label, value, bound)) = &self.worst {
            detail.push_str(&format!("; tightest {label} = {value:.3e} (bound {bound:.1e})"));
        }
        for n in &self.notes {
            detail.push_str("; ");
            detail.push_str(n);
        }
        if !self.failures.is_empty() {
            let shown: Vec<_> = self.failures.iter().take(6).cloned().collect();
            detail.push_str(&format!("; {} failed: {}", self.failures.len(), shown.join(", ")));
        }
        CriterionOutcome {
            id,
            title,
            passed: self.failures.is_empty() && self.count > 0,
            detail,
        }
    }
}

// ---------------------------------------------------------------------------
// closed forms

/// `π(1 ± cos2θ)` reduced to `[0, 2π)`.
fn invariant_phase(branch: Branch, theta: f64) -> f64 {
    crate::angle::wrap(PI * (1.0 + branch.sign() * (2.0 * theta).cos()))
}

/// `π(1 ∓ cos2Θ)` reduced to `[0, 2π)`.
fn action_phase(branch: Branch, mixing: f64) -> f64 {
    crate::angle::wrap(PI * (1.0 - branch.sign() * (2.0 * mixing).cos()))
}

/// `Θ = ½·atan2(ε cosχ, 1 − ε sinχ)`.
fn mixing_angle(epsilon: f64, chi: f64) -> f64 {
    0.5 * (epsilon * chi.cos()).atan2(1.0 - epsilon * chi.sin())
}

/// `2π·[[sin²Θ, sinΘcosΘ], [sinΘcosΘ, cos²Θ]]`.
fn rotating_gamma(mixing: f64) -> ComplexMatrix {
    let (s, c) = mixing.sin_cos();
    let e = |x: f64| C64::new(TAU * x, 0.0);
    ComplexMatrix::from_rows(&[&[e(s * s), e(s * c)], &[e(s * c), e(c * c)]])
}

fn ring_params(epsilon: f64, chi: f64, theta: f64, levels: Vec<i64>, omega_o: f64) -> RingModelParams {
    RingModelParams {
        epsilon,
        chi,
        omega: 1.0,
        n_levels: levels,
        theta_n: vec![theta],
        omega_o,
        offsets: None,
    }
}

const SPIN_THETAS: [(f64, &str); 4] = [(0.0, "0"), (PI / 6.0, "pi/6"), (PI / 4.0, "pi/4"), (PI / 3.0, "pi/3")];
const RING_THETAS: [(f64, &str); 2] = [(PI / 6.0, "pi/6"), (PI / 3.0, "pi/3")];
const FIELDS: [(f64, f64, &str); 2] = [(0.5, PI / 3.0, "(0.5, pi/3)"), (0.3, PI / 6.0, "(0.3, pi/6)")];

fn spin(theta: f64) -> Result<crate::models::SpinModel> {
    spin_half(SpinModelParams { omega_s: 1.0, theta })
}

fn spin_holonomy(theta: f64, branch: Branch, points: usize) -> Result<f64> {
    let model = spin(theta)?;
    let frames = model
        .reference
        .frame(&format!("phi{}", branch.suffix()))
        .expect("spin frames");
    let path = sample_frames(&FrameSource::ClosedForm(frames), &loop_grid(model.period(), points))?;
    berry_phase(&path)
}

fn spin_aa(theta: f64, branch: Branch, steps: usize) -> Result<crate::evolution::PhaseReport> {
    let model = spin(theta)?;
    aa_phase(&evolve(&model.hamiltonian, &model.initial_state(branch), steps)?)
}

fn static_holonomy(theta: f64, n: i64, branch: Branch, points: usize) -> Result<f64> {
    let block = ring_static(&ring_params(0.5, PI / 3.0, theta, vec![n], 0.0))?.remove(0);
    let frames = block
        .reference
        .frame(&format!("phi{}", branch.suffix()))
        .expect("ring frames");
    let path = sample_frames(&FrameSource::ClosedForm(frames), &loop_grid(block.period(), points))?;
    berry_phase(&path)
}

fn static_aa(theta: f64, n: i64, branch: Branch, steps: usize) -> Result<f64> {
    let block = ring_static(&ring_params(0.5, PI / 3.0, theta, vec![n], 0.0))?.remove(0);
    Ok(aa_phase(&evolve(&block.hamiltonian, &block.initial_state(branch), steps)?)?.geometric)
}

fn rotating_gammas(epsilon: f64, chi: f64, points: usize) -> Result<Vec<(i64, ComplexMatrix, ComplexMatrix)>> {
    ring_rotating(&ring_params(epsilon, chi, PI / 3.0, vec![0, 1, 2], 1.0))?
        .into_iter()
        .map(|block| {
            let path = sample_frames(
                &FrameSource::ClosedForm(block.frames.clone()),
                &loop_grid(block.period(), points),
            )?;
            let gamma = phase_matrix(&connection_samples(&path)?)?;
            Ok((block.n, gamma, wilson_loop(&path)?))
        })
        .collect()
}

fn action_family(
    epsilon: f64,
    chi: f64,
    n: i64,
    branch: Branch,
    points: usize,
) -> Result<Vec<crate::action::TorusState>> {
    let block = ring_action(&ring_params(epsilon, chi, PI / 3.0, vec![n], 0.0))?.remove(0);
    Ok(sample_loop(TAU, points, |vt| {
        block.eigenfunction(branch, vt, ANGLE_POINTS)
    }))
}

// ---------------------------------------------------------------------------
// criteria

fn spin_phases() -> Result<Tally> {
    let mut t = Tally::default();
    let mut slowest = Duration::ZERO;
    for (theta, name) in SPIN_THETAS {
        for b in Branch::BOTH {
            let start = Instant::now();
            let gamma = spin_holonomy(theta, b, GRID)?;
            let elapsed = start.elapsed();
            slowest = slowest.max(elapsed);
            t.at_most(
                format!("|gamma{b} - pi(1{b}cos2theta)| at theta={name}"),
                circular_distance(gamma, invariant_phase(b, theta)),
                1e-6,
            );
            t.at_most(format!("runtime at theta={name} (s)"), elapsed.as_secs_f64(), 1.0);
        }
    }
    t.note(format!("slowest case {:.1} ms", slowest.as_secs_f64() * 1e3));
    Ok(t)
}

fn spin_decomposition() -> Result<Tally> {
    let mut t = Tally::default();
    let theta = PI / 6.0;
    for b in Branch::BOTH {
        let r = spin_aa(theta, b, GRID)?;
        t.at_most(format!("total{b}"), circular_distance(r.total, PI), 1e-5);
        t.at_most(
            format!("dynamic{b}"),
            (r.dynamic + b.sign() * PI * (2.0 * theta).cos()).abs(),
            1e-5,
        );
        t.at_most(
            format!("geometric{b}"),
            circular_distance(r.geometric, invariant_phase(b, theta)),
            1e-5,
        );
    }
    Ok(t)
}

fn static_ring() -> Result<Tally> {
    let mut t = Tally::default();
    for (theta, name) in RING_THETAS {
        for n in 0..=2 {
            for b in Branch::BOTH {
                let expected = invariant_phase(b, theta);
                let holo = static_holonomy(theta, n, b, GRID)?;
                t.at_most(
                    format!("holonomy gamma_{n}{b} at theta={name}"),
                    circular_distance(holo, expected),
                    1e-6,
                );
                let aa = static_aa(theta, n, b, GRID)?;
                t.at_most(
                    format!("evolution gamma_{n}{b} at theta={name}"),
                    circular_distance(aa, expected),
                    1e-6,
                );
            }
        }
    }
    Ok(t)
}

fn rotating_ring() -> Result<Tally> {
    let mut t = Tally::default();
    for (epsilon, chi, name) in FIELDS {
        let expected = rotating_gamma(mixing_angle(epsilon, chi));
        let gammas = rotating_gammas(epsilon, chi, GRID)?;
        let first = gammas[0].1.clone();
        for (n, gamma, wilson) in &gammas {
            t.at_most(
                format!("max |Gamma_{n} - closed form| at {name}"),
                gamma.max_abs_diff(&expected),
                1e-6,
            );
            t.at_most(
                format!("|Gamma_{n} - Gamma_0| at {name}"),
                gamma.max_abs_diff(&first),
                1e-12,
            );
            t.at_most(
                format!("|W_{n} - 1| at {name}"),
                wilson.max_abs_diff(&ComplexMatrix::identity(2)),
                1e-6,
            );
            let ev = phase_matrix_eigenvalues(gamma)?;
            t.at_most(
                format!("eigenvalues of Gamma_{n} vs (0, 2pi) at {name}"),
                ev[0].abs().max((ev[1] - TAU).abs()),
                1e-6,
            );
        }
    }
    Ok(t)
}

fn action_phases() -> Result<Tally> {
    let mut t = Tally::default();
    let d_theta = TAU / GRID as f64;
    for (epsilon, chi, name) in FIELDS {
        let mixing = mixing_angle(epsilon, chi);
        for b in Branch::BOTH {
            let mut by_level = Vec::new();
            for n in 0..=2 {
                let family = action_family(epsilon, chi, n, b, GRID)?;
                let gamma = torus_phase(&family)?;
                by_level.push(gamma);
                t.at_most(
                    format!("gamma_{n}{b} vs pi(1-{}cos2Theta) at {name}", b.suffix()),
                    circular_distance(gamma, action_phase(b, mixing)),
                    1e-6,
                );
                // ⟨ξ'|∂ξ'⟩ = −i(1 ∓ cos2Θ)/2 for the upper/lower eigenfunction
                let slope = -(1.0 - b.sign() * (2.0 * mixing).cos()) / 2.0;
                let worst = torus_connection_samples(&family)?
                    .iter()
                    .map(|w| (w - C64::new(0.0, slope * d_theta)).norm())
                    .fold(0.0, f64::max);
                t.at_most(format!("connection samples of xi'_{n}{b} at {name}"), worst, 1e-8);
            }
            let spread = by_level
                .iter()
                .map(|g| circular_distance(*g, by_level[0]))
                .fold(0.0, f64::max);
            t.at_most(format!("spread of gamma{b} over n at {name}"), spread, 1e-10);
        }
    }
    t.note("connection compared with -i(1-+cos2Theta)dtheta/2, the slope that integrates to the stated phases");
    Ok(t)
}

fn invariance() -> Result<Tally> {
    let mut t = Tally::default();
    let mut pairs: Vec<(String, OperatorFamily, OperatorFamily)> = Vec::new();
    for (theta, name) in SPIN_THETAS {
        let m = spin(theta)?;
        pairs.push((format!("spin theta={name}"), m.invariant, m.hamiltonian));
    }
    for (theta, name) in RING_THETAS {
        for block in ring_static(&ring_params(0.5, PI / 3.0, theta, vec![0, 1, 2], 0.0))? {
            pairs.push((
                format!("static ring n={} theta={name}", block.n),
                block.invariant,
                block.hamiltonian,
            ));
        }
    }
    for (epsilon, chi, name) in FIELDS {
        for block in ring_rotating(&ring_params(epsilon, chi, PI / 3.0, vec![0, 1, 2], 1.0))? {
            pairs.push((
                format!("rotating ring n={} {name}", block.n),
                block.invariant,
                block.hamiltonian,
            ));
        }
    }
    for (label, i, h) in &pairs {
        let r = check_invariant(i, h, 100)?;
        t.at_most(format!("residual of {label}"), r.max_residual, 1e-8);
        t.at_most(format!("eigenvalue drift of {label}"), r.eigenvalue_drift, 1e-10);
        t.at_most(format!("transport error of {label}"), r.transport_error, 1e-5);
    }
    t.note(format!("{} operator pairs", pairs.len()));
    Ok(t)
}

fn gauge_paths() -> Result<Vec<(&'static str, FramePath)>> {
    let mut out = Vec::new();

    let m = spin(PI / 6.0)?;
    let grid = loop_grid(m.period(), GAUGE_GRID);
    let src = FrameSource::ClosedForm(m.reference.frame("phi+").expect("spin frames"));
    out.push(("spin", sample_frames(&src, &grid)?));

    let block = ring_static(&ring_params(0.5, PI / 3.0, PI / 3.0, vec![1], 0.0))?.remove(0);
    let grid = loop_grid(block.period(), GAUGE_GRID);
    let src = FrameSource::ClosedForm(block.reference.frame("phi-").expect("ring frames"));
    out.push(("static ring", sample_frames(&src, &grid)?));

    let block = ring_rotating(&ring_params(0.5, PI / 3.0, PI / 3.0, vec![0], 1.0))?.remove(0);
    let grid = loop_grid(block.period(), GAUGE_GRID);
    out.push((
        "rotating ring",
        sample_frames(&FrameSource::ClosedForm(block.frames.clone()), &grid)?,
    ));

    let family = action_family(0.5, PI / 3.0, 0, Branch::Plus, GAUGE_GRID)?;
    let grid = loop_grid(TAU, GAUGE_GRID);
    out.push(("ring action", FramePath::new(grid, to_frames(&family)?)?));
    Ok(out)
}

fn gauge_sweep() -> Result<Tally> {
    let mut t = Tally::default();
    for (index, (name, path)) in gauge_paths()?.into_iter().enumerate() {
        let spectrum = eigenphases(&wilson_loop(&path)?)?;
        let omega = connection_samples(&path)?;
        for k in 0..GAUGES_PER_MODEL {
            let seed = 1000 * index as u64 + k;
            let g = random_smooth_gauge(path.grid(), path.rank(), seed)?;
            let moved = gauge_transform(&path, &g)?;
            let moved_spectrum = eigenphases(&wilson_loop(&moved)?)?;
            t.at_most(
                format!("Wilson spectrum shift, {name}, seed {seed}"),
                spectrum_distance(&spectrum, &moved_spectrum),
                1e-8,
            );
            let change = connection_samples(&moved)?
                .iter()
                .zip(&omega)
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max);
            t.at_least(format!("largest connection change, {name}, seed {seed}"), change, 1e-3);
        }
    }
    Ok(t)
}

fn direct_sum() -> Result<Tally> {
    let mut t = Tally::default();
    let params = ring_params(0.5, PI / 3.0, PI / 3.0, vec![0, 1], 0.0);
    let blocks = ring_static(&params)?;
    let branches = [Branch::Plus, Branch::Minus];
    let mut hamiltonians = BTreeMap::new();
    let mut state = RingState::new();
    for (block, b) in blocks.iter().zip(branches) {
        hamiltonians.insert(block.n, block.spinor_hamiltonian()?);
        state = state.with_block(block.n, &block.spinor_state(b), C64::new(FRAC_1_SQRT_2, 0.0));
    }
    let run = blockwise_evolve(&hamiltonians, &state, GRID)?;
    t.at_most("block weight drift", run.max_weight_drift(), 1e-10);
    let total_norm = (0..run.times().len())
        .map(|k| (run.state(k).norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    t.at_most("total norm drift", total_norm, 1e-10);

    let duration = blocks.iter().map(|b| b.period()).fold(0.0, f64::max);
    for (block, b) in blocks.iter().zip(branches) {
        let n = block.n;
        let within = aa_phase_with_threshold(&run.blocks[&n], 1e-4)?.geometric;
        let single = evolve_with(
            &hamiltonians[&n],
            &block.spinor_state(b),
            GRID,
            EvolveOptions {
                duration: Some(duration),
                stride: GRID,
            },
        )?;
        let alone = aa_phase(&single)?.geometric;
        t.at_most(
            format!("block {n}{b} vs single-block run"),
            circular_distance(within, alone),
            1e-6,
        );
        // the common period spans 2n + 1 periods of block n
        let cycles = (2 * n + 1) as f64;
        t.at_most(
            format!("block {n}{b} vs {cycles} x gamma_{n}{b}"),
            circular_distance(within, cycles * invariant_phase(b, PI / 3.0)),
            1e-6,
        );
    }
    Ok(t)
}

/// Checks that each halving of the step cuts the deviation by at least
/// [`CONVERGENCE_RATIO`], unless the finer deviation is already roundoff.
fn order_check(t: &mut Tally, label: &str, deviations: &[f64]) {
    for (k, pair) in deviations.windows(2).enumerate() {
        let (coarse, fine) = (pair[0], pair[1]);
        if fine <= ROUNDOFF_FLOOR {
            t.at_most(
                format!("{label}, halving {} (at roundoff)", k + 1),
                fine,
                ROUNDOFF_FLOOR,
            );
        } else {
            t.at_least(
                format!("{label}, halving {} ratio", k + 1),
                coarse / fine,
                CONVERGENCE_RATIO,
            );
        }
    }
}

const HALVINGS: [usize; 4] = [512, 1024, 2048, 4096];

fn sweep(f: impl Fn(usize) -> Result<f64>) -> Result<Vec<f64>> {
    HALVINGS.iter().map(|&m| f(m)).collect()
}

fn convergence() -> Result<Tally> {
    let mut t = Tally::default();
    let mut exact = 0;
    let mut track = |t: &mut Tally, label: String, devs: Vec<f64>| {
        if devs.iter().all(|&d| d <= ROUNDOFF_FLOOR) {
            exact += 1;
        }
        order_check(t, &label, &devs);
    };

    for (theta, name) in SPIN_THETAS {
        for b in Branch::BOTH {
            let devs = sweep(|m| {
                Ok(circular_distance(
                    spin_holonomy(theta, b, m)?,
                    invariant_phase(b, theta),
                ))
            })?;
            track(&mut t, format!("spin holonomy gamma{b} theta={name}"), devs);
        }
    }
    for b in Branch::BOTH {
        let theta = PI / 6.0;
        let devs = sweep(|m| {
            let r = spin_aa(theta, b, m)?;
            Ok(circular_distance(r.total, PI)
                .max((r.dynamic + b.sign() * PI * (2.0 * theta).cos()).abs())
                .max(circular_distance(r.geometric, invariant_phase(b, theta))))
        })?;
        track(&mut t, format!("spin evolution {b}"), devs);
    }
    for (theta, name) in RING_THETAS {
        for n in 0..=2 {
            for b in Branch::BOTH {
                let expected = invariant_phase(b, theta);
                let devs = sweep(|m| Ok(circular_distance(static_holonomy(theta, n, b, m)?, expected)))?;
                track(&mut t, format!("static ring holonomy gamma_{n}{b} theta={name}"), devs);
                let devs = sweep(|m| Ok(circular_distance(static_aa(theta, n, b, m)?, expected)))?;
                track(&mut t, format!("static ring evolution gamma_{n}{b} theta={name}"), devs);
            }
        }
    }
    for (epsilon, chi, name) in FIELDS {
        let expected = rotating_gamma(mixing_angle(epsilon, chi));
        let devs = sweep(|m| {
            Ok(rotating_gammas(epsilon, chi, m)?
                .iter()
                .map(|(_, g, _)| g.max_abs_diff(&expected))
                .fold(0.0, f64::max))
        })?;
        track(&mut t, format!("rotating ring Gamma {name}"), devs);
    }
    for (epsilon, chi, name) in FIELDS {
        let mixing = mixing_angle(epsilon, chi);
        for b in Branch::BOTH {
            let devs = sweep(|m| {
                let gamma = torus_phase(&action_family(epsilon, chi, 0, b, m)?)?;
                Ok(circular_distance(gamma, action_phase(b, mixing)))
            })?;
            track(&mut t, format!("action gamma{b} {name}"), devs);
        }
    }
    t.note(format!("{exact} sequences exact to roundoff at every resolution"));
    Ok(t)
}

/// Geometric phase of the adiabatically tracked eigenstate `ξ'_{0±}` of the
/// rotating ring, from the exact evolution over one revolution of the field.
pub fn adiabatic_phase(ratio: f64, branch: Branch) -> Result<f64> {
    let base = ring_params(0.5, PI / 3.0, PI / 3.0, vec![0], 0.0);
    let omega_o = ratio * base.omega_ns(0);
    let block = ring_rotating(&RingModelParams { omega_o, ..base })?.remove(0);
    let period = block.period();
    let steps = (period / ADIABATIC_TIME_STEP).ceil() as usize;
    let traj = evolve_with(
        &block.hamiltonian,
        &block.adiabatic_state(branch, 0.0),
        steps,
        EvolveOptions {
            duration: None,
            stride: steps,
        },
    )?;
    Ok(aa_phase_with_threshold(&traj, 1e-3)?.geometric)
}

fn adiabatic() -> Result<Tally> {
    let mut t = Tally::default();
    let mixing = mixing_angle(0.5, PI / 3.0);
    let ratios = [1e-2, 1e-3];
    for b in Branch::BOTH {
        let expected = action_phase(b, mixing);
        let errors = ratios
            .iter()
            .map(|&r| Ok(circular_distance(adiabatic_phase(r, b)?, expected)))
            .collect::<Result<Vec<_>>>()?;
        // at least linear: err(r₂) ≤ err(r₁)·(r₂/r₁)
        let bound = errors[0] * ratios[1] / ratios[0];
        t.at_most(format!("error{b} at ratio 1e-3 vs linear bound"), errors[1], bound);
        t.note(format!(
            "errors{b}: {:.3e} at 1e-2, {:.3e} at 1e-3",
            errors[0], errors[1]
        ));
    }
    Ok(t)
}
