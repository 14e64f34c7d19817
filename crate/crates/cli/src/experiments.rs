//! The experiment catalog: each builds the models named in the config,
//! computes phases numerically and records them next to their closed forms.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use geophase::acceptance::{CONVERGENCE_RATIO, ROUNDOFF_FLOOR};
use geophase::action::{sample_loop, to_frames, torus_phase, TorusState};
use geophase::angle::{circular_distance, spectrum_distance};
use geophase::evolution::{aa_phase_with_threshold, evolve, evolve_with, EvolveOptions};
use geophase::holonomy::{
    berry_phase, connection_samples, eigenphases, gauge_transform, holonomy, loop_grid, random_smooth_gauge,
    sample_frames, wilson_loop, FramePath, FrameSource,
};
use geophase::invariants::{invariance_residual, sample_times};
use geophase::linalg::{eigh, ComplexMatrix, C64};
use geophase::models::{ring_action, ring_rotating, ring_static, spin_half, Branch, RingModelParams};
use geophase::ring_state::{blockwise_evolve, RingState};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::Report;

pub fn run(config: &ExperimentConfig) -> geophase::Result<Report> {
    let mut report = Report::new(config);
    match config.experiment {
        Experiment::Spin => spin(config, &mut report)?,
        Experiment::RingStatic => ring_static_phases(config, &mut report)?,
        Experiment::RingRotating => ring_rotating_matrix(config, &mut report)?,
        Experiment::RingAction => ring_action_phases(config, &mut report)?,
        Experiment::DirectSum => direct_sum(config, &mut report)?,
        Experiment::GaugeSweep => gauge_sweep(config, &mut report)?,
        Experiment::Convergence => convergence(config, &mut report)?,
    }
    Ok(report)
}

const INVARIANT_PHASE: &str = "pi(1 ± cos 2theta)";

/// `π(1 ± cos2θ)` in `[0, 2π)`.
fn invariant_phase(b: Branch, theta: f64) -> f64 {
    geophase::angle::wrap(PI * (1.0 + b.sign() * (2.0 * theta).cos()))
}

/// `π(1 ∓ cos2Θ)` in `[0, 2π)`.
fn action_phase(b: Branch, mixing: f64) -> f64 {
    geophase::angle::wrap(PI * (1.0 - b.sign() * (2.0 * mixing).cos()))
}

fn closed_form_path(frames: geophase::models::FrameSampler, period: f64, points: usize) -> geophase::Result<FramePath> {
    sample_frames(&FrameSource::ClosedForm(frames), &loop_grid(period, points))
}

fn spin(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    let model = spin_half(c.spin)?;
    let theta = c.spin.theta;
    let times = sample_times(model.period(), 100);
    r.result(
        "invariance residual",
        invariance_residual(&model.invariant, &model.hamiltonian, &times)?,
        "max ||dI/dt - i[I, H]||",
    );
    for b in Branch::BOTH {
        let frames = model.reference.frame(&format!("phi{b}")).expect("spin frames");
        let h = holonomy(&closed_form_path(frames, model.period(), c.loop_points)?)?;
        let gamma = h.abelian_phase.expect("rank-one path");
        r.result(format!("gamma{b} holonomy"), gamma, "i sum log <phi(t_k)|phi(t_k+1)>");
        r.result(
            format!("gamma{b} holonomy convergence"),
            h.convergence_estimate.unwrap_or(0.0),
            "|gamma_M - gamma_M/2|/3",
        );

        let traj = evolve(&model.hamiltonian, &model.initial_state(b), c.steps)?;
        let aa = aa_phase_with_threshold(&traj, c.cyclicity_threshold)?;
        r.result(format!("total{b}"), aa.total, "arg <psi(0)|psi(T)>");
        r.result(format!("dynamic{b}"), aa.dynamic, "-int <psi|H|psi> dt");
        r.result(format!("gamma{b} evolution"), aa.geometric, "total - dynamic");
        r.result(
            format!("cyclicity defect{b}"),
            aa.cyclicity_defect,
            "1 - |<psi(0)|psi(T)>|",
        );
        r.result(
            format!("gamma{b} evolution convergence"),
            aa.convergence_estimate,
            "|gamma_M - gamma_M/2|/3",
        );

        let expected = invariant_phase(b, theta);
        let dynamic = -b.sign() * PI * (2.0 * theta).cos();
        r.reference(format!("gamma{b}"), expected, INVARIANT_PHASE);
        r.reference(format!("dynamic{b}"), dynamic, "∓pi cos 2theta");
        r.reference(format!("total{b}"), PI, "pi");

        r.check(
            format!("gamma{b} holonomy"),
            circular_distance(gamma, expected),
            c.phase_tolerance,
        );
        r.check(
            format!("gamma{b} evolution"),
            circular_distance(aa.geometric, expected),
            c.phase_tolerance,
        );
        r.check(format!("dynamic{b}"), (aa.dynamic - dynamic).abs(), c.phase_tolerance);
        r.check(format!("total{b}"), circular_distance(aa.total, PI), c.phase_tolerance);
        r.check(
            format!("cyclicity defect{b}"),
            aa.cyclicity_defect,
            c.cyclicity_threshold,
        );
    }
    Ok(())
}

fn ring_static_phases(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    for block in ring_static(&c.ring)? {
        let n = block.n;
        r.result(format!("Omega_{n}s"), block.omega_ns, "Omega (n + 1/2) r");
        for b in Branch::BOTH {
            let frames = block.reference.frame(&format!("phi{b}")).expect("ring frames");
            let gamma = berry_phase(&closed_form_path(frames, block.period(), c.loop_points)?)?;
            let traj = evolve(&block.hamiltonian, &block.initial_state(b), c.steps)?;
            let aa = aa_phase_with_threshold(&traj, c.cyclicity_threshold)?;
            r.result(
                format!("gamma_{n}{b} holonomy"),
                gamma,
                "i sum log <phi(t_k)|phi(t_k+1)>",
            );
            r.result(format!("gamma_{n}{b} evolution"), aa.geometric, "total - dynamic");
            r.result(format!("dynamic_{n}{b}"), aa.dynamic, "-int <psi|H|psi> dt");
            r.result(
                format!("gamma_{n}{b} evolution convergence"),
                aa.convergence_estimate,
                "|gamma_M - gamma_M/2|/3",
            );

            let expected = invariant_phase(b, block.theta);
            r.reference(format!("gamma_{n}{b}"), expected, "pi(1 ± cos 2theta_n)");
            r.check(
                format!("gamma_{n}{b} holonomy"),
                circular_distance(gamma, expected),
                c.phase_tolerance,
            );
            r.check(
                format!("gamma_{n}{b} evolution"),
                circular_distance(aa.geometric, expected),
                c.phase_tolerance,
            );
            r.check(
                format!("cyclicity defect_{n}{b}"),
                aa.cyclicity_defect,
                c.cyclicity_threshold,
            );
        }
    }
    Ok(())
}

fn matrix_entries(r: &mut Report, prefix: &str, m: &ComplexMatrix, formula: &str, as_reference: bool) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let name = format!("{prefix}[{i}][{j}]");
            if as_reference {
                r.reference(name, m[(i, j)], formula);
            } else {
                r.result(name, m[(i, j)], formula);
            }
        }
    }
}

fn ring_rotating_matrix(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    r.result("Theta", c.ring.mixing_angle(), "atan2(Delta, g)/2");
    for block in ring_rotating(&c.ring)? {
        let n = block.n;
        let path = closed_form_path(block.frames.clone(), block.period(), c.loop_points)?;
        let h = holonomy(&path)?;
        let expected = block.reference.phase_matrix.clone().expect("rotating reference");
        matrix_entries(
            r,
            &format!("Gamma_{n}"),
            &h.phase_matrix,
            "i sum log(F_k^dag F_k+1)",
            false,
        );
        matrix_entries(
            r,
            &format!("W_{n}"),
            &h.wilson_unitary,
            "polar(prod F_k^dag F_k+1)",
            false,
        );
        matrix_entries(
            r,
            &format!("Gamma_{n}"),
            &expected,
            "sgn(omega_o) 2pi [[s², sc], [sc, c²]], s = sin Theta, c = cos Theta",
            true,
        );
        r.result(
            format!("Gamma_{n} convergence"),
            h.convergence_estimate.unwrap_or(0.0),
            "||Gamma_M - Gamma_M/2||/3",
        );
        r.result(format!("closure defect_{n}"), path.closure_defect(), "||F(T) - F(0)||");
        r.check(
            format!("Gamma_{n} elementwise"),
            h.phase_matrix.max_abs_diff(&expected),
            c.phase_tolerance,
        );
        r.check(
            format!("W_{n} vs identity"),
            h.wilson_unitary.max_abs_diff(&ComplexMatrix::identity(2)),
            c.phase_tolerance,
        );
    }
    Ok(())
}

fn action_family(
    block: &geophase::models::RingActionBlock,
    b: Branch,
    loop_points: usize,
    angle_points: usize,
) -> Vec<TorusState> {
    sample_loop(TAU, loop_points, |vt| block.eigenfunction(b, vt, angle_points))
}

fn ring_action_phases(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    let mixing = c.ring.mixing_angle();
    let radius = c.ring.radius();
    for block in ring_action(&c.ring)? {
        let n = block.n;
        let spectrum = eigh(&block.action.sample(0.0))?.values;
        for (b, computed) in [(Branch::Plus, spectrum[0]), (Branch::Minus, spectrum[1])] {
            let eigenvalue = n as f64 + 0.5 * (1.0 - b.sign() * radius);
            r.result(format!("a_{n}{b}"), computed, "eigenvalue of A(0)");
            r.reference(format!("a_{n}{b}"), eigenvalue, "n + (1 ∓ r)/2");
            r.check(format!("a_{n}{b}"), (computed - eigenvalue).abs(), c.phase_tolerance);

            let gamma = torus_phase(&action_family(&block, b, c.loop_points, c.angle_points))?;
            let expected = action_phase(b, mixing);
            r.result(format!("gamma_{n}{b}"), gamma, "-sum arg <xi(k)|xi(k+1)> on the torus");
            r.reference(format!("gamma_{n}{b}"), expected, "pi(1 ∓ cos 2Theta)");
            r.check(
                format!("gamma_{n}{b}"),
                circular_distance(gamma, expected),
                c.phase_tolerance,
            );
        }
    }
    Ok(())
}

fn direct_sum(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    let blocks = ring_static(&c.ring)?;
    let amplitude = C64::new((blocks.len() as f64).sqrt().recip(), 0.0);
    let branch = |i: usize| if i % 2 == 0 { Branch::Plus } else { Branch::Minus };
    let mut hamiltonians = BTreeMap::new();
    let mut state = RingState::new();
    for (i, block) in blocks.iter().enumerate() {
        hamiltonians.insert(block.n, block.spinor_hamiltonian()?);
        state = state.with_block(block.n, &block.spinor_state(branch(i)), amplitude);
    }
    let run = blockwise_evolve(&hamiltonians, &state, c.steps)?;
    let norm_drift = (0..run.times().len())
        .map(|k| (run.state(k).norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    r.result("block weight drift", run.max_weight_drift(), "max |w_n(t) - w_n(0)|");
    r.result("norm drift", norm_drift, "max |<psi|psi> - 1|");
    r.check("block weight drift", run.max_weight_drift(), c.phase_tolerance);
    r.check("norm drift", norm_drift, c.phase_tolerance);

    let duration = *run.times().last().expect("nonempty run");
    for (i, block) in blocks.iter().enumerate() {
        let (n, b) = (block.n, branch(i));
        let within = &run.blocks[&n];
        let alone = evolve_with(
            &hamiltonians[&n],
            &block.spinor_state(b),
            c.steps,
            EvolveOptions {
                duration: Some(duration),
                stride: c.steps,
            },
        )?;
        let mismatch: f64 = within
            .final_state()
            .iter()
            .zip(alone.final_state())
            .map(|(x, y)| (x - y * amplitude).norm())
            .sum();
        r.check(format!("block {n}{b} vs single-block run"), mismatch, c.phase_tolerance);

        let cycles = duration / block.period();
        r.result(format!("cycles_{n}"), cycles, "T_common / T_n");
        if (cycles - cycles.round()).abs() < 1e-9 {
            let gamma = aa_phase_with_threshold(within, c.cyclicity_threshold)?.geometric;
            let expected = geophase::angle::wrap(cycles.round() * invariant_phase(b, block.theta));
            r.result(
                format!("gamma_{n}{b} in superposition"),
                gamma,
                "total - dynamic over T_common",
            );
            r.reference(
                format!("gamma_{n}{b} in superposition"),
                expected,
                "cycles x pi(1 ± cos 2theta_n)",
            );
            r.check(
                format!("gamma_{n}{b} in superposition"),
                circular_distance(gamma, expected),
                c.phase_tolerance,
            );
        }
    }
    Ok(())
}

fn gauge_sweep(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    let mut paths: Vec<(String, FramePath)> = Vec::new();
    let m = spin_half(c.spin)?;
    paths.push((
        "spin phi+".into(),
        closed_form_path(
            m.reference.frame("phi+").expect("spin frames"),
            m.period(),
            c.loop_points,
        )?,
    ));
    let block = ring_static(&c.ring)?.remove(0);
    paths.push((
        format!("static ring phi_{}-", block.n),
        closed_form_path(
            block.reference.frame("phi-").expect("ring frames"),
            block.period(),
            c.loop_points,
        )?,
    ));
    let rotating = RingModelParams {
        omega_o: if c.ring.omega_o == 0.0 { 1.0 } else { c.ring.omega_o },
        ..c.ring.clone()
    };
    let block = ring_rotating(&rotating)?.remove(0);
    paths.push((
        format!("rotating ring xi'_{}", block.n),
        closed_form_path(block.frames.clone(), block.period(), c.loop_points)?,
    ));
    let block = ring_action(&c.ring)?.remove(0);
    let family = action_family(&block, Branch::Plus, c.loop_points, c.angle_points);
    paths.push((
        format!("action xi'_{}+", block.n),
        FramePath::new(loop_grid(TAU, c.loop_points), to_frames(&family)?)?,
    ));

    for (name, path) in paths {
        let spectrum = eigenphases(&wilson_loop(&path)?)?;
        let omega = connection_samples(&path)?;
        let mut worst = 0.0f64;
        let mut smallest_change = f64::INFINITY;
        for k in 0..c.gauge_count {
            let g = random_smooth_gauge(path.grid(), path.rank(), c.seed.wrapping_add(k))?;
            let moved = gauge_transform(&path, &g)?;
            worst = worst.max(spectrum_distance(&spectrum, &eigenphases(&wilson_loop(&moved)?)?));
            let change = connection_samples(&moved)?
                .iter()
                .zip(&omega)
                .map(|(a, b)| a.max_abs_diff(b))
                .sum::<f64>();
            smallest_change = smallest_change.min(change);
        }
        r.result(
            format!("{name} spectrum shift"),
            worst,
            "max over gauges of d(spectrum W, spectrum W')",
        );
        r.result(
            format!("{name} connection change"),
            smallest_change,
            "min over gauges of sum_k |omega'_k - omega_k|",
        );
        r.check(format!("{name} spectrum shift"), worst, c.phase_tolerance.max(1e-8));
        if c.gauge_count > 0 {
            r.check_at_least(format!("{name} connection change"), smallest_change, 1e-3);
        }
    }
    Ok(())
}

/// Records the deviations of one sequence and checks each halving.
fn halvings(r: &mut Report, label: &str, resolutions: &[usize], deviations: &[f64]) {
    for (m, d) in resolutions.iter().zip(deviations) {
        r.result(format!("{label} M={m}"), *d, "deviation from closed form");
    }
    for (k, pair) in deviations.windows(2).enumerate() {
        let (coarse, fine) = (pair[0], pair[1]);
        let name = format!("{label} halving {}", k + 1);
        if fine <= ROUNDOFF_FLOOR {
            r.check(format!("{name} at roundoff"), fine, ROUNDOFF_FLOOR);
        } else {
            r.result(format!("{name} ratio"), coarse / fine, "e(M/2)/e(M)");
            r.check_at_least(format!("{name} ratio"), coarse / fine, CONVERGENCE_RATIO);
        }
    }
}

fn convergence(c: &ExperimentConfig, r: &mut Report) -> geophase::Result<()> {
    let top = c.loop_points.min(c.steps);
    let resolutions: Vec<usize> = [8, 4, 2, 1].iter().map(|d| top / d).collect();
    let sweep = |f: &dyn Fn(usize) -> geophase::Result<f64>| {
        resolutions.iter().map(|&m| f(m)).collect::<geophase::Result<Vec<_>>>()
    };

    let m = spin_half(c.spin)?;
    for b in Branch::BOTH {
        let expected = invariant_phase(b, c.spin.theta);
        let frames = m.reference.frame(&format!("phi{b}")).expect("spin frames");
        let devs = sweep(&|k| {
            Ok(circular_distance(
                berry_phase(&closed_form_path(frames.clone(), m.period(), k)?)?,
                expected,
            ))
        })?;
        halvings(r, &format!("spin holonomy gamma{b}"), &resolutions, &devs);
    }

    let block = ring_static(&c.ring)?.remove(0);
    let n = block.n;
    for b in Branch::BOTH {
        let expected = invariant_phase(b, block.theta);
        let frames = block.reference.frame(&format!("phi{b}")).expect("ring frames");
        let devs = sweep(&|k| {
            Ok(circular_distance(
                berry_phase(&closed_form_path(frames.clone(), block.period(), k)?)?,
                expected,
            ))
        })?;
        halvings(r, &format!("static ring holonomy gamma_{n}{b}"), &resolutions, &devs);
        let devs = sweep(&|k| {
            let traj = evolve(&block.hamiltonian, &block.initial_state(b), k)?;
            Ok(circular_distance(
                aa_phase_with_threshold(&traj, c.cyclicity_threshold)?.geometric,
                expected,
            ))
        })?;
        halvings(r, &format!("static ring evolution gamma_{n}{b}"), &resolutions, &devs);
    }

    let rotating = RingModelParams {
        omega_o: if c.ring.omega_o == 0.0 { 1.0 } else { c.ring.omega_o },
        ..c.ring.clone()
    };
    let block = ring_rotating(&rotating)?.remove(0);
    let expected = block.reference.phase_matrix.clone().expect("rotating reference");
    let devs = sweep(&|k| {
        let path = closed_form_path(block.frames.clone(), block.period(), k)?;
        Ok(holonomy(&path)?.phase_matrix.max_abs_diff(&expected))
    })?;
    halvings(r, &format!("rotating ring Gamma_{}", block.n), &resolutions, &devs);

    let block = ring_action(&c.ring)?.remove(0);
    let mixing = c.ring.mixing_angle();
    for b in Branch::BOTH {
        let devs = sweep(&|k| {
            Ok(circular_distance(
                torus_phase(&action_family(&block, b, k, c.angle_points))?,
                action_phase(b, mixing),
            ))
        })?;
        halvings(r, &format!("action gamma_{}{b}", block.n), &resolutions, &devs);
    }
    Ok(())
}
