use std::f64::consts::{PI, TAU};

use geophase::angle::{circular_distance, spectrum_distance};
use geophase::holonomy::{
    berry_phase, connection_samples, eigenphases, gauge_transform, holonomy, loop_grid, phase_matrix,
    random_smooth_gauge, sample_frames, wilson_loop, FramePath, FrameSource,
};
use geophase::linalg::{unitary_exp, ComplexMatrix, Frame, C64};
use geophase::models::{ring_rotating, ring_static, spin_half, Branch, RingModelParams, SpinModelParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spin(theta: f64) -> geophase::models::SpinModel {
    spin_half(SpinModelParams { omega_s: 2.0, theta }).unwrap()
}

fn spin_path(theta: f64, branch: Branch, points: usize) -> FramePath {
    let m = spin(theta);
    let src = FrameSource::ClosedForm(m.reference.frame(&format!("phi{branch}")).unwrap());
    sample_frames(&src, &loop_grid(m.period(), points)).unwrap()
}

fn rotating(epsilon: f64, chi: f64) -> Vec<geophase::models::RingRotatingBlock> {
    ring_rotating(&RingModelParams {
        epsilon,
        chi,
        omega_o: 0.5,
        ..Default::default()
    })
    .unwrap()
}

fn rotating_path(block: &geophase::models::RingRotatingBlock, points: usize) -> FramePath {
    sample_frames(
        &FrameSource::ClosedForm(block.frames.clone()),
        &loop_grid(block.period(), points),
    )
    .unwrap()
}

#[test]
fn constant_subspace_from_eigensolver() {
    let family =
        geophase::models::OperatorFamily::constant(ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0]), 1.0).unwrap();
    let path = sample_frames(&FrameSource::Eigenspace { family, level: 1 }, &loop_grid(1.0, 32)).unwrap();
    assert_eq!(path.closure_defect(), 0.0);
    assert!(path.frames().iter().all(|f| f.distance(&path.frames()[0]) < 1e-15));
    let w = wilson_loop(&path).unwrap();
    assert!(w.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
}

#[test]
fn rotating_frames_close() {
    for block in rotating(0.5, PI / 3.0) {
        assert!(rotating_path(&block, 1024).closure_defect() <= 1e-12);
    }
}

#[test]
fn eigensolver_source_matches_closed_form_under_random_gauge() {
    let m = spin(PI / 6.0);
    let grid = loop_grid(m.period(), 2048);
    let reference = spin_path(PI / 6.0, Branch::Plus, 2048);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut frames: Vec<Frame> = grid
        .iter()
        .map(|&t| {
            let gauge = C64::from_polar(1.0, rng.gen_range(0.0..TAU));
            let v: Vec<C64> = m.phi(Branch::Plus, t).iter().map(|x| x * gauge).collect();
            Frame::from_kets(&[v]).unwrap()
        })
        .collect();
    let n = frames.len();
    frames[n - 1] = frames[0].clone();
    let aligned = FramePath::aligned(grid.clone(), frames).unwrap();
    let a = eigenphases(&wilson_loop(&aligned).unwrap()).unwrap();
    let b = eigenphases(&wilson_loop(&reference).unwrap()).unwrap();
    assert!(spectrum_distance(&a, &b) < 1e-8);

    // and straight from the eigensolver of I(t)
    let from_solver = sample_frames(
        &FrameSource::Eigenspace {
            family: m.invariant.clone(),
            level: 1,
        },
        &grid,
    )
    .unwrap();
    let c = eigenphases(&wilson_loop(&from_solver).unwrap()).unwrap();
    assert!(spectrum_distance(&c, &b) < 1e-8);
}

#[test]
fn spin_connection_samples() {
    let theta = PI / 6.0;
    let points = 4096;
    let m = spin(theta);
    let dt = m.period() / points as f64;
    // ⟨φ_+|dφ_+⟩ = +i(ω_s/2)(1 − cos2θ)dt
    let oracle = C64::new(0.0, 0.5 * m.params.omega_s * (1.0 - (2.0 * theta).cos()) * dt);
    for w in connection_samples(&spin_path(theta, Branch::Plus, points)).unwrap() {
        assert!((w[(0, 0)] - oracle).norm() < 1e-10);
    }
    let gamma = phase_matrix(&connection_samples(&spin_path(theta, Branch::Plus, points)).unwrap()).unwrap();
    assert!(circular_distance(gamma[(0, 0)].re, 1.5 * PI) < 1e-6);
}

#[test]
fn rotating_connection_samples() {
    let blocks = rotating(0.5, PI / 3.0);
    let block = &blocks[1];
    let points = 1024;
    let dt = block.period() / points as f64;
    let p = RingModelParams::default();
    let (s, c) = p.mixing_angle().sin_cos();
    let f = |x: f64| C64::new(0.0, -block.omega_o * dt * x);
    let oracle = ComplexMatrix::from_rows(&[&[f(s * s), f(s * c)], &[f(s * c), f(c * c)]]);
    for w in connection_samples(&rotating_path(block, points)).unwrap() {
        assert!(w.max_abs_diff(&oracle) < 1e-12);
    }
}

#[test]
fn rotating_phase_matrix_and_wilson_loop() {
    for (epsilon, chi) in [(0.5, PI / 3.0), (0.3, PI / 6.0)] {
        for block in rotating(epsilon, chi) {
            let path = rotating_path(&block, 4096);
            let report = holonomy(&path).unwrap();
            let expected = block.reference.phase_matrix.clone().unwrap();
            assert!(report.phase_matrix.max_abs_diff(&expected) < 1e-6);
            assert!(report.wilson_unitary.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-6);
            // W = exp(−iΓ)
            let via_gamma = unitary_exp(&report.phase_matrix.scale(C64::new(0.0, -1.0))).unwrap();
            assert!(via_gamma.max_abs_diff(&report.wilson_unitary) < 1e-6);
            assert!(report.abelian_phase.is_none());
        }
    }
}

#[test]
fn spin_wilson_loops() {
    let theta = PI / 6.0;
    // W_± = exp(i·Σω) = exp(∓iπ(1 − cos2θ)·(−1)): e^{+iπ/2} for φ_+, e^{−iπ/2} for φ_−
    let plus = wilson_loop(&spin_path(theta, Branch::Plus, 4096)).unwrap()[(0, 0)];
    let minus = wilson_loop(&spin_path(theta, Branch::Minus, 4096)).unwrap()[(0, 0)];
    assert!((plus - C64::from_polar(1.0, PI / 2.0)).norm() < 1e-6);
    assert!((minus - C64::from_polar(1.0, -PI / 2.0)).norm() < 1e-6);
    for b in Branch::BOTH {
        let report = holonomy(&spin_path(theta, b, 4096)).unwrap();
        let via_gamma = unitary_exp(&report.phase_matrix.scale(C64::new(0.0, -1.0))).unwrap();
        assert!(via_gamma.max_abs_diff(&report.wilson_unitary) < 1e-6);
    }
}

#[test]
fn berry_phase_examples() {
    assert!(
        circular_distance(
            berry_phase(&spin_path(PI / 6.0, Branch::Minus, 4096)).unwrap(),
            PI / 2.0
        ) < 1e-6
    );
    let p = RingModelParams {
        theta_n: vec![PI / 3.0],
        ..Default::default()
    };
    for block in ring_static(&p).unwrap() {
        let src = FrameSource::ClosedForm(block.reference.frame("phi-").unwrap());
        let path = sample_frames(&src, &loop_grid(block.period(), 4096)).unwrap();
        assert!(circular_distance(berry_phase(&path).unwrap(), 1.5 * PI) < 1e-6);
    }
}

#[test]
fn trivial_gauges() {
    let path = rotating_path(&rotating(0.5, PI / 3.0)[0], 256);
    let ident = vec![ComplexMatrix::identity(2); path.frames().len()];
    let same = gauge_transform(&path, &ident).unwrap();
    assert!(same
        .frames()
        .iter()
        .zip(path.frames())
        .all(|(a, b)| a.distance(b) == 0.0));

    let g = unitary_exp(&ComplexMatrix::from_rows(&[
        &[C64::new(0.0, 0.3), C64::new(0.2, 0.1)],
        &[C64::new(-0.2, 0.1), C64::new(0.0, -0.7)],
    ]))
    .unwrap();
    let moved = gauge_transform(&path, &vec![g.clone(); path.frames().len()]).unwrap();
    let w = wilson_loop(&path).unwrap();
    let w2 = wilson_loop(&moved).unwrap();
    assert!(w2.max_abs_diff(&(&(&g.adjoint() * &w) * &g)) < 1e-12);
}

#[test]
fn random_gauges_change_connection_not_spectrum() {
    let path = rotating_path(&rotating(0.5, PI / 3.0)[0], 1024);
    let w = eigenphases(&wilson_loop(&path).unwrap()).unwrap();
    let gamma = phase_matrix(&connection_samples(&path).unwrap()).unwrap();
    for seed in 0..10 {
        let g = random_smooth_gauge(path.grid(), 2, seed).unwrap();
        let moved = gauge_transform(&path, &g).unwrap();
        let w2 = eigenphases(&wilson_loop(&moved).unwrap()).unwrap();
        assert!(spectrum_distance(&w, &w2) < 1e-8);
        let gamma2 = phase_matrix(&connection_samples(&moved).unwrap()).unwrap();
        assert!(gamma2.max_abs_diff(&gamma) > 1e-3);
    }
}

#[test]
fn gauge_is_deterministic_in_seed() {
    let grid = loop_grid(1.0, 16);
    assert_eq!(
        random_smooth_gauge(&grid, 2, 5).unwrap(),
        random_smooth_gauge(&grid, 2, 5).unwrap()
    );
    assert_ne!(
        random_smooth_gauge(&grid, 2, 5).unwrap(),
        random_smooth_gauge(&grid, 2, 6).unwrap()
    );
}

/// A smooth rank-`n` loop in `C^k`: `F(s) = exp(s·A)·E` with `A` anti-Hermitian and
/// `exp(A)` restricted to commute with the frame's projector at `s = 1`.
fn random_loop(seed: u64, rank: usize, points: usize) -> FramePath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rank + 2;
    let h = ComplexMatrix::from_fn(k, k, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .hermitian_part();
    let e = ComplexMatrix::from_fn(
        k,
        rank,
        |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
    );
    let grid = loop_grid(1.0, points);
    let frames = grid
        .iter()
        .map(|&s| {
            // generator scaled by sin²(πs) returns to the start at s = 1
            let a = h.scale(C64::new(0.0, -(PI * s).sin().powi(2)));
            Frame::new(&unitary_exp(&a).unwrap() * &e).unwrap()
        })
        .collect();
    FramePath::new(grid, frames).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phase_matrix_is_hermitian(seed in 0u64..10_000, rank in 1usize..4) {
        let path = random_loop(seed, rank, 256);
        let samples = connection_samples(&path).unwrap();
        for w in &samples {
            prop_assert!(w.skew_hermitian_defect() <= 1e-10);
        }
        let gamma = phase_matrix(&samples).unwrap();
        prop_assert!(gamma.hermitian_defect() <= 1e-10);
        prop_assert!(wilson_loop(&path).unwrap().unitarity_defect() <= 1e-9);
    }

    #[test]
    fn wilson_spectrum_is_gauge_invariant(seed in 0u64..10_000, gauge_seed in 0u64..10_000, rank in 1usize..4) {
        let path = random_loop(seed, rank, 512);
        let g = random_smooth_gauge(path.grid(), rank, gauge_seed).unwrap();
        let moved = gauge_transform(&path, &g).unwrap();
        let a = eigenphases(&wilson_loop(&path).unwrap()).unwrap();
        let b = eigenphases(&wilson_loop(&moved).unwrap()).unwrap();
        prop_assert!(spectrum_distance(&a, &b) <= 1e-8);
    }
}
