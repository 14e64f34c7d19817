use std::f64::consts::{PI, TAU};

use geophase::angle::circular_distance;
use geophase::evolution::{aa_phase, dynamic_phase, evolve, total_phase, DEFAULT_STEPS};
use geophase::holonomy::{berry_phase, loop_grid, sample_frames, FrameSource};
use geophase::linalg::{hermitian_exp, inner, norm, pauli, ComplexMatrix, Ket, C64};
use geophase::models::{spin_half, Branch, OperatorFamily, SpinModel, SpinModelParams};
use proptest::prelude::*;

fn spin(theta: f64) -> SpinModel {
    spin_half(SpinModelParams { omega_s: 1.7, theta }).unwrap()
}

#[test]
fn spin_up_total_phase_is_pi() {
    let m = spin(0.0);
    let traj = evolve(&m.hamiltonian, &m.initial_state(Branch::Plus), DEFAULT_STEPS).unwrap();
    let tp = total_phase(&traj);
    assert!(circular_distance(tp.phase, PI) < 1e-12);
    assert!(tp.cyclicity_defect < 1e-12);
    let r = aa_phase(&traj).unwrap();
    assert!(circular_distance(r.geometric, 0.0) < 1e-12);
}

#[test]
fn spin_state_tracks_closed_form() {
    // ψ_+(t) = e^{−iω_s t/2}|φ_+(t)⟩
    let m = spin(PI / 6.0);
    let traj = evolve(&m.hamiltonian, &m.initial_state(Branch::Plus), 256).unwrap();
    for (t, s) in traj.times().iter().zip(traj.states()) {
        let phase = C64::from_polar(1.0, -m.params.omega_s * t / 2.0);
        let oracle: Ket = m.phi(Branch::Plus, *t).iter().map(|v| v * phase).collect();
        let err: f64 = s.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).sum();
        assert!(err < 1e-12, "t = {t}: {err}");
    }
}

#[test]
fn spin_dynamic_phase() {
    for theta in [0.0, PI / 6.0, PI / 4.0, PI / 3.0] {
        let m = spin(theta);
        for b in Branch::BOTH {
            let traj = evolve(&m.hamiltonian, &m.initial_state(b), 512).unwrap();
            // −(ω_s/2)(±cos2θ)·T
            let oracle = -b.sign() * PI * (2.0 * theta).cos();
            assert!((dynamic_phase(&traj) - oracle).abs() < 1e-12);
        }
    }
}

#[test]
fn spin_geometric_phases() {
    let m = spin(PI / 6.0);
    let plus = aa_phase(&evolve(&m.hamiltonian, &m.initial_state(Branch::Plus), 512).unwrap()).unwrap();
    let minus = aa_phase(&evolve(&m.hamiltonian, &m.initial_state(Branch::Minus), 512).unwrap()).unwrap();
    assert!(circular_distance(plus.geometric, 1.5 * PI) < 1e-12);
    assert!(circular_distance(minus.geometric, 0.5 * PI) < 1e-12);
    assert!(plus.closure_error() < 1e-12 && minus.closure_error() < 1e-12);
    assert!(plus.convergence_estimate < 1e-12);
}

#[test]
fn global_phase_of_initial_state_is_irrelevant() {
    let m = spin(PI / 3.0);
    let psi0 = m.initial_state(Branch::Minus);
    let shifted: Ket = psi0.iter().map(|v| v * C64::from_polar(1.0, 0.9)).collect();
    let a = aa_phase(&evolve(&m.hamiltonian, &psi0, 512).unwrap()).unwrap();
    let b = aa_phase(&evolve(&m.hamiltonian, &shifted, 512).unwrap()).unwrap();
    assert!(circular_distance(a.geometric, b.geometric) < 1e-10);
}

#[test]
fn evolution_agrees_with_holonomy_for_spin() {
    for theta in [PI / 6.0, PI / 3.0] {
        let m = spin(theta);
        for b in Branch::BOTH {
            let aa = aa_phase(&evolve(&m.hamiltonian, &m.initial_state(b), DEFAULT_STEPS).unwrap()).unwrap();
            let frames = m.reference.frame(&format!("phi{b}")).unwrap();
            let path = sample_frames(&FrameSource::ClosedForm(frames), &loop_grid(m.period(), 4096)).unwrap();
            let holo = berry_phase(&path).unwrap();
            assert!(circular_distance(aa.geometric, holo) < 1e-6);
        }
    }
}

/// A field of polar angle `alpha` precessing at `omega`:
/// `H(t) = (Ω/2)(sinα cosωt σ_x + sinα sinωt σ_y + cosα σ_z)`.
fn precessing(rabi: f64, alpha: f64, omega: f64) -> OperatorFamily {
    OperatorFamily::new(TAU / omega, move |t| {
        let (s, c) = (omega * t).sin_cos();
        let x = pauli::sigma_x().scale_real(0.5 * rabi * alpha.sin() * c);
        let y = pauli::sigma_y().scale_real(0.5 * rabi * alpha.sin() * s);
        &(&x + &y) + &pauli::sigma_z().scale_real(0.5 * rabi * alpha.cos())
    })
    .unwrap()
}

/// Exact propagator through the rotating frame:
/// `U(t) = e^{−iωtσ_z/2}·e^{−i(H(0) − ωσ_z/2)t}`.
fn precessing_exact(rabi: f64, alpha: f64, omega: f64, t: f64) -> ComplexMatrix {
    let h0 = precessing(rabi, alpha, omega).sample(0.0);
    let frame = hermitian_exp(&pauli::sigma_z().scale_real(0.5 * omega), t).unwrap();
    let static_part = hermitian_exp(&(&h0 - &pauli::sigma_z().scale_real(0.5 * omega)), t).unwrap();
    &frame * &static_part
}

#[test]
fn midpoint_error_is_second_order() {
    let (rabi, alpha, omega) = (2.0, 0.7, 1.3);
    let h = precessing(rabi, alpha, omega);
    let psi0 = vec![C64::new(0.8, 0.0), C64::new(0.0, 0.6)];
    let exact = precessing_exact(rabi, alpha, omega, h.period()).apply(&psi0);
    let errors: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&m| {
            let traj = evolve(&h, &psi0, m).unwrap();
            traj.final_state().iter().zip(&exact).map(|(a, b)| (a - b).norm()).sum()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} from {errors:?}");
    }
}

proptest! {
    #[test]
    fn norm_is_preserved(rabi in 0.1f64..5.0, alpha in 0.0f64..PI, omega in 0.2f64..3.0,
                         a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        let h = precessing(rabi, alpha, omega);
        let raw = vec![C64::new(a, b), C64::new(c, 0.5)];
        let n = norm(&raw);
        let psi0: Ket = raw.iter().map(|v| v / n).collect();
        let traj = evolve(&h, &psi0, 200).unwrap();
        for (s, u) in traj.states().iter().zip(traj.propagators()) {
            prop_assert!((norm(s) - 1.0).abs() < 1e-10);
            prop_assert!(u.unitarity_defect() < 1e-10);
            let v = u.apply(&psi0);
            prop_assert!(v.iter().zip(s).all(|(x, y)| (x - y).norm() < 1e-10));
        }
        let tp = total_phase(&traj);
        prop_assert!((0.0..=1.0).contains(&tp.cyclicity_defect));
        prop_assert!((tp.cyclicity_defect - (1.0 - inner(&psi0, traj.final_state()).norm()).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_closes(theta in 0.0f64..std::f64::consts::FRAC_PI_2, omega in 0.3f64..4.0) {
        let m = spin_half(SpinModelParams { omega_s: omega, theta }).unwrap();
        let r = aa_phase(&evolve(&m.hamiltonian, &m.initial_state(Branch::Plus), 128).unwrap()).unwrap();
        prop_assert!(r.closure_error() < 1e-10);
        prop_assert!((0.0..TAU).contains(&r.geometric) && (0.0..TAU).contains(&r.total));
    }
}
