//! Schrödinger propagation and the split of a cyclic evolution's phase
//! into dynamic and geometric parts.

use serde::Serialize;

use crate::angle;
use crate::error::{Error, Result};
use crate::linalg::{expectation, hermitian_exp, inner, norm, ComplexMatrix, Ket, C64};
use crate::models::OperatorFamily;

/// Steps per period used when the caller has no preference.
pub const DEFAULT_STEPS: usize = 4096;
/// Largest `1 − |⟨ψ(0)|ψ(T)⟩|` still treated as a cyclic evolution.
pub const CYCLICITY_THRESHOLD: f64 = 1e-4;
/// Allowed deviation of `‖ψ₀‖` from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Duration and recording density for [`evolve_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Total propagation time; the Hamiltonian's period when `None`.
    pub duration: Option<f64>,
    /// Record every `stride`-th step. The final step is always recorded.
    pub stride: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            duration: None,
            stride: 1,
        }
    }
}

/// A propagated state on a uniform time grid.
///
/// Immutable once built. The dynamic phase is accumulated over every step,
/// even when only a subset of steps is recorded.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Ket>,
    propagators: Vec<ComplexMatrix>,
    energies: Vec<f64>,
    dynamic_phase: f64,
    steps: usize,
    duration: f64,
    hamiltonian: OperatorFamily,
}

impl Trajectory {
    /// Recorded times, starting at 0 and ending at the duration.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Ket] {
        &self.states
    }

    /// Accumulated propagators `U(t_k; 0)` at the recorded times.
    pub fn propagators(&self) -> &[ComplexMatrix] {
        &self.propagators
    }

    /// `⟨ψ(t_k)|H(t_k)|ψ(t_k)⟩` at the recorded times.
    pub fn dynamic_integrand(&self) -> &[f64] {
        &self.energies
    }

    pub fn initial_state(&self) -> &Ket {
        &self.states[0]
    }

    pub fn final_state(&self) -> &Ket {
        self.states.last().expect("trajectory has at least two samples")
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn hamiltonian(&self) -> &OperatorFamily {
        &self.hamiltonian
    }
}

/// Propagates `psi0` over one period of `h` with `steps` midpoint steps,
/// recording every step.
///
/// Each step applies `exp(−i·H(t_k + Δt/2)·Δt)`, which is exactly unitary;
/// the global error is `O(Δt²)`.
pub fn evolve(h: &OperatorFamily, psi0: &[C64], steps: usize) -> Result<Trajectory> {
    evolve_with(h, psi0, steps, EvolveOptions::default())
}

pub fn evolve_with(h: &OperatorFamily, psi0: &[C64], steps: usize, options: EvolveOptions) -> Result<Trajectory> {
    let n = norm(psi0);
    if !n.is_finite() {
        return Err(Error::NonFinite);
    }
    if (n - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm: n });
    }
    propagate(h, psi0, steps, options)
}

/// Like [`evolve_with`] but accepts a state of any norm; used for blocks
/// of a larger state.
pub(crate) fn propagate(h: &OperatorFamily, psi0: &[C64], steps: usize, options: EvolveOptions) -> Result<Trajectory> {
    if steps < 2 {
        return Err(Error::InvalidParameter {
            field: "steps",
            reason: format!("need at least 2, got {steps}"),
        });
    }
    if options.stride == 0 {
        return Err(Error::InvalidParameter {
            field: "stride",
            reason: "must be at least 1".into(),
        });
    }
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: h.dim().to_string(),
            found: psi0.len().to_string(),
        });
    }
    let duration = options.duration.unwrap_or(h.period());
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter {
            field: "duration",
            reason: format!("must be positive, got {duration}"),
        });
    }

    let dt = duration / steps as f64;
    let capacity = steps / options.stride + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    let mut propagators = Vec::with_capacity(capacity);
    let mut energies = Vec::with_capacity(capacity);

    let mut psi: Ket = psi0.to_vec();
    let mut u = ComplexMatrix::identity(h.dim());
    let mut energy = expectation(&h.sample(0.0), &psi);
    times.push(0.0);
    states.push(psi.clone());
    propagators.push(u.clone());
    energies.push(energy);

    let mut dynamic = 0.0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let step = hermitian_exp(&h.sample(t + 0.5 * dt), dt)?;
        psi = step.apply(&psi);
        u = &step * &u;
        let t_next = (k + 1) as f64 * dt;
        let next = expectation(&h.sample(t_next), &psi);
        dynamic -= 0.5 * (energy + next) * dt;
        energy = next;
        if (k + 1) % options.stride == 0 || k + 1 == steps {
            times.push(t_next);
            states.push(psi.clone());
            propagators.push(u.clone());
            energies.push(energy);
        }
    }

    Ok(Trajectory {
        times,
        states,
        propagators,
        energies,
        dynamic_phase: dynamic,
        steps,
        duration,
        hamiltonian: h.clone(),
    })
}

/// `D = −∫⟨ψ|H|ψ⟩dt` by the trapezoidal rule over every step (`ħ = 1`).
pub fn dynamic_phase(traj: &Trajectory) -> f64 {
    traj.dynamic_phase
}

/// Phase of `⟨ψ(0)|ψ(T)⟩` together with how far the evolution is from cyclic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TotalPhase {
    /// `arg⟨ψ(0)|ψ(T)⟩` in `[0, 2π)`.
    pub phase: f64,
    /// `1 − |⟨ψ(0)|ψ(T)⟩|`, clamped to `[0, 1]`.
    pub cyclicity_defect: f64,
    /// Whether the defect is within the threshold used.
    pub cyclic: bool,
}

pub fn total_phase(traj: &Trajectory) -> TotalPhase {
    total_phase_with_threshold(traj, CYCLICITY_THRESHOLD)
}

pub fn total_phase_with_threshold(traj: &Trajectory, threshold: f64) -> TotalPhase {
    let start = traj.initial_state();
    let z = inner(start, traj.final_state()) / inner(start, start).re;
    let cyclicity_defect = (1.0 - z.norm()).clamp(0.0, 1.0);
    TotalPhase {
        phase: angle::wrap(z.arg()),
        cyclicity_defect,
        cyclic: cyclicity_defect <= threshold,
    }
}

/// Aharonov-Anandan decomposition `γ = D + γ_AA` of one cyclic evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseReport {
    /// Total phase in `[0, 2π)`.
    pub total: f64,
    /// Dynamic phase, not reduced.
    pub dynamic: f64,
    /// Geometric phase in `[0, 2π)`.
    pub geometric: f64,
    pub cyclicity_defect: f64,
    pub step_count: usize,
    /// Richardson-style error estimate `|γ_M − γ_{M/2}|/3` for the geometric phase.
    pub convergence_estimate: f64,
}

impl PhaseReport {
    /// Distance on the circle between `total` and `dynamic + geometric`.
    pub fn closure_error(&self) -> f64 {
        angle::circular_distance(self.total, self.dynamic + self.geometric)
    }
}

/// Splits the total phase of a cyclic trajectory into dynamic and geometric
/// parts. The convergence estimate re-propagates with half the steps.
pub fn aa_phase(traj: &Trajectory) -> Result<PhaseReport> {
    aa_phase_with_threshold(traj, CYCLICITY_THRESHOLD)
}

pub fn aa_phase_with_threshold(traj: &Trajectory, threshold: f64) -> Result<PhaseReport> {
    let geometric = geometric_part(traj, threshold)?;
    let total = total_phase_with_threshold(traj, threshold);

    let convergence_estimate = if traj.steps >= 4 {
        let half_steps = traj.steps / 2;
        let coarse = propagate(
            &traj.hamiltonian,
            traj.initial_state(),
            half_steps,
            EvolveOptions {
                duration: Some(traj.duration),
                stride: half_steps,
            },
        )?;
        match geometric_part(&coarse, threshold) {
            Ok(g) => angle::circular_distance(geometric, g) / 3.0,
            Err(_) => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };

    Ok(PhaseReport {
        total: total.phase,
        dynamic: traj.dynamic_phase / inner(traj.initial_state(), traj.initial_state()).re,
        geometric,
        cyclicity_defect: total.cyclicity_defect,
        step_count: traj.steps,
        convergence_estimate,
    })
}

fn geometric_part(traj: &Trajectory, threshold: f64) -> Result<f64> {
    let total = total_phase_with_threshold(traj, threshold);
    if !total.cyclic {
        return Err(Error::NotCyclic {
            defect: total.cyclicity_defect,
            threshold,
        });
    }
    let norm2 = inner(traj.initial_state(), traj.initial_state()).re;
    Ok(angle::wrap(total.phase - traj.dynamic_phase / norm2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, C64};
    use std::f64::consts::{PI, TAU};

    fn ket(a: f64, b: f64) -> Ket {
        vec![C64::new(a, 0.0), C64::new(b, 0.0)]
    }

    #[test]
    fn zero_hamiltonian_is_trivial() {
        let h = OperatorFamily::constant(ComplexMatrix::zeros(2, 2), 1.0).unwrap();
        let psi0 = ket(0.6, 0.8);
        let traj = evolve(&h, &psi0, 16).unwrap();
        for (s, u) in traj.states().iter().zip(traj.propagators()) {
            assert_eq!(s, &psi0);
            assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) == 0.0);
        }
        assert_eq!(dynamic_phase(&traj), 0.0);
        let tp = total_phase(&traj);
        assert_eq!((tp.phase, tp.cyclicity_defect), (0.0, 0.0));
    }

    #[test]
    fn eigenstate_of_sigma_z_picks_up_pi() {
        let omega = 2.3;
        let h = OperatorFamily::constant(pauli::sigma_z().scale_real(omega / 2.0), TAU / omega).unwrap();
        let traj = evolve(&h, &ket(1.0, 0.0), 64).unwrap();
        // oracle: e^{−iω tσ_z/2}|↑⟩ = e^{−iωt/2}|↑⟩
        for (t, s) in traj.times().iter().zip(traj.states()) {
            assert!((s[0] - C64::from_polar(1.0, -omega * t / 2.0)).norm() < 1e-12);
            assert!(s[1].norm() < 1e-15);
        }
        let tp = total_phase(&traj);
        assert!(angle::circular_distance(tp.phase, PI) < 1e-12);
        let report = aa_phase(&traj).unwrap();
        assert!(angle::circular_distance(report.geometric, 0.0) < 1e-12);
    }

    #[test]
    fn constant_phase_is_total_phase() {
        // ψ(T) = e^{iπ/3}ψ(0) for H = −(π/3)·1 over T = 1
        let h = OperatorFamily::constant(ComplexMatrix::identity(2).scale_real(-PI / 3.0), 1.0).unwrap();
        let traj = evolve(&h, &ket(0.6, 0.8), 8).unwrap();
        let tp = total_phase(&traj);
        assert!((tp.phase - PI / 3.0).abs() < 1e-14);
        assert!(tp.cyclicity_defect < 1e-15);
    }

    #[test]
    fn stride_keeps_endpoints_and_dynamic_phase() {
        let h = OperatorFamily::new(1.0, |t| {
            let (s, c) = (TAU * t).sin_cos();
            &pauli::sigma_z().scale_real(1.0 + 0.2 * c) + &pauli::sigma_x().scale_real(0.5 * s)
        })
        .unwrap();
        let psi0 = ket(0.6, 0.8);
        let full = evolve(&h, &psi0, 100).unwrap();
        let sparse = evolve_with(
            &h,
            &psi0,
            100,
            EvolveOptions {
                duration: None,
                stride: 30,
            },
        )
        .unwrap();
        assert_eq!(sparse.times().len(), 5);
        assert_eq!(sparse.times().last(), Some(&1.0));
        assert_eq!(sparse.final_state(), full.final_state());
        assert_eq!(dynamic_phase(&sparse), dynamic_phase(&full));
        // the full record's integrand, integrated by trapezoid, gives the same phase
        let e = full.dynamic_integrand();
        let dt = 0.01;
        let oracle: f64 = -e.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum::<f64>();
        assert!((oracle - dynamic_phase(&full)).abs() < 1e-13);
    }

    #[test]
    fn states_follow_propagators() {
        let h = OperatorFamily::new(2.0, |t| {
            let (s, c) = (PI * t).sin_cos();
            &pauli::sigma_x().scale_real(c) + &pauli::sigma_y().scale_real(s)
        })
        .unwrap();
        let psi0 = ket(1.0, 0.0);
        let traj = evolve(&h, &psi0, 200).unwrap();
        for (s, u) in traj.states().iter().zip(traj.propagators()) {
            let v = u.apply(&psi0);
            assert!(v.iter().zip(s).all(|(a, b)| (a - b).norm() < 1e-12));
            assert!(u.unitarity_defect() < 1e-12);
            assert!((norm(s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let h = OperatorFamily::constant(pauli::sigma_z(), 1.0).unwrap();
        assert!(matches!(
            evolve(&h, &ket(1.0, 1.0), 8),
            Err(Error::NotNormalized { .. })
        ));
        assert!(evolve(&h, &ket(1.0, 0.0), 1).is_err());
        assert!(evolve(&h, &[C64::new(1.0, 0.0)], 8).is_err());
    }

    #[test]
    fn non_cyclic_evolution_is_flagged() {
        // σ_x over a quarter period rotates |↑⟩ to a state orthogonal-ish to it
        let h = OperatorFamily::constant(pauli::sigma_x(), PI / 4.0).unwrap();
        let traj = evolve(&h, &ket(1.0, 0.0), 32).unwrap();
        let tp = total_phase(&traj);
        assert!(!tp.cyclic);
        assert!(matches!(aa_phase(&traj), Err(Error::NotCyclic { .. })));
    }
}
