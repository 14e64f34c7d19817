//! Numerical checks that an operator family is an invariant of a
//! Hamiltonian, `∂I/∂t − i[I, H] = 0`, and of its consequences: constant
//! eigenvalues, eigenspaces carried into themselves, constant expansion
//! weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{evolve, DEFAULT_STEPS};
use crate::linalg::{eigh, group_degenerate, inner, norm, ComplexMatrix, C64, DEGENERACY_TOL};
use crate::models::OperatorFamily;

/// Half-step of the central difference, relative to the family's period.
pub const DERIVATIVE_STEP: f64 = 1e-6;

/// `count` uniformly spaced times in `[0, period)`.
pub fn sample_times(period: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| period * k as f64 / count as f64).collect()
}

fn check_dims(i: &OperatorFamily, h: &OperatorFamily) -> Result<()> {
    if i.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            context: "invariant and Hamiltonian",
            expected: i.dim().to_string(),
            found: h.dim().to_string(),
        });
    }
    Ok(())
}

/// `max_t ‖∂I/∂t − i[I, H]‖_F` with `ħ = 1`.
///
/// The derivative is a central difference with half-step `T·1e-6`, so
/// exact invariants still show a floor near `1e-9`.
pub fn invariance_residual(i: &OperatorFamily, h: &OperatorFamily, times: &[f64]) -> Result<f64> {
    check_dims(i, h)?;
    let step = i.period() * DERIVATIVE_STEP;
    let residual = times
        .iter()
        .map(|&t| {
            let deriv = (&i.sample(t + step) - &i.sample(t - step)).scale_real(0.5 / step);
            let comm = i.sample(t).commutator(&h.sample(t)).scale(C64::new(0.0, 1.0));
            (&deriv - &comm).frobenius_norm()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

/// `max_t max_k |λ_k(t) − λ_k(0)|` with ascending eigenvalues.
pub fn eigenvalue_drift(i: &OperatorFamily, times: &[f64]) -> Result<f64> {
    let reference = eigh(&i.sample(0.0))?.values;
    let mut drift: f64 = 0.0;
    for &t in times {
        let values = eigh(&i.sample(t))?.values;
        for (a, b) in values.iter().zip(&reference) {
            drift = drift.max((a - b).abs());
        }
    }
    Ok(drift)
}

/// Eigenvalue groups of `I(t)` with the mean eigenvalue of each.
fn eigen_groups(m: &ComplexMatrix) -> Result<(crate::linalg::Eigh, Vec<Vec<usize>>, Vec<f64>)> {
    let e = eigh(m)?;
    let groups = group_degenerate(&e.values, DEGENERACY_TOL);
    let means = groups
        .iter()
        .map(|g| g.iter().map(|&k| e.values[k]).sum::<f64>() / g.len() as f64)
        .collect();
    Ok((e, groups, means))
}

/// Evolves each eigenvector of the `level`-th eigenvalue group of `I(0)`
/// (groups in ascending order) under `H` over one period and returns
/// `max ‖(1 − P_level(t))ψ(t)‖`.
///
/// Fails with [`Error::TrackingAmbiguity`] when the group structure of
/// `I(t)` changes or the level's eigenvalue cannot be matched.
pub fn transport_error(i: &OperatorFamily, h: &OperatorFamily, level: usize, steps: usize) -> Result<f64> {
    check_dims(i, h)?;
    let (e0, groups0, means0) = eigen_groups(&i.sample(0.0))?;
    if level >= groups0.len() {
        return Err(Error::LevelOutOfRange {
            level,
            groups: groups0.len(),
        });
    }
    let target = means0[level];
    let width = groups0[level].len();

    let mut worst: f64 = 0.0;
    for &col in &groups0[level] {
        let traj = evolve(h, &e0.vectors.column(col), steps)?;
        for (t, psi) in traj.times().iter().zip(traj.states()) {
            let (e, groups, means) = eigen_groups(&i.sample(*t))?;
            if groups.len() != groups0.len() {
                return Err(Error::TrackingAmbiguity {
                    time: *t,
                    detail: format!("{} eigenvalue groups at t = 0, {} now", groups0.len(), groups.len()),
                });
            }
            let matched = means
                .iter()
                .position(|m| (m - target).abs() <= 1e-6 * target.abs().max(1.0))
                .filter(|&k| groups[k].len() == width)
                .ok_or_else(|| Error::TrackingAmbiguity {
                    time: *t,
                    detail: format!("no eigenvalue group matches {target}"),
                })?;
            let frame = e.subframe(&groups[matched]);
            let mut rest = psi.clone();
            for k in 0..frame.count() {
                let v = frame.column(k);
                let c = inner(&v, psi);
                for (r, vk) in rest.iter_mut().zip(&v) {
                    *r -= c * vk;
                }
            }
            worst = worst.max(norm(&rest));
        }
    }
    Ok(worst)
}

/// Squared weight of a state in one eigenvalue group of an invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupWeight {
    /// Mean eigenvalue of the group.
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub weight: f64,
}

/// Projects `psi` onto each (near-)degenerate eigenvalue group of `i0`,
/// grouping eigenvalues within `tol` relative.
pub fn decompose_state(psi: &[C64], i0: &ComplexMatrix, tol: f64) -> Result<Vec<GroupWeight>> {
    if psi.len() != i0.rows() {
        return Err(Error::DimensionMismatch {
            context: "state and invariant",
            expected: i0.rows().to_string(),
            found: psi.len().to_string(),
        });
    }
    let n = norm(psi);
    if (n - 1.0).abs() > crate::evolution::NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm: n });
    }
    let e = eigh(i0)?;
    let groups = group_degenerate(&e.values, tol);
    Ok(groups
        .iter()
        .map(|g| GroupWeight {
            eigenvalue: g.iter().map(|&k| e.values[k]).sum::<f64>() / g.len() as f64,
            multiplicity: g.len(),
            weight: g.iter().map(|&k| inner(&e.vectors.column(k), psi).norm_sqr()).sum(),
        })
        .collect())
}

/// Summary of the invariance checks for one `(I, H)` pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub max_residual: f64,
    pub eigenvalue_drift: f64,
    /// Worst transport error over every eigenvalue group.
    pub transport_error: f64,
    pub sample_times: Vec<f64>,
}

/// Runs all three checks with `samples` uniform times and [`DEFAULT_STEPS`]
/// propagation steps.
pub fn check_invariant(i: &OperatorFamily, h: &OperatorFamily, samples: usize) -> Result<InvarianceReport> {
    check_invariant_with_steps(i, h, samples, DEFAULT_STEPS)
}

pub fn check_invariant_with_steps(
    i: &OperatorFamily,
    h: &OperatorFamily,
    samples: usize,
    steps: usize,
) -> Result<InvarianceReport> {
    let times = sample_times(i.period(), samples);
    let max_residual = invariance_residual(i, h, &times)?;
    let eigenvalue_drift = eigenvalue_drift(i, &times)?;
    let levels = group_degenerate(&eigh(&i.sample(0.0))?.values, DEGENERACY_TOL).len();
    let mut transport: f64 = 0.0;
    for level in 0..levels {
        transport = transport.max(transport_error(i, h, level, steps)?);
    }
    Ok(InvarianceReport {
        max_residual,
        eigenvalue_drift,
        transport_error: transport,
        sample_times: times,
    })
}
