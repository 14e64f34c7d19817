//! Geometric phases of action-operator eigenfunctions, which live on a
//! torus of angle variables and depend on a slowly varied parameter.
//!
//! Inner products are torus averages `∮ψ†φ dφ/(2π)^n`, computed with the
//! uniform rectangle rule (exact for trigonometric polynomials of degree
//! below the number of points per dimension).

use std::f64::consts::TAU;

use serde::Serialize;

use crate::angle;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Frame, Ket, C64};

/// Angle points per dimension used when the caller has no preference.
pub const DEFAULT_ANGLE_POINTS: usize = 64;
/// Largest allowed `|‖ψ‖ − 1|` along a parameter loop.
pub const NORMALIZATION_DRIFT_TOL: f64 = 1e-6;
/// Consecutive overlaps smaller in magnitude mean the loop grid is too coarse.
pub const MIN_LOOP_OVERLAP: f64 = 0.5;

/// Uniform grid of `points` angles per dimension on an `dims`-torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorusGrid {
    dims: usize,
    points: usize,
}

impl TorusGrid {
    /// # Panics
    /// If `dims` or `points` is zero.
    pub fn new(dims: usize, points: usize) -> Self {
        assert!(
            dims > 0 && points > 0,
            "torus grid needs at least one dimension and one point"
        );
        Self { dims, points }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of grid points, `points^dims`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Angles of the grid point with the given flat index (first dimension
    /// varies slowest).
    pub fn angles(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut out = vec![0.0; self.dims];
        for d in (0..self.dims).rev() {
            out[d] = TAU * (rest % self.points) as f64 / self.points as f64;
            rest /= self.points;
        }
        out
    }
}

/// Spinor-valued wavefunction sampled on a torus grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusState {
    grid: TorusGrid,
    components: usize,
    values: Vec<C64>,
}

impl TorusState {
    /// Samples `f(angles) -> spinor` at every grid point.
    ///
    /// # Panics
    /// If `f` returns a spinor with other than `components` entries.
    pub fn from_fn(grid: TorusGrid, components: usize, mut f: impl FnMut(&[f64]) -> Vec<C64>) -> Self {
        let mut values = Vec::with_capacity(grid.len() * components);
        for k in 0..grid.len() {
            let spinor = f(&grid.angles(k));
            assert_eq!(spinor.len(), components, "spinor has the wrong number of components");
            values.extend(spinor);
        }
        Self {
            grid,
            components,
            values,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Spinor at the grid point with flat index `k`.
    pub fn spinor(&self, k: usize) -> &[C64] {
        &self.values[k * self.components..(k + 1) * self.components]
    }

    /// Flattened samples scaled by `1/√(points^dims)`, so that the plain
    /// inner product of two such kets equals [`torus_inner`].
    pub fn to_ket(&self) -> Ket {
        let scale = 1.0 / (self.grid.len() as f64).sqrt();
        self.values.iter().map(|v| v * scale).collect()
    }

    pub fn norm(&self) -> f64 {
        torus_inner(self, self).map(|z| z.re.sqrt()).unwrap_or(f64::NAN)
    }
}

/// `∮ψ†φ dφ/(2π)^n` by the rectangle rule.
pub fn torus_inner(psi: &TorusState, phi: &TorusState) -> Result<C64> {
    if psi.grid != phi.grid || psi.components != phi.components {
        return Err(Error::GridMismatch(format!(
            "{:?} with {} components vs {:?} with {}",
            psi.grid, psi.components, phi.grid, phi.components
        )));
    }
    let sum: C64 = psi.values.iter().zip(&phi.values).map(|(a, b)| a.conj() * b).sum();
    Ok(sum / psi.grid.len() as f64)
}

fn check_loop(family: &[TorusState]) -> Result<()> {
    if family.len() < 3 {
        return Err(Error::InvalidParameter {
            field: "family",
            reason: format!("a loop needs at least 3 samples, got {}", family.len()),
        });
    }
    for (k, state) in family.iter().enumerate() {
        let drift = (state.norm() - 1.0).abs();
        if !(drift <= NORMALIZATION_DRIFT_TOL) {
            return Err(Error::NormalizationDrift { sample: k, drift });
        }
    }
    Ok(())
}

/// Overlaps `⟨ψ(R_k)|ψ(R_{k+1})⟩` around the loop.
fn loop_overlaps(family: &[TorusState]) -> Result<Vec<C64>> {
    family
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let z = torus_inner(&pair[0], &pair[1])?;
            if z.norm() <= MIN_LOOP_OVERLAP {
                return Err(Error::GridTooCoarse {
                    interval: k,
                    detail: format!("overlap magnitude {:.3e}", z.norm()),
                });
            }
            Ok(z)
        })
        .collect()
}

/// Discrete connection `θ_k = i·arg⟨ψ(R_k)|ψ(R_{k+1})⟩`, one purely
/// imaginary value per loop interval.
pub fn torus_connection_samples(family: &[TorusState]) -> Result<Vec<C64>> {
    check_loop(family)?;
    Ok(loop_overlaps(family)?
        .into_iter()
        .map(|z| C64::new(0.0, z.arg()))
        .collect())
}

/// Geometric phase `i·∮⟨ψ|dψ⟩` of a family of torus wavefunctions over a
/// closed parameter loop (`family[M]` closes the loop), in `[0, 2π)`.
pub fn torus_phase(family: &[TorusState]) -> Result<f64> {
    let samples = torus_connection_samples(family)?;
    let sum: f64 = samples.iter().map(|w| w.im).sum();
    Ok(angle::wrap(-sum))
}

/// The same family viewed as a rank-one frame path, using the flattened
/// kets of [`TorusState::to_ket`].
pub fn to_frames(family: &[TorusState]) -> Result<Vec<Frame>> {
    family
        .iter()
        .map(|s| {
            Frame::from_kets(&[s.to_ket()]).map_err(|_| Error::NormalizationDrift {
                sample: 0,
                drift: (s.norm() - 1.0).abs(),
            })
        })
        .collect()
}

/// Convenience: samples `f(R)` over a uniform loop grid of `points`
/// intervals in `[0, period]`.
pub fn sample_loop(period: f64, points: usize, mut f: impl FnMut(f64) -> TorusState) -> Vec<TorusState> {
    (0..=points).map(|k| f(period * k as f64 / points as f64)).collect()
}

/// The Gram matrix of a set of torus states, for orthonormality checks.
pub fn gram(states: &[TorusState]) -> Result<ComplexMatrix> {
    let n = states.len();
    let mut g = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            g[(r, c)] = torus_inner(&states[r], &states[c])?;
        }
    }
    Ok(g)
}
