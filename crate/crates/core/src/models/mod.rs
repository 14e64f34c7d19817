//! Parameterized Hamiltonians, invariant operators and action operators,
//! together with their closed-form reference phases.
//!
//! Units: `ħ = 1`. Physical constants enter only through the rates
//! `ω_s`, `Ω`, `ω_o` and the dimensionless coupling `ε`.

mod ring;
mod spin;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Frame};

pub use ring::{
    ring_action, ring_rotating, ring_static, RingActionBlock, RingModelParams, RingRotatingBlock, RingStaticBlock,
};
pub use spin::{spin_half, SpinModel, SpinModelParams};

pub type MatrixSampler = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;
pub type FrameSampler = Arc<dyn Fn(f64) -> Frame + Send + Sync>;

/// Tolerance on `‖X(0) − X(T)‖_F` relative to `max(1, ‖X(0)‖_F)`.
pub const PERIODICITY_TOL: f64 = 1e-10;

/// Upper/lower branch of a two-level pair (`±` in the closed forms).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

/// A Hermitian-matrix-valued function of time (or of an external
/// parameter) with a declared period.
#[derive(Clone)]
pub struct OperatorFamily {
    dim: usize,
    period: f64,
    sampler: MatrixSampler,
}

impl OperatorFamily {
    /// Wraps a sampler, checking Hermiticity at `t = 0` and the periodic
    /// condition `X(0) = X(T)`.
    pub fn new(period: f64, sampler: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Result<Self> {
        Self::build(period, sampler, true)
    }

    /// A family over `[0, span]` that need not return to its start, for
    /// diagnosing operators that are not invariants.
    pub fn aperiodic(span: f64, sampler: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Result<Self> {
        Self::build(span, sampler, false)
    }

    fn build(
        period: f64,
        sampler: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        periodic: bool,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter {
                field: "period",
                reason: format!("must be positive and finite, got {period}"),
            });
        }
        let start = sampler(0.0);
        if !start.is_square() {
            return Err(Error::NotSquare {
                rows: start.rows(),
                cols: start.cols(),
            });
        }
        let scale = start.frobenius_norm();
        let violation = start.hermitian_defect();
        if violation > crate::linalg::HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian {
                violation,
                allowed: crate::linalg::HERMITIAN_TOL * scale,
            });
        }
        let end = sampler(period);
        if end.rows() != start.rows() || end.cols() != start.cols() {
            return Err(Error::DimensionMismatch {
                context: "operator family",
                expected: format!("{0}x{0}", start.rows()),
                found: format!("{}x{}", end.rows(), end.cols()),
            });
        }
        let defect = start.distance(&end);
        if periodic && defect > PERIODICITY_TOL * scale.max(1.0) {
            return Err(Error::NotPeriodic { defect });
        }
        Ok(Self {
            dim: start.rows(),
            period,
            sampler: Arc::new(sampler),
        })
    }

    /// Time-independent family.
    pub fn constant(matrix: ComplexMatrix, period: f64) -> Result<Self> {
        Self::new(period, move |_| matrix.clone())
    }

    pub fn sample(&self, t: f64) -> ComplexMatrix {
        (self.sampler)(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Same operator values, different declared period (e.g. a common
    /// multiple of several block periods).
    pub fn with_period(&self, period: f64) -> Result<Self> {
        let sampler = self.sampler.clone();
        Self::new(period, move |t| sampler(t))
    }
}

impl fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("dim", &self.dim)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

/// Closed-form values a model is expected to reproduce.
#[derive(Clone, Default)]
pub struct AnalyticReference {
    /// Named phases, reduced to `[0, 2π)`.
    pub phases: BTreeMap<String, f64>,
    /// Hermitian phase matrix, when the model has a degenerate eigenspace.
    pub phase_matrix: Option<ComplexMatrix>,
    /// Named closed-form frame samplers.
    pub frames: BTreeMap<String, FrameSampler>,
}

impl AnalyticReference {
    pub fn phase(&self, name: &str) -> Option<f64> {
        self.phases.get(name).copied()
    }

    pub fn frame(&self, name: &str) -> Option<FrameSampler> {
        self.frames.get(name).cloned()
    }
}

impl fmt::Debug for AnalyticReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticReference")
            .field("phases", &self.phases)
            .field("phase_matrix", &self.phase_matrix)
            .field("frames", &self.frames.keys().collect::<Vec<_>>())
            .finish()
    }
}
