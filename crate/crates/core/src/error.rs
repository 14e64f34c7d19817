use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: ||M - M^dag||_F = {violation:.3e} (allowed {allowed:.3e})")]
    NotHermitian { violation: f64, allowed: f64 },

    #[error("matrix is not skew-Hermitian: ||A + A^dag||_F = {violation:.3e} (allowed {allowed:.3e})")]
    NotSkewHermitian { violation: f64, allowed: f64 },

    #[error("matrix is not unitary: ||U^dag U - I||_F = {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("frame columns are not orthonormal: ||F^dag F - I||_F = {defect:.3e}")]
    NotOrthonormal { defect: f64 },

    #[error("eigenvalue {eigenvalue} lies on the branch cut of the principal logarithm")]
    BranchCut { eigenvalue: Complex64 },

    #[error("matrix is rank deficient: smallest singular value {smallest_singular_value:.3e}")]
    RankDeficient { smallest_singular_value: f64 },

    #[error("state is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("mixing angle undefined: Delta^2 + g^2 = {magnitude:.3e} (epsilon = 1, chi = pi/2 is singular)")]
    DegenerateMixingAngle { magnitude: f64 },

    #[error("rotating-field model requested with omega_o = 0; use the static ring model instead")]
    StaticFieldMisuse,

    #[error("operator family is not periodic: ||X(0) - X(T)||_F = {defect:.3e}")]
    NotPeriodic { defect: f64 },

    #[error("evolution is not cyclic: 1 - |<psi(0)|psi(T)>| = {defect:.3e} (threshold {threshold:.3e})")]
    NotCyclic { defect: f64, threshold: f64 },

    #[error("loop grid too coarse at interval {interval}: {detail}")]
    GridTooCoarse { interval: usize, detail: String },

    #[error("eigenspace rank changed along the loop at sample {sample}: expected {expected}, found {found}")]
    DegeneracySplit {
        sample: usize,
        expected: usize,
        found: usize,
    },

    #[error("eigenvalue tracking is ambiguous at t = {time}: {detail}")]
    TrackingAmbiguity { time: f64, detail: String },

    #[error("level index {level} out of range ({groups} eigenvalue groups)")]
    LevelOutOfRange { level: usize, groups: usize },

    #[error("operation requires a single-state frame (N = 1), found N = {found}")]
    NotAbelian { found: usize },

    #[error("gauge transformation rejected: {0}")]
    InvalidGauge(String),

    #[error("no Hamiltonian supplied for block n = {n}")]
    MissingBlock { n: i64 },

    #[error("torus grids do not match: {0}")]
    GridMismatch(String),

    #[error("normalization drift {drift:.3e} at parameter sample {sample}")]
    NormalizationDrift { sample: usize, drift: f64 },

    #[error("phase estimators disagree: {first} vs {second}")]
    InconsistentEstimators { first: f64, second: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
