//! Discrete connections, phase matrices and Wilson loops over closed loops
//! of frames.
//!
//! A loop is sampled at `s_0 < s_1 < … < s_M` with `s_M` identified with
//! `s_0`. Interval `k` contributes the overlap `O_k = F(s_k)†F(s_{k+1})`;
//! its unitary part has a logarithm `ω_k` (skew-Hermitian), the discrete
//! connection. The phase matrix is `Γ = i·Σω_k` and the holonomy is the
//! unitary part of the ordered product `O_0·O_1·…·O_{M−1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angle;
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, group_degenerate, matrix_log_unitary, overlap_matrix, polar_unitary, smallest_singular_value, unitary_eigen,
    unitary_exp, ComplexMatrix, Frame, C64, DEGENERACY_TOL, SINGULAR_TOL,
};
use crate::models::{FrameSampler, OperatorFamily};

/// Loop samples used when the caller has no preference.
pub const DEFAULT_LOOP_POINTS: usize = 4096;
/// Consecutive overlaps with a smaller singular value mean the grid is too coarse.
pub const MIN_OVERLAP_SINGULAR_VALUE: f64 = 0.5;
/// Allowed disagreement between the two Abelian phase estimators.
pub const ESTIMATOR_AGREEMENT: f64 = 1e-9;

/// `points + 1` uniform samples of `[0, period]`; the last closes the loop.
pub fn loop_grid(period: f64, points: usize) -> Vec<f64> {
    (0..=points).map(|k| period * k as f64 / points as f64).collect()
}

/// Where the frames along a loop come from.
#[derive(Clone)]
pub enum FrameSource {
    /// A closed-form frame sampler, used verbatim.
    ClosedForm(FrameSampler),
    /// Eigenvectors of one eigenvalue group of an operator family, groups
    /// counted in ascending eigenvalue order. The eigensolver fixes each
    /// vector's phase arbitrarily, so these frames are realigned.
    Eigenspace { family: OperatorFamily, level: usize },
}

impl std::fmt::Debug for FrameSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameSource::ClosedForm(_) => f.write_str("ClosedForm(..)"),
            FrameSource::Eigenspace { family, level } => f
                .debug_struct("Eigenspace")
                .field("family", family)
                .field("level", level)
                .finish(),
        }
    }
}

/// Frames along a closed loop.
#[derive(Clone, Debug)]
pub struct FramePath {
    grid: Vec<f64>,
    frames: Vec<Frame>,
    closure_defect: f64,
}

impl FramePath {
    /// Wraps frames as they are, after checking grid, ranks and overlaps.
    pub fn new(grid: Vec<f64>, frames: Vec<Frame>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: format!("a loop needs at least 3 samples, got {}", grid.len()),
            });
        }
        if grid.len() != frames.len() {
            return Err(Error::GridMismatch(format!(
                "{} grid points but {} frames",
                grid.len(),
                frames.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: "samples must be strictly increasing".into(),
            });
        }
        let (dim, count) = (frames[0].dim(), frames[0].count());
        for (k, f) in frames.iter().enumerate() {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "frame path",
                    expected: dim.to_string(),
                    found: f.dim().to_string(),
                });
            }
            if f.count() != count {
                return Err(Error::DegeneracySplit {
                    sample: k,
                    expected: count,
                    found: f.count(),
                });
            }
        }
        for (k, pair) in frames.windows(2).enumerate() {
            let sigma = smallest_singular_value(&overlap_matrix(&pair[0], &pair[1])?);
            if sigma <= MIN_OVERLAP_SINGULAR_VALUE {
                return Err(Error::GridTooCoarse {
                    interval: k,
                    detail: format!("smallest singular value of the overlap is {sigma:.3e}"),
                });
            }
        }
        let closure_defect = frames[0].distance(&frames[frames.len() - 1]);
        Ok(Self {
            grid,
            frames,
            closure_defect,
        })
    }

    /// Realigns frames of arbitrary gauge into the parallel-transport gauge:
    /// each frame is rotated so that its overlap with the previous one is
    /// Hermitian positive. The last frame is replaced by the first, which
    /// must span the same subspace.
    pub fn aligned(grid: Vec<f64>, mut frames: Vec<Frame>) -> Result<Self> {
        let m = frames.len();
        if m < 3 {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: format!("a loop needs at least 3 samples, got {m}"),
            });
        }
        let first = frames[0].clone();
        let last = &frames[m - 1];
        if last.count() == first.count() && last.dim() == first.dim() {
            let gap = first.projector().distance(&last.projector());
            if gap > 1e-8 {
                return Err(Error::NotPeriodic { defect: gap });
            }
        }
        for k in 1..m - 1 {
            if frames[k].count() != frames[k - 1].count() {
                return Err(Error::DegeneracySplit {
                    sample: k,
                    expected: frames[k - 1].count(),
                    found: frames[k].count(),
                });
            }
            let o = overlap_matrix(&frames[k], &frames[k - 1])?;
            let sigma = smallest_singular_value(&o);
            if sigma <= MIN_OVERLAP_SINGULAR_VALUE {
                return Err(Error::GridTooCoarse {
                    interval: k - 1,
                    detail: format!("smallest singular value of the overlap is {sigma:.3e}"),
                });
            }
            let rotation = polar_unitary(&o)?;
            frames[k] = Frame::new_unchecked(frames[k].matrix() * &rotation);
        }
        frames[m - 1] = first;
        Self::new(grid, frames)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// `‖F(s_M) − F(s_0)‖_F`.
    pub fn closure_defect(&self) -> f64 {
        self.closure_defect
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.frames.len() - 1
    }

    /// Rank `N` of the frames.
    pub fn rank(&self) -> usize {
        self.frames[0].count()
    }

    /// Every other sample, when `M` is even.
    pub fn coarsened(&self) -> Option<Self> {
        if self.intervals() % 2 != 0 || self.intervals() < 4 {
            return None;
        }
        let grid = self.grid.iter().step_by(2).copied().collect();
        let frames = self.frames.iter().step_by(2).cloned().collect();
        Self::new(grid, frames).ok()
    }
}

/// Samples frames of `source` on `grid`.
pub fn sample_frames(source: &FrameSource, grid: &[f64]) -> Result<FramePath> {
    match source {
        FrameSource::ClosedForm(sampler) => FramePath::new(grid.to_vec(), grid.iter().map(|&s| sampler(s)).collect()),
        FrameSource::Eigenspace { family, level } => {
            let mut frames = Vec::with_capacity(grid.len());
            let mut expected = None;
            for (k, &s) in grid.iter().enumerate() {
                let e = eigh(&family.sample(s))?;
                let groups = group_degenerate(&e.values, DEGENERACY_TOL);
                let group = groups.get(*level).ok_or(Error::LevelOutOfRange {
                    level: *level,
                    groups: groups.len(),
                })?;
                let (count, width) = *expected.get_or_insert((groups.len(), group.len()));
                if groups.len() != count || group.len() != width {
                    return Err(Error::DegeneracySplit {
                        sample: k,
                        expected: width,
                        found: group.len(),
                    });
                }
                frames.push(e.subframe(group));
            }
            FramePath::aligned(grid.to_vec(), frames)
        }
    }
}

/// `ω_k`, the logarithm of the unitary part of each interval overlap.
pub fn connection_samples(path: &FramePath) -> Result<Vec<ComplexMatrix>> {
    path.frames
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let o = overlap_matrix(&pair[0], &pair[1])?;
            let u = polar_unitary(&o)?;
            matrix_log_unitary(&u)
                .map(|w| w.skew_hermitian_part())
                .map_err(|e| Error::GridTooCoarse {
                    interval: k,
                    detail: e.to_string(),
                })
        })
        .collect()
}

/// `Γ = i·Σ_k ω_k`.
pub fn phase_matrix(samples: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = samples.first().ok_or(Error::InvalidParameter {
        field: "samples",
        reason: "no connection samples".into(),
    })?;
    let mut sum = ComplexMatrix::zeros(first.rows(), first.cols());
    for w in samples {
        if w.rows() != sum.rows() || w.cols() != sum.cols() {
            return Err(Error::DimensionMismatch {
                context: "connection samples",
                expected: format!("{}x{}", sum.rows(), sum.cols()),
                found: format!("{}x{}", w.rows(), w.cols()),
            });
        }
        sum = &sum + w;
    }
    Ok(sum.scale(C64::new(0.0, 1.0)).hermitian_part())
}

/// Unitary part of `O_0·O_1·…·O_{M−1}`.
pub fn wilson_loop(path: &FramePath) -> Result<ComplexMatrix> {
    let n = path.rank();
    let mut product = ComplexMatrix::identity(n);
    for pair in path.frames.windows(2) {
        product = &product * &overlap_matrix(&pair[0], &pair[1])?;
    }
    let sigma = smallest_singular_value(&product);
    if sigma <= SINGULAR_TOL {
        return Err(Error::GridTooCoarse {
            interval: path.intervals(),
            detail: format!("cumulative overlap is singular ({sigma:.3e})"),
        });
    }
    polar_unitary(&product)
}

/// Eigenphases of a unitary, reduced to `[0, 2π)` and sorted.
pub fn eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut phases: Vec<f64> = unitary_eigen(u)?.phases.into_iter().map(angle::wrap).collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// Eigenvalues of a Hermitian phase matrix, ascending.
pub fn phase_matrix_eigenvalues(gamma: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigh(gamma)?.values)
}

/// `F'(s) = F(s)·g(s)` for per-sample unitaries with `g(s_M) = g(s_0)`.
pub fn gauge_transform(path: &FramePath, g: &[ComplexMatrix]) -> Result<FramePath> {
    if g.len() != path.frames.len() {
        return Err(Error::InvalidGauge(format!(
            "{} gauge samples for {} frames",
            g.len(),
            path.frames.len()
        )));
    }
    let mismatch = g[0].distance(&g[g.len() - 1]);
    if mismatch > 1e-10 {
        return Err(Error::InvalidGauge(format!(
            "g(s_M) differs from g(s_0) by {mismatch:.3e}"
        )));
    }
    let frames = path
        .frames
        .iter()
        .zip(g)
        .map(|(f, gk)| f.rotate(gk).map_err(|e| Error::InvalidGauge(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    FramePath::new(path.grid.clone(), frames)
}

/// A smooth end-matched gauge `g(s) = exp(i·Σ_m (a_m cos 2πmu + b_m sin 2πmu)·H_m)`
/// with `u` the loop fraction, random Hermitian `H_m` and coefficients,
/// modes `m = 0..=3`. Deterministic in `seed`.
pub fn random_smooth_gauge(grid: &[f64], rank: usize, seed: u64) -> Result<Vec<ComplexMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_hermitian = |rng: &mut ChaCha8Rng| {
        let m = ComplexMatrix::from_fn(rank, rank, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        m.hermitian_part()
    };
    let generators: Vec<(f64, f64, ComplexMatrix)> = (0..=3)
        .map(|_| {
            let a = rng.gen_range(-1.0..1.0);
            let b = rng.gen_range(-1.0..1.0);
            (a, b, random_hermitian(&mut rng))
        })
        .collect();
    let (start, span) = (grid[0], grid[grid.len() - 1] - grid[0]);
    let sample = |u: f64| {
        let mut a = ComplexMatrix::zeros(rank, rank);
        for (m, (ca, cb, h)) in generators.iter().enumerate() {
            let x = std::f64::consts::TAU * m as f64 * u;
            a = &a + &h.scale_real(ca * x.cos() + cb * x.sin());
        }
        unitary_exp(&a.scale(C64::new(0.0, 1.0)))
    };
    let mut g = grid
        .iter()
        .map(|&s| sample((s - start) / span))
        .collect::<Result<Vec<_>>>()?;
    // u = 0 and u = 1 agree analytically; make them bitwise equal
    let n = g.len();
    g[n - 1] = g[0].clone();
    Ok(g)
}

/// Abelian phase `i·Σω_k` in `[0, 2π)` of a rank-one path, cross-checked
/// against `−arg Π_k⟨φ_k|φ_{k+1}⟩`.
pub fn berry_phase(path: &FramePath) -> Result<f64> {
    if path.rank() != 1 {
        return Err(Error::NotAbelian { found: path.rank() });
    }
    let from_connection = angle::wrap(phase_matrix(&connection_samples(path)?)?[(0, 0)].re);
    let mut product = C64::new(1.0, 0.0);
    for pair in path.frames.windows(2) {
        product *= overlap_matrix(&pair[0], &pair[1])?[(0, 0)];
        // keep the running product from under- or overflowing
        product /= product.norm();
    }
    let from_product = angle::wrap(-product.arg());
    if angle::circular_distance(from_connection, from_product) > ESTIMATOR_AGREEMENT {
        return Err(Error::InconsistentEstimators {
            first: from_connection,
            second: from_product,
        });
    }
    Ok(from_connection)
}

/// Phase matrix and holonomy of one loop.
#[derive(Clone, Debug, Serialize)]
pub struct HolonomyReport {
    pub phase_matrix: ComplexMatrix,
    pub wilson_unitary: ComplexMatrix,
    /// `Γ` reduced to `[0, 2π)` for rank-one paths.
    pub abelian_phase: Option<f64>,
    pub grid_size: usize,
    /// `‖Γ_M − Γ_{M/2}‖_F/3` (circular distance for rank one), or `None`
    /// when the grid cannot be halved.
    pub convergence_estimate: Option<f64>,
}

pub fn holonomy(path: &FramePath) -> Result<HolonomyReport> {
    let gamma = phase_matrix(&connection_samples(path)?)?;
    let wilson_unitary = wilson_loop(path)?;
    let abelian_phase = match path.rank() {
        1 => Some(berry_phase(path)?),
        _ => None,
    };
    let convergence_estimate = match path.coarsened() {
        Some(coarse) => {
            let coarse_gamma = phase_matrix(&connection_samples(&coarse)?)?;
            Some(match path.rank() {
                1 => angle::circular_distance(gamma[(0, 0)].re, coarse_gamma[(0, 0)].re) / 3.0,
                _ => gamma.distance(&coarse_gamma) / 3.0,
            })
        }
        None => None,
    };
    Ok(HolonomyReport {
        phase_matrix: gamma,
        wilson_unitary,
        abelian_phase,
        grid_size: path.intervals(),
        convergence_estimate,
    })
}
