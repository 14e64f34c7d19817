//! Electron on a ring in a crown-shaped electric field.
//!
//! The ring Hilbert space splits into angular-momentum blocks: block `n`
//! holds spinors whose upper component carries `e^{inφ}` and whose lower
//! component carries `e^{i(n+1)φ}`. Blocks never mix, so each is handled as
//! an exact 2×2 problem and the `φ`-dependence is kept analytic.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::action::{TorusGrid, TorusState};
use crate::angle;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Frame, Ket, C64};

use super::{AnalyticReference, Branch, FrameSampler, OperatorFamily};

/// Parameters shared by the static, rotating and action-operator ring models.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RingModelParams {
    /// `ε = μ_B E a/ħ`.
    pub epsilon: f64,
    /// Field tilt `χ`.
    pub chi: f64,
    /// `Ω = ħ/2ma²`.
    pub omega: f64,
    /// Angular-momentum indices `n ≥ 0` to build blocks for.
    pub n_levels: Vec<i64>,
    /// Mixing angles `θ_n`: one shared value or one per level.
    pub theta_n: Vec<f64>,
    /// Field rotation frequency; zero for the static model.
    pub omega_o: f64,
    /// Invariant eigenvalue offsets `I_n`; defaults to `4n`.
    pub offsets: Option<Vec<f64>>,
}

impl Default for RingModelParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            chi: PI / 3.0,
            omega: 1.0,
            n_levels: vec![0, 1, 2],
            theta_n: vec![PI / 3.0],
            omega_o: 0.0,
            offsets: None,
        }
    }
}

impl RingModelParams {
    /// `Δ = ε cosχ`.
    pub fn delta(&self) -> f64 {
        self.epsilon * self.chi.cos()
    }

    /// `g = 1 − ε sinχ`.
    pub fn g(&self) -> f64 {
        1.0 - self.epsilon * self.chi.sin()
    }

    /// `√(Δ² + g²)`.
    pub fn radius(&self) -> f64 {
        self.delta().hypot(self.g())
    }

    /// `Θ = ½·atan2(Δ, g)`, so `2Θ ∈ (−π, π]`.
    pub fn mixing_angle(&self) -> f64 {
        0.5 * self.delta().atan2(self.g())
    }

    /// Precession frequency `Ω_ns = Ω(n + ½)√(Δ² + g²)`.
    pub fn omega_ns(&self, n: i64) -> f64 {
        self.omega * (n as f64 + 0.5) * self.radius()
    }

    pub fn theta_for(&self, index: usize) -> f64 {
        if self.theta_n.len() == 1 {
            self.theta_n[0]
        } else {
            self.theta_n[index]
        }
    }

    pub fn offset_for(&self, index: usize) -> f64 {
        match &self.offsets {
            Some(o) => o[index],
            None => 4.0 * self.n_levels[index] as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("epsilon", self.epsilon), ("chi", self.chi), ("omega_o", self.omega_o)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter {
                field: "omega",
                reason: format!("must be positive, got {}", self.omega),
            });
        }
        if self.n_levels.is_empty() {
            return Err(Error::InvalidParameter {
                field: "n_levels",
                reason: "at least one level is required".into(),
            });
        }
        if let Some(&n) = self.n_levels.iter().find(|&&n| n < 0) {
            return Err(Error::InvalidParameter {
                field: "n_levels",
                reason: format!("indices must be non-negative, got {n}"),
            });
        }
        let mut sorted = self.n_levels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.n_levels.len() {
            return Err(Error::InvalidParameter {
                field: "n_levels",
                reason: "indices must be distinct".into(),
            });
        }
        if !(self.theta_n.len() == 1 || self.theta_n.len() == self.n_levels.len()) {
            return Err(Error::InvalidParameter {
                field: "theta_n",
                reason: format!(
                    "expected 1 or {} values, got {}",
                    self.n_levels.len(),
                    self.theta_n.len()
                ),
            });
        }
        if self.theta_n.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "theta_n",
                reason: "must be finite".into(),
            });
        }
        if let Some(o) = &self.offsets {
            if o.len() != self.n_levels.len() || o.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter {
                    field: "offsets",
                    reason: format!("expected {} finite values", self.n_levels.len()),
                });
            }
        }
        let mut levels: Vec<f64> = (0..self.n_levels.len())
            .flat_map(|i| [self.offset_for(i) - 1.0, self.offset_for(i) + 1.0])
            .collect();
        levels.sort_by(f64::total_cmp);
        if levels.windows(2).any(|w| (w[1] - w[0]).abs() <= 1e-8) {
            return Err(Error::InvalidParameter {
                field: "offsets",
                reason: "invariant eigenvalues I_n ± 1 must be distinct across levels".into(),
            });
        }
        let magnitude = self.delta().powi(2) + self.g().powi(2);
        if magnitude <= 1e-12 {
            return Err(Error::DegenerateMixingAngle { magnitude });
        }
        Ok(())
    }

    /// `M(ϑ) = [[g, Δe^{iϑ}], [Δe^{−iϑ}, −g]]`, so that the spin part of
    /// the kinetic operator in block `n` is `(n + ½) − M(ϑ)/2`.
    fn field_matrix(&self, vartheta: f64) -> ComplexMatrix {
        let (d, g) = (self.delta(), self.g());
        let z = C64::from_polar(d, vartheta);
        ComplexMatrix::from_rows(&[&[C64::new(g, 0.0), z], &[z.conj(), C64::new(-g, 0.0)]])
    }

    /// Block `n` of `Â(ϑ) = −i∂_φ + ŝ_{φ−ϑ}`.
    fn action_block(&self, n: i64, vartheta: f64) -> ComplexMatrix {
        let shift = ComplexMatrix::identity(2).scale_real(n as f64 + 0.5);
        &shift - &self.field_matrix(vartheta).scale_real(0.5)
    }

    /// Block `n` of `Ĥ(ϑ) = Ω·Â(ϑ)²`, written out with `M² = (Δ² + g²)·1`.
    fn hamiltonian_block(&self, n: i64, vartheta: f64) -> ComplexMatrix {
        let k = n as f64 + 0.5;
        let r2 = self.radius().powi(2);
        let scalar = ComplexMatrix::identity(2).scale_real(k * k + r2 / 4.0);
        (&scalar - &self.field_matrix(vartheta).scale_real(k)).scale_real(self.omega)
    }

    /// Spinor components of `ξ'_{n±}` at field angle `ϑ`
    /// (the `e^{inφ}` / `e^{i(n+1)φ}` factors stripped).
    fn rotated_spinor(&self, branch: Branch, vartheta: f64) -> Ket {
        let (s, c) = self.mixing_angle().sin_cos();
        let tail = C64::from_polar(1.0, -vartheta);
        match branch {
            Branch::Plus => vec![C64::new(c, 0.0), tail * s],
            Branch::Minus => vec![C64::new(-s, 0.0), tail * c],
        }
    }

    fn rotated_frame(&self, vartheta: f64) -> Frame {
        Frame::new_unchecked(ComplexMatrix::from_columns(&[
            self.rotated_spinor(Branch::Plus, vartheta),
            self.rotated_spinor(Branch::Minus, vartheta),
        ]))
    }

    /// Closed-form non-Abelian phase matrix for a loop of the rotating field,
    /// `2π·[[sin²Θ, sinΘcosΘ], [sinΘcosΘ, cos²Θ]]`.
    pub fn rotating_phase_matrix(&self) -> ComplexMatrix {
        let two_theta = 2.0 * self.mixing_angle();
        let (s, c) = two_theta.sin_cos();
        let m = |x: f64| C64::new(PI * x, 0.0);
        ComplexMatrix::from_rows(&[&[m(1.0 - c), m(s)], &[m(s), m(1.0 + c)]])
    }
}

// ---------------------------------------------------------------------------
// Static field

/// One angular-momentum block of the static ring, in the energy basis
/// `(|ξ_{n+}⟩, |ξ_{n−}⟩)`.
#[derive(Clone, Debug)]
pub struct RingStaticBlock {
    pub n: i64,
    pub omega_ns: f64,
    pub theta: f64,
    pub offset: f64,
    pub mixing_angle: f64,
    pub hamiltonian: OperatorFamily,
    pub invariant: OperatorFamily,
    pub reference: AnalyticReference,
}

impl RingStaticBlock {
    /// `T_n = 2π/Ω_ns`.
    pub fn period(&self) -> f64 {
        TAU / self.omega_ns
    }

    /// Invariant eigenstate `|φ_{n±}(t)⟩` in the energy basis.
    pub fn phi(&self, branch: Branch, t: f64) -> Ket {
        static_phi(self.theta, self.omega_ns, branch, t)
    }

    pub fn initial_state(&self, branch: Branch) -> Ket {
        self.phi(branch, 0.0)
    }

    /// `|ξ_{n+}⟩` and `|ξ_{n−}⟩` as spinor-component columns.
    pub fn energy_spinors(&self) -> Frame {
        let (s, c) = self.mixing_angle.sin_cos();
        Frame::new_unchecked(ComplexMatrix::from_rows(&[
            &[C64::new(c, 0.0), C64::new(-s, 0.0)],
            &[C64::new(s, 0.0), C64::new(c, 0.0)],
        ]))
    }

    /// The block Hamiltonian in spinor components, `X·H·X†` with `X` the
    /// matrix of [`energy_spinors`](Self::energy_spinors).
    pub fn spinor_hamiltonian(&self) -> Result<OperatorFamily> {
        let x = self.energy_spinors().into_matrix();
        let h = self.hamiltonian.sample(0.0);
        let rotated = (&(&x * &h) * &x.adjoint()).hermitian_part();
        OperatorFamily::constant(rotated, self.period())
    }

    /// `X·φ_{n±}(0)`: the initial invariant eigenstate in spinor components.
    pub fn spinor_state(&self, branch: Branch) -> Ket {
        self.energy_spinors().matrix().apply(&self.initial_state(branch))
    }
}

fn static_phi(theta: f64, omega_ns: f64, branch: Branch, t: f64) -> Ket {
    let (s, c) = theta.sin_cos();
    let w = omega_ns * t;
    match branch {
        Branch::Plus => vec![C64::new(c, 0.0), C64::from_polar(s, w)],
        Branch::Minus => vec![C64::from_polar(s, -w), C64::new(-c, 0.0)],
    }
}

/// Static-field ring, one block per requested `n`.
///
/// `H_n = diag(ē_n + Ω_ns/2, ē_n − Ω_ns/2)` with `ē_n = Ω((n+½)² + (Δ²+g²)/4)`,
/// and `I_n(t) = (I_n + 1)|φ_{n+}⟩⟨φ_{n+}| + (I_n − 1)|φ_{n−}⟩⟨φ_{n−}|`.
/// `omega_o` is ignored.
pub fn ring_static(params: &RingModelParams) -> Result<Vec<RingStaticBlock>> {
    params.validate()?;
    let r2 = params.radius().powi(2);
    params
        .n_levels
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let omega_ns = params.omega_ns(n);
            let theta = params.theta_for(i);
            let offset = params.offset_for(i);
            let period = TAU / omega_ns;
            let k = n as f64 + 0.5;
            let mean = params.omega * (k * k + r2 / 4.0);
            let hamiltonian = OperatorFamily::constant(
                ComplexMatrix::from_real_diagonal(&[mean + omega_ns / 2.0, mean - omega_ns / 2.0]),
                period,
            )?;
            let invariant = OperatorFamily::new(period, move |t| {
                let plus = ComplexMatrix::from_columns(&[static_phi(theta, omega_ns, Branch::Plus, t)]);
                let minus = ComplexMatrix::from_columns(&[static_phi(theta, omega_ns, Branch::Minus, t)]);
                let pp = (&plus * &plus.adjoint()).scale_real(offset + 1.0);
                let pm = (&minus * &minus.adjoint()).scale_real(offset - 1.0);
                (&pp + &pm).hermitian_part()
            })?;
            let mut reference = AnalyticReference::default();
            for b in Branch::BOTH {
                reference.phases.insert(
                    format!("gamma{}", b.suffix()),
                    angle::wrap(PI * (1.0 + b.sign() * (2.0 * theta).cos())),
                );
                reference.frames.insert(
                    format!("phi{}", b.suffix()),
                    Arc::new(move |t| {
                        Frame::new_unchecked(ComplexMatrix::from_columns(&[static_phi(theta, omega_ns, b, t)]))
                    }) as FrameSampler,
                );
            }
            Ok(RingStaticBlock {
                n,
                omega_ns,
                theta,
                offset,
                mixing_angle: params.mixing_angle(),
                hamiltonian,
                invariant,
                reference,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rotating field

/// One block of the ring in a field rotating at `ω_o`, in spinor components.
#[derive(Clone)]
pub struct RingRotatingBlock {
    pub n: i64,
    pub omega_ns: f64,
    pub omega_o: f64,
    pub hamiltonian: OperatorFamily,
    /// `Ĵ = −i∂_φ + σ_z/2` restricted to the block: `(n + ½)·1`.
    pub invariant: OperatorFamily,
    /// `t ↦ (|ξ'_{n+}(t)⟩, |ξ'_{n−}(t)⟩)`.
    pub frames: FrameSampler,
    pub reference: AnalyticReference,
}

impl std::fmt::Debug for RingRotatingBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RingRotatingBlock")
            .field("n", &self.n)
            .field("omega_ns", &self.omega_ns)
            .field("omega_o", &self.omega_o)
            .field("hamiltonian", &self.hamiltonian)
            .field("invariant", &self.invariant)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

impl RingRotatingBlock {
    /// `T = 2π/|ω_o|`.
    pub fn period(&self) -> f64 {
        TAU / self.omega_o.abs()
    }

    /// Adiabatic eigenstate `|ξ'_{n±}(t)⟩` of the instantaneous Hamiltonian.
    pub fn adiabatic_state(&self, branch: Branch, t: f64) -> Ket {
        self.frames.as_ref()(t).column(match branch {
            Branch::Plus => 0,
            Branch::Minus => 1,
        })
    }
}

/// Ring in a rotating field; the invariant `Ĵ` is doubly degenerate in every block.
///
/// The reference phase matrix is `sgn(ω_o)·2π·P` with `P` the projector onto
/// the lower spinor component expressed in the `ξ'` frame.
pub fn ring_rotating(params: &RingModelParams) -> Result<Vec<RingRotatingBlock>> {
    params.validate()?;
    if params.omega_o == 0.0 {
        return Err(Error::StaticFieldMisuse);
    }
    let period = TAU / params.omega_o.abs();
    let omega_o = params.omega_o;
    let gamma = params.rotating_phase_matrix().scale_real(omega_o.signum());
    params
        .n_levels
        .iter()
        .map(|&n| {
            let p = params.clone();
            let hamiltonian = OperatorFamily::new(period, move |t| p.hamiltonian_block(n, omega_o * t))?;
            let invariant = OperatorFamily::constant(ComplexMatrix::identity(2).scale_real(n as f64 + 0.5), period)?;
            let p = params.clone();
            let frames: FrameSampler = Arc::new(move |t| p.rotated_frame(omega_o * t));
            let mut reference = AnalyticReference {
                phase_matrix: Some(gamma.clone()),
                ..Default::default()
            };
            reference.frames.insert("xi'".into(), frames.clone());
            Ok(RingRotatingBlock {
                n,
                omega_ns: params.omega_ns(n),
                omega_o,
                hamiltonian,
                invariant,
                frames,
                reference,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Action operator

/// Block `n` of the action operator `Â(ϑ) = −i∂_φ + ŝ_{φ−ϑ}` over the loop
/// `ϑ ∈ [0, 2π]`.
#[derive(Clone, Debug)]
pub struct RingActionBlock {
    pub n: i64,
    pub action: OperatorFamily,
    pub reference: AnalyticReference,
    params: RingModelParams,
}

impl RingActionBlock {
    /// Eigenvalues `n + (1 ∓ √(Δ² + g²))/2` of `ξ'_{n±}`.
    pub fn eigenvalue(&self, branch: Branch) -> f64 {
        self.n as f64 + 0.5 * (1.0 - branch.sign() * self.params.radius())
    }

    /// Spinor components of `ξ'_{n±}(ϑ)`.
    pub fn spinor(&self, branch: Branch, vartheta: f64) -> Ket {
        self.params.rotated_spinor(branch, vartheta)
    }

    /// `ξ'_{n±}(ϑ, φ)` sampled on a uniform grid of `points` angles.
    pub fn eigenfunction(&self, branch: Branch, vartheta: f64, points: usize) -> TorusState {
        let spinor = self.spinor(branch, vartheta);
        let n = self.n as f64;
        let grid = TorusGrid::new(1, points);
        TorusState::from_fn(grid, 2, |angles| {
            let phi = angles[0];
            vec![
                spinor[0] * C64::from_polar(1.0, n * phi),
                spinor[1] * C64::from_polar(1.0, (n + 1.0) * phi),
            ]
        })
    }
}

/// Adiabatic action operator of the slowly rotating ring.
///
/// Reference phases follow `γ_{n±} = π(1 ∓ cos2Θ)`.
pub fn ring_action(params: &RingModelParams) -> Result<Vec<RingActionBlock>> {
    params.validate()?;
    let cos2 = (2.0 * params.mixing_angle()).cos();
    params
        .n_levels
        .iter()
        .map(|&n| {
            let p = params.clone();
            let action = OperatorFamily::new(TAU, move |vt| p.action_block(n, vt))?;
            let mut reference = AnalyticReference::default();
            for b in Branch::BOTH {
                reference.phases.insert(
                    format!("gamma{}", b.suffix()),
                    angle::wrap(PI * (1.0 - b.sign() * cos2)),
                );
                let p = params.clone();
                reference.frames.insert(
                    format!("xi'{}", b.suffix()),
                    Arc::new(move |vt| Frame::new_unchecked(ComplexMatrix::from_columns(&[p.rotated_spinor(b, vt)])))
                        as FrameSampler,
                );
            }
            Ok(RingActionBlock {
                n,
                action,
                reference,
                params: params.clone(),
            })
        })
        .collect()
}
