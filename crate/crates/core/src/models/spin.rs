use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use crate::angle;
use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix, Frame, Ket, C64};

use super::{AnalyticReference, Branch, OperatorFamily};

/// Spin-½ in a static field along `z`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SpinModelParams {
    /// Larmor frequency `ω_s = 2μ_B B/ħ`.
    pub omega_s: f64,
    /// Superposition angle `θ ∈ [0, π/2]`.
    pub theta: f64,
}

impl SpinModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_s.is_finite() && self.omega_s > 0.0) {
            return Err(Error::InvalidParameter {
                field: "omega_s",
                reason: format!("must be positive, got {}", self.omega_s),
            });
        }
        if !(0.0..=FRAC_PI_2).contains(&self.theta) {
            return Err(Error::InvalidParameter {
                field: "theta",
                reason: format!("must lie in [0, pi/2], got {}", self.theta),
            });
        }
        Ok(())
    }
}

/// `H = (ω_s/2)σ_z` with its invariant
/// `I(t) = sin2θ cos(ω_s t)σ_x + sin2θ sin(ω_s t)σ_y + cos2θ σ_z`.
#[derive(Clone, Debug)]
pub struct SpinModel {
    pub params: SpinModelParams,
    pub hamiltonian: OperatorFamily,
    pub invariant: OperatorFamily,
    pub reference: AnalyticReference,
}

impl SpinModel {
    /// `T = 2π/ω_s`.
    pub fn period(&self) -> f64 {
        TAU / self.params.omega_s
    }

    /// Invariant eigenstate `|φ_±(t)⟩` in the `(|ξ_+⟩, |ξ_−⟩)` basis.
    pub fn phi(&self, branch: Branch, t: f64) -> Ket {
        phi(self.params, branch, t)
    }

    /// `|ψ_±(0)⟩ = ±cosθ|ξ_±⟩ + sinθ|ξ_∓⟩`.
    pub fn initial_state(&self, branch: Branch) -> Ket {
        self.phi(branch, 0.0)
    }
}

fn phi(p: SpinModelParams, branch: Branch, t: f64) -> Ket {
    let (s, c) = p.theta.sin_cos();
    let w = p.omega_s * t;
    match branch {
        Branch::Plus => vec![C64::new(c, 0.0), C64::from_polar(s, w)],
        Branch::Minus => vec![C64::from_polar(s, -w), C64::new(-c, 0.0)],
    }
}

pub fn spin_half(params: SpinModelParams) -> Result<SpinModel> {
    params.validate()?;
    let period = TAU / params.omega_s;
    let hamiltonian = OperatorFamily::constant(pauli::sigma_z().scale_real(params.omega_s / 2.0), period)?;

    let (s2, c2) = (2.0 * params.theta).sin_cos();
    let invariant = OperatorFamily::new(period, move |t| {
        let (sw, cw) = (params.omega_s * t).sin_cos();
        let x = pauli::sigma_x().scale_real(s2 * cw);
        let y = pauli::sigma_y().scale_real(s2 * sw);
        let z = pauli::sigma_z().scale_real(c2);
        &(&x + &y) + &z
    })?;

    let mut reference = AnalyticReference::default();
    for b in Branch::BOTH {
        reference
            .phases
            .insert(format!("gamma{}", b.suffix()), angle::wrap(PI * (1.0 + b.sign() * c2)));
        reference.frames.insert(
            format!("phi{}", b.suffix()),
            Arc::new(move |t| Frame::new_unchecked(ComplexMatrix::from_columns(&[phi(params, b, t)]))),
        );
    }

    Ok(SpinModel {
        params,
        hamiltonian,
        invariant,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, inner, norm};

    fn model(theta: f64) -> SpinModel {
        spin_half(SpinModelParams { omega_s: 1.3, theta }).unwrap()
    }

    #[test]
    fn closed_form_phases() {
        let m = model(PI / 4.0);
        assert!((m.reference.phase("gamma+").unwrap() - PI).abs() < 1e-15);
        assert!((m.reference.phase("gamma-").unwrap() - PI).abs() < 1e-15);

        let m = model(0.0);
        // γ_+ = 2π ≡ 0
        assert!(angle::circular_distance(m.reference.phase("gamma+").unwrap(), 0.0) < 1e-15);
        assert_eq!(m.reference.phase("gamma-").unwrap(), 0.0);
        let i0 = m.invariant.sample(0.0);
        let i1 = m.invariant.sample(2.1);
        assert!(i0.max_abs_diff(&pauli::sigma_z()) < 1e-15);
        assert!(i1.max_abs_diff(&pauli::sigma_z()) < 1e-15);

        let m = model(PI / 6.0);
        assert!((m.reference.phase("gamma+").unwrap() - 1.5 * PI).abs() < 1e-14);
        assert!((m.reference.phase("gamma-").unwrap() - 0.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn invariant_eigenpairs_match_phi() {
        let m = model(PI / 6.0);
        for k in 0..50 {
            let t = m.period() * k as f64 / 50.0;
            let e = eigh(&m.invariant.sample(t)).unwrap();
            assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
            // |⟨φ_+|v_+⟩| = 1 and |⟨φ_−|v_−⟩| = 1
            let plus = m.phi(Branch::Plus, t);
            let minus = m.phi(Branch::Minus, t);
            assert!((inner(&plus, &e.vectors.column(1)).norm() - 1.0).abs() < 1e-12);
            assert!((inner(&minus, &e.vectors.column(0)).norm() - 1.0).abs() < 1e-12);
            assert!((norm(&plus) - 1.0).abs() < 1e-15);
            assert!(inner(&plus, &minus).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(spin_half(SpinModelParams {
            omega_s: 0.0,
            theta: 0.1
        })
        .is_err());
        assert!(spin_half(SpinModelParams {
            omega_s: 1.0,
            theta: 2.0
        })
        .is_err());
        assert!(spin_half(SpinModelParams {
            omega_s: 1.0,
            theta: -0.1
        })
        .is_err());
    }
}
