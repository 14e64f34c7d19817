//! States spread over several angular-momentum blocks of the ring.
//!
//! A block `n` stores the two spinor amplitudes of `e^{inφ}|↑⟩` and
//! `e^{i(n+1)φ}|↓⟩`. Different blocks are orthogonal exactly, so inner
//! products and evolution never need a `φ` grid.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolution::{propagate, EvolveOptions, Trajectory};
use crate::linalg::{inner, C64};
use crate::models::OperatorFamily;

/// Sparse map from block index to its spinor amplitudes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RingState {
    pub blocks: BTreeMap<i64, [C64; 2]>,
}

impl RingState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `amplitude·spinor` to block `n`.
    pub fn with_block(mut self, n: i64, spinor: &[C64], amplitude: C64) -> Self {
        let entry = self.blocks.entry(n).or_insert([C64::new(0.0, 0.0); 2]);
        entry[0] += amplitude * spinor[0];
        entry[1] += amplitude * spinor[1];
        self
    }

    /// `‖block_n‖²`, zero for absent blocks.
    pub fn weight(&self, n: i64) -> f64 {
        self.blocks.get(&n).map_or(0.0, |b| b[0].norm_sqr() + b[1].norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.keys().map(|&n| self.weight(n)).sum()
    }
}

/// `Σ_n ⟨a_n|b_n⟩` over blocks present in both states.
pub fn ring_inner(a: &RingState, b: &RingState) -> C64 {
    a.blocks
        .iter()
        .filter_map(|(n, x)| b.blocks.get(n).map(|y| inner(x, y)))
        .sum()
}

/// Per-block trajectories on a shared time grid.
#[derive(Clone, Debug)]
pub struct BlockEvolution {
    pub blocks: BTreeMap<i64, Trajectory>,
}

impl BlockEvolution {
    /// Recorded times (shared by every block).
    pub fn times(&self) -> &[f64] {
        self.blocks.values().next().map_or(&[], |t| t.times())
    }

    /// The full state at the `k`-th recorded time.
    pub fn state(&self, k: usize) -> RingState {
        RingState {
            blocks: self
                .blocks
                .iter()
                .map(|(&n, traj)| {
                    let s = &traj.states()[k];
                    (n, [s[0], s[1]])
                })
                .collect(),
        }
    }

    /// Largest deviation of any block weight from its initial value.
    pub fn max_weight_drift(&self) -> f64 {
        let initial = self.state(0);
        (0..self.times().len())
            .map(|k| {
                let s = self.state(k);
                initial
                    .blocks
                    .keys()
                    .map(|&n| (s.weight(n) - initial.weight(n)).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Evolves every populated block independently under its own Hamiltonian,
/// all over the longest period among the populated blocks with `steps`
/// steps.
pub fn blockwise_evolve(
    h_blocks: &BTreeMap<i64, OperatorFamily>,
    psi: &RingState,
    steps: usize,
) -> Result<BlockEvolution> {
    if psi.blocks.is_empty() {
        return Err(Error::InvalidParameter {
            field: "psi",
            reason: "state has no blocks".into(),
        });
    }
    let mut duration: f64 = 0.0;
    for &n in psi.blocks.keys() {
        let h = h_blocks.get(&n).ok_or(Error::MissingBlock { n })?;
        duration = duration.max(h.period());
    }
    let options = EvolveOptions {
        duration: Some(duration),
        stride: 1,
    };
    let blocks = psi
        .blocks
        .iter()
        .map(|(&n, spinor)| Ok((n, propagate(&h_blocks[&n], spinor, steps, options)?)))
        .collect::<Result<_>>()?;
    Ok(BlockEvolution { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn inner_products_across_blocks() {
        let up = [c(1.0), c(0.0)];
        let a = RingState::new().with_block(0, &up, c(1.0));
        let b = RingState::new().with_block(1, &up, c(1.0));
        assert_eq!(ring_inner(&a, &a), c(1.0));
        assert_eq!(ring_inner(&a, &b), c(0.0));
        let s = 0.5f64.sqrt();
        let m = RingState::new().with_block(0, &up, c(s)).with_block(1, &up, c(s));
        assert!((ring_inner(&m, &m) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn missing_block_is_rejected() {
        let up = [c(1.0), c(0.0)];
        let psi = RingState::new().with_block(3, &up, c(1.0));
        let h = BTreeMap::from([(0, OperatorFamily::constant(pauli::sigma_z(), 1.0).unwrap())]);
        assert!(matches!(
            blockwise_evolve(&h, &psi, 8),
            Err(Error::MissingBlock { n: 3 })
        ));
    }

    #[test]
    fn single_block_matches_plain_evolution() {
        let h0 = OperatorFamily::constant(pauli::sigma_x(), 2.0).unwrap();
        let spinor = [c(0.6), C64::new(0.0, 0.8)];
        let psi = RingState::new().with_block(0, &spinor, c(1.0));
        let run = blockwise_evolve(&BTreeMap::from([(0, h0.clone())]), &psi, 64).unwrap();
        let plain = crate::evolution::evolve(&h0, &spinor, 64).unwrap();
        assert_eq!(run.blocks[&0].final_state(), plain.final_state());
    }
}
