use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use geophase::angle::circular_distance;
use geophase::evolution::{aa_phase, evolve_with, EvolveOptions};
use geophase::linalg::C64;
use geophase::models::{ring_static, Branch, RingModelParams};
use geophase::ring_state::{blockwise_evolve, ring_inner, RingState};

fn half() -> C64 {
    C64::new(FRAC_1_SQRT_2, 0.0)
}

#[test]
fn superposition_of_two_blocks_is_normalized() {
    let blocks = ring_static(&RingModelParams::default()).unwrap();
    let psi = RingState::new()
        .with_block(0, &blocks[0].spinor_state(Branch::Plus), half())
        .with_block(1, &blocks[1].spinor_state(Branch::Plus), half());
    assert!((ring_inner(&psi, &psi) - C64::new(1.0, 0.0)).norm() < 1e-15);
    assert!((psi.weight(0) - 0.5).abs() < 1e-15);
    assert_eq!(psi.weight(7), 0.0);
}

#[test]
fn blocks_evolve_independently() {
    let p = RingModelParams {
        n_levels: vec![0, 2],
        theta_n: vec![PI / 6.0],
        ..Default::default()
    };
    let blocks = ring_static(&p).unwrap();
    let h: BTreeMap<i64, _> = blocks.iter().map(|b| (b.n, b.spinor_hamiltonian().unwrap())).collect();
    let psi = RingState::new()
        .with_block(0, &blocks[0].spinor_state(Branch::Minus), half())
        .with_block(2, &blocks[1].spinor_state(Branch::Plus), half());
    let run = blockwise_evolve(&h, &psi, 2048).unwrap();
    assert!(run.max_weight_drift() < 1e-10);
    for k in (0..run.times().len()).step_by(256) {
        assert!((run.state(k).norm_sqr() - 1.0).abs() < 1e-10);
    }

    // per-block phases equal the single-block runs over the same span
    let span = blocks[0].period();
    for (block, b) in blocks.iter().zip([Branch::Minus, Branch::Plus]) {
        let single = evolve_with(
            &h[&block.n],
            &block.spinor_state(b),
            2048,
            EvolveOptions {
                duration: Some(span),
                stride: 2048,
            },
        )
        .unwrap();
        let inside = aa_phase(&run.blocks[&block.n]).unwrap();
        assert!(circular_distance(inside.geometric, aa_phase(&single).unwrap().geometric) < 1e-6);
        assert!((inside.dynamic - aa_phase(&single).unwrap().dynamic).abs() < 1e-9);
    }
}
