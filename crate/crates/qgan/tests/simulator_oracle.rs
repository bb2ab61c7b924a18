//! The statevector simulator against an independent dense-matrix oracle.

mod common;

use common::{dense_expect_z, dense_gate, dense_mul_vec, dense_run, random_angles};
use proptest::prelude::*;
use qgan::simulator::{CircuitTemplate, Gate, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_template(rng: &mut ChaCha8Rng, n: usize, gate_count: usize) -> CircuitTemplate {
    let mut t = CircuitTemplate::new(n);
    let mut slot = 0;
    for _ in 0..gate_count {
        if rng.random_range(0..2) == 0 || n < 2 {
            t.push_rotation(rng.random_range(0..n), slot).unwrap();
            slot += 1;
        } else {
            let control = rng.random_range(0..n);
            let mut target = rng.random_range(0..n);
            while target == control {
                target = rng.random_range(0..n);
            }
            t.push_controlled_not(control, target).unwrap();
        }
    }
    t
}

#[test]
fn random_circuits_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=5 {
        for _ in 0..30 {
            let template = random_template(&mut rng, n, 12);
            let params = random_angles(&mut rng, template.num_slots());
            let state = template.run(&params).unwrap();
            let oracle = dense_run(template.gates(), n, &params);
            let err = common::max_abs_diff(state.amplitudes(), &oracle);
            assert!(err < 1e-13, "n={n}: max deviation {err}");
        }
    }
}

#[test]
fn single_gates_match_their_dense_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=4 {
        let dim = 1usize << n;
        for _ in 0..20 {
            // random start state, one random gate
            let start = common::random_unit_vector(&mut rng, dim);
            let angle = common::random_angle(&mut rng);
            let target = rng.random_range(0..n);

            let mut sv = StateVector::from_amplitudes(start.clone()).unwrap();
            sv.apply_ry(target, angle).unwrap();
            let gate = Gate::RotationY { target, slot: 0 };
            let oracle = dense_mul_vec(&dense_gate(&gate, n, &[angle]), &start);
            assert!(common::max_abs_diff(sv.amplitudes(), &oracle) < 1e-14);

            if n >= 2 {
                let control = rng.random_range(0..n);
                let mut target = rng.random_range(0..n);
                while target == control {
                    target = rng.random_range(0..n);
                }
                let mut sv = StateVector::from_amplitudes(start.clone()).unwrap();
                sv.apply_cx(control, target).unwrap();
                let gate = Gate::ControlledNot { control, target };
                let oracle = dense_mul_vec(&dense_gate(&gate, n, &[]), &start);
                assert!(common::max_abs_diff(sv.amplitudes(), &oracle) < 1e-14);
            }
        }
    }
}

#[test]
fn expect_z_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in 1..=5 {
        let dim = 1usize << n;
        for _ in 0..40 {
            let v = common::random_unit_vector(&mut rng, dim);
            let sv = StateVector::from_amplitudes(v.clone()).unwrap();
            for q in 0..n {
                let got = sv.expect_z(q).unwrap();
                let want = dense_expect_z(&v, n, q);
                assert!((got - want).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn controlled_not_is_an_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=5 {
        let dim = 1usize << n;
        for _ in 0..20 {
            let v = common::random_unit_vector(&mut rng, dim);
            let mut sv = StateVector::from_amplitudes(v.clone()).unwrap();
            let control = rng.random_range(0..n);
            let mut target = rng.random_range(0..n);
            while target == control {
                target = rng.random_range(0..n);
            }
            sv.apply_cx(control, target).unwrap();
            sv.apply_cx(control, target).unwrap();
            assert_eq!(sv.amplitudes(), v.as_slice());
        }
    }
}

#[test]
fn zero_state_and_validation() {
    let sv = StateVector::<f64>::zero_state(3);
    assert_eq!(sv.num_qubits(), 3);
    assert_eq!(sv.amplitudes()[0], 1.0);
    assert!(sv.amplitudes()[1..].iter().all(|&a| a == 0.0));

    assert!(StateVector::from_amplitudes(vec![1.0, 0.0, 0.0]).is_err());
    assert!(StateVector::from_amplitudes(vec![0.7, 0.3]).is_err());
    assert!(StateVector::from_amplitudes(vec![1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_sequences_preserve_norm(
        seed in 0u64..1_000_000,
        n in 1usize..=5,
        gates in 1usize..=25,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let template = random_template(&mut rng, n, gates);
        let params = random_angles(&mut rng, template.num_slots());
        let state = template.run(&params).unwrap();
        prop_assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_on_each_qubit_matches_oracle(
        seed in 0u64..1_000_000,
        n in 1usize..=4,
        angle in -std::f64::consts::TAU..std::f64::consts::TAU,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1usize << n;
        let start = common::random_unit_vector(&mut rng, dim);
        for target in 0..n {
            let mut sv = StateVector::from_amplitudes(start.clone()).unwrap();
            sv.apply_ry(target, angle).unwrap();
            let gate = Gate::RotationY { target, slot: 0 };
            let oracle = dense_mul_vec(&dense_gate(&gate, n, &[angle]), &start);
            prop_assert!(common::max_abs_diff(sv.amplitudes(), &oracle) < 1e-13);
        }
    }
}
