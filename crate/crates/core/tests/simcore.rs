mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use proptest::prelude::*;
use qlab_core::obf::make_point_circuit;
use qlab_core::simcore::{
    channel_distance_estimate, fidelity, pauli_apply, phase_invariant_distance, run_circuit,
    sample_random_mixed_state, sample_random_state, trace_distance, trial_rng, BitString,
    CountingOracle, PauliString, QuantumCircuit, QuantumState, Unitary, C64,
};
use qlab_core::Error;

use common::{build_circuit, gate_specs};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn bell_circuit_matches_hand_computation() {
    let mut circ = QuantumCircuit::new(2);
    circ.h(0).unwrap().cx(0, 1).unwrap();
    let out = run_circuit(&circ, &QuantumState::zero(2).unwrap()).unwrap();

    let psi = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
    let amps = out.amplitudes().unwrap();
    for (i, &p) in psi.iter().enumerate() {
        assert!((amps[i] - c(p, 0.0)).norm() < 1e-12);
    }

    // Reduced state of wire 0: sum over the wire-1 index.
    let mut rho0 = DMatrix::<C64>::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                rho0[(i, j)] += c(psi[2 * i + k] * psi[2 * j + k], 0.0);
            }
        }
    }
    let reduced = out.partial_trace(&[0]).unwrap().density();
    assert!(max_abs_diff(&reduced, &rho0) < 1e-12);
    assert!(max_abs_diff(&rho0, &(DMatrix::identity(2, 2) * c(0.5, 0.0))) < 1e-15);
}

#[test]
fn partial_trace_examples() {
    let mut rng = trial_rng(1, 0);
    let rho = sample_random_mixed_state(2, 3, &mut rng).unwrap();
    let same = rho.partial_trace(&[0, 1]).unwrap();
    assert!(max_abs_diff(&same.density(), &rho.density()) < 1e-12);

    let prod = QuantumState::basis(&BitString::parse("01").unwrap()).unwrap();
    let r0 = prod.partial_trace(&[0]).unwrap();
    assert!(max_abs_diff(&r0.density(), &QuantumState::zero(1).unwrap().density()) < 1e-12);
    assert!(matches!(
        rho.partial_trace(&[2]),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn trace_distance_examples() {
    let zero = QuantumState::zero(1).unwrap();
    let one = QuantumState::basis(&BitString::parse("1").unwrap()).unwrap();
    let plus = QuantumState::plus();
    assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
    assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);

    // |0><0| - |+><+| = [[1/2, -1/2], [-1/2, -1/2]]; a traceless real
    // symmetric 2x2 [[a, b], [b, -a]] has eigenvalues ±sqrt(a² + b²).
    let (a, b) = (0.5f64, -0.5f64);
    let expect = (a * a + b * b).sqrt();
    assert!((trace_distance(&zero, &plus).unwrap() - expect).abs() < 1e-10);
    assert!((expect - FRAC_1_SQRT_2).abs() < 1e-15);

    assert!(matches!(
        trace_distance(&zero, &QuantumState::zero(2).unwrap()),
        Err(Error::DimensionMismatch(_) | Error::ArityMismatch { .. })
    ));
}

#[test]
fn phase_invariant_distance_examples() {
    let id = QuantumCircuit::identity(1);
    let mut z = QuantumCircuit::new(1);
    z.z(0).unwrap();
    assert!(phase_invariant_distance(&z, &z).unwrap().abs() < 1e-12);
    assert!((phase_invariant_distance(&z, &id).unwrap() - SQRT_2).abs() < 1e-10);

    let ph = C64::from_polar(1.0, PI / 7.0);
    let mut global = QuantumCircuit::new(1);
    global
        .custom(
            Unitary::new(1, vec![ph, c(0.0, 0.0), c(0.0, 0.0), ph]).unwrap(),
            &[0],
            &[],
        )
        .unwrap();
    assert!(phase_invariant_distance(&global, &id).unwrap() < 1e-10);

    let mut measured = QuantumCircuit::new(1);
    measured.measure(0).unwrap();
    assert!(matches!(
        phase_invariant_distance(&measured, &id),
        Err(Error::NotUnitary)
    ));
}

#[test]
fn channel_distance_examples() {
    let id = QuantumCircuit::identity(1);
    let mut x = QuantumCircuit::new(1);
    x.x(0).unwrap();
    let mut z = QuantumCircuit::new(1);
    z.z(0).unwrap();

    let same = channel_distance_estimate(&x, &x).unwrap();
    assert!(same.lower.abs() < 1e-12 && same.estimate.abs() < 1e-12);
    assert!((channel_distance_estimate(&x, &id).unwrap().estimate - 1.0).abs() < 1e-10);

    // Z ⊗ I on (|00> + |11>)/√2 gives (|00> - |11>)/√2, orthogonal to the input.
    let bell = QuantumState::from_amplitudes(vec![
        c(FRAC_1_SQRT_2, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(FRAC_1_SQRT_2, 0.0),
    ])
    .unwrap();
    let z_bell = QuantumState::from_amplitudes(vec![
        c(FRAC_1_SQRT_2, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(-FRAC_1_SQRT_2, 0.0),
    ])
    .unwrap();
    assert!((trace_distance(&bell, &z_bell).unwrap() - 1.0).abs() < 1e-12);
    let zd = channel_distance_estimate(&z, &id).unwrap();
    assert!((zd.estimate - 1.0).abs() < 1e-10);
    assert!((zd.lower - 1.0).abs() < 1e-10);

    assert!(matches!(
        channel_distance_estimate(&x, &QuantumCircuit::identity(2)),
        Err(Error::ArityMismatch { .. })
    ));
}

#[test]
fn pauli_examples() {
    let zero = QuantumState::zero(1).unwrap();
    let id = PauliString::identity(1);
    assert!(trace_distance(&pauli_apply(&id, &zero).unwrap(), &zero).unwrap() < 1e-12);

    let x = PauliString::new(BitString::parse("10").unwrap()).unwrap();
    let one = QuantumState::basis(&BitString::parse("1").unwrap()).unwrap();
    assert!(trace_distance(&pauli_apply(&x, &zero).unwrap(), &one).unwrap() < 1e-12);

    // Hand-written conjugations of |0><0| by I, X, Z and XZ.
    let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let xm = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let zm = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let paulis = [DMatrix::identity(2, 2), xm.clone(), zm.clone(), &xm * &zm];
    let mut hand = DMatrix::<C64>::zeros(2, 2);
    for p in &paulis {
        hand += p * &p0 * p.adjoint() * c(0.25, 0.0);
    }
    let mut sim = DMatrix::<C64>::zeros(2, 2);
    for r in PauliString::all(1) {
        sim += pauli_apply(&r, &zero).unwrap().density() * c(0.25, 0.0);
    }
    let half = DMatrix::identity(2, 2) * c(0.5, 0.0);
    assert!(max_abs_diff(&hand, &half) < 1e-15);
    assert!(max_abs_diff(&sim, &hand) < 1e-12);

    assert!(matches!(
        pauli_apply(&x, &QuantumState::zero(2).unwrap()),
        Err(Error::LengthMismatch { .. } | Error::ArityMismatch { .. })
    ));
}

#[test]
fn random_state_examples() {
    let a = sample_random_state(1, &mut trial_rng(9, 0)).unwrap();
    let b = sample_random_state(1, &mut trial_rng(9, 0)).unwrap();
    assert_eq!(a.amplitudes().unwrap(), b.amplitudes().unwrap());
    assert!((a.amplitudes().unwrap().norm() - 1.0).abs() < 1e-12);

    let other = sample_random_state(1, &mut trial_rng(10, 0)).unwrap();
    assert!(fidelity(&a, &other).unwrap() < 1.0);

    let mut rng = trial_rng(11, 0);
    let samples = 10_000;
    let mean: f64 = (0..samples)
        .map(|_| sample_random_state(3, &mut rng).unwrap().probabilities()[0])
        .sum::<f64>()
        / samples as f64;
    assert!((mean - 0.125).abs() < 0.01, "mean {mean}");

    assert!(matches!(
        sample_random_state(64, &mut rng),
        Err(Error::TooLarge { .. })
    ));
}

#[test]
fn oracle_examples() {
    let a = BitString::parse("101").unwrap();
    let b = BitString::parse("011").unwrap();
    let mut o = CountingOracle::new(make_point_circuit(&a, &b).unwrap());
    let input = QuantumState::basis(&a.concat(&BitString::zeros(3))).unwrap();
    let out = o.apply(&input).unwrap();
    let expect = QuantumState::basis(&a.concat(&b)).unwrap();
    assert!(fidelity(&out, &expect).unwrap() > 1.0 - 1e-12);
    assert_eq!(o.queries(), 1);
    for _ in 0..9 {
        o.apply(&input).unwrap();
    }
    assert_eq!(o.queries(), 10);
    assert!(!format!("{o:?}").contains("mcx"));
}

#[test]
fn oracle_count_is_exact_under_interleaving() {
    let mut rng = trial_rng(12, 0);
    let mut circ = QuantumCircuit::new(2);
    circ.h(0).unwrap().cx(0, 1).unwrap();
    let mut o = CountingOracle::new(circ);
    let mut expected = 0;
    for i in 0..60 {
        match i % 4 {
            0 => {
                o.apply(&QuantumState::zero(2).unwrap()).unwrap();
            }
            1 => {
                o.apply_sampled(&sample_random_state(2, &mut rng).unwrap(), &mut rng)
                    .unwrap();
            }
            2 => {
                assert!(o.apply(&QuantumState::zero(3).unwrap()).is_err());
            }
            _ => {
                let _ = o.queries();
                assert_eq!(o.arity(), 2);
                expected -= 1;
            }
        }
        expected += 1;
        assert_eq!(o.queries(), expected);
    }
}

#[test]
fn serialization_is_canonical() {
    let mut circ = QuantumCircuit::with_ancillas(2, 1);
    circ.h(0).unwrap().cx(0, 2).unwrap().measure(2).unwrap();
    circ.set_outputs(vec![1, 0]).unwrap();
    let again = circ.clone();
    assert_eq!(circ.canonical_bytes(), again.canonical_bytes());
    assert_eq!(QuantumCircuit::from_text(&circ.to_text()).unwrap(), circ);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitary_circuits_preserve_norm(n in 1usize..=8, specs in gate_specs(24), seed in any::<u64>()) {
        let circ = build_circuit(n, &specs);
        let psi = sample_random_state(n, &mut trial_rng(seed, 0)).unwrap();
        let out = run_circuit(&circ, &psi).unwrap();
        prop_assert!((out.amplitudes().unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_mode_agrees_with_pure(n in 1usize..=4, specs in gate_specs(20), seed in any::<u64>()) {
        let circ = build_circuit(n, &specs);
        let psi = sample_random_state(n, &mut trial_rng(seed, 0)).unwrap();
        let pure = run_circuit(&circ, &psi).unwrap();
        let mixed = run_circuit(&circ, &psi.to_mixed().unwrap()).unwrap();
        prop_assert!(!mixed.is_pure_mode());
        prop_assert!(max_abs_diff(&pure.density(), &mixed.density()) < 1e-10);
    }

    #[test]
    fn trace_distance_is_a_metric(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let r = 1usize << n;
        let a = sample_random_mixed_state(n, 1 + (seed as usize) % r, &mut rng).unwrap();
        let b = sample_random_mixed_state(n, r, &mut rng).unwrap();
        let c = sample_random_state(n, &mut rng).unwrap();
        let (ab, ba) = (trace_distance(&a, &b).unwrap(), trace_distance(&b, &a).unwrap());
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        let (ac, cb) = (trace_distance(&a, &c).unwrap(), trace_distance(&c, &b).unwrap());
        prop_assert!(ab <= ac + cb + 1e-9);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-9);
    }

    #[test]
    fn pauli_is_an_involution(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let rho = sample_random_mixed_state(n, 2, &mut rng).unwrap();
        let r = PauliString::random(n, &mut rng);
        let twice = pauli_apply(&r, &pauli_apply(&r, &rho).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&twice.density(), &rho.density()) < 1e-10);
        let u = r.as_unitary();
        let d = u.nrows();
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &DMatrix::identity(d, d)) < 1e-12);
    }

    #[test]
    fn pauli_twirl_is_maximally_mixed(n in 1usize..=3, seed in any::<u64>()) {
        let rho = sample_random_mixed_state(n, 1 + (seed as usize) % 3, &mut trial_rng(seed, 0)).unwrap();
        let d = 1usize << n;
        let w = c(1.0 / (d * d) as f64, 0.0);
        let mut avg = DMatrix::<C64>::zeros(d, d);
        for r in PauliString::all(n) {
            avg += pauli_apply(&r, &rho).unwrap().density() * w;
        }
        let target = DMatrix::<C64>::identity(d, d) * c(1.0 / d as f64, 0.0);
        prop_assert!(max_abs_diff(&avg, &target) < 1e-10);
    }

    #[test]
    fn serialization_round_trips(n in 1usize..=4, specs in gate_specs(20)) {
        let circ = build_circuit(n, &specs);
        let text = circ.to_text();
        let back = QuantumCircuit::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back, circ);
    }
}
