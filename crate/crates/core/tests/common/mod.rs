#![allow(dead_code)]

use proptest::prelude::*;
use qlab_core::simcore::{NamedGate, QuantumCircuit};

/// One random gate: kind selector, target, control, angle.
pub type GateSpec = (u8, usize, usize, f64);

pub fn gate_specs(max_gates: usize) -> impl Strategy<Value = Vec<GateSpec>> {
    prop::collection::vec(
        (0u8..10, 0usize..64, 0usize..64, -3.2f64..3.2),
        0..=max_gates,
    )
}

/// Builds a unitary circuit on `n` qubits from gate specs. Controlled gates
/// fall back to single-qubit ones when `n == 1`.
pub fn build_circuit(n: usize, specs: &[GateSpec]) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(n);
    for &(kind, t, ctl, angle) in specs {
        let t = t % n;
        let other = (t + 1 + ctl % n.max(2)) % n;
        let two = n > 1 && other != t;
        match kind {
            0 => c.h(t),
            1 => c.x(t),
            2 => c.named(NamedGate::S, &[t], &[]),
            3 => c.named(NamedGate::T, &[t], &[]),
            4 => c.named(NamedGate::Rx(angle), &[t], &[]),
            5 => c.named(NamedGate::Ry(angle), &[t], &[]),
            6 => c.named(NamedGate::Rz(angle), &[t], &[]),
            7 if two => c.cx(other, t),
            8 if two => c.named(NamedGate::Phase(angle), &[t], &[(other, ctl % 2 == 0)]),
            9 if two => c.swap(t, other),
            _ => c.named(NamedGate::Y, &[t], &[]),
        }
        .expect("valid gate");
    }
    c
}

/// Random circuits restricted to X, CNOT and Toffoli, which keep basis
/// states basis states.
pub fn build_classical_circuit(n: usize, specs: &[GateSpec]) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(n);
    for &(kind, t, ctl, _) in specs {
        let t = t % n;
        let a = (t + 1 + ctl % n.max(2)) % n;
        let b = (t + 1 + (ctl / 7) % n.max(2)) % n;
        match kind % 3 {
            1 if n > 1 && a != t => c.cx(a, t),
            2 if n > 2 && a != t && b != t && a != b => c.ccx(a, b, t),
            _ => c.x(t),
        }
        .expect("valid gate");
    }
    c
}
