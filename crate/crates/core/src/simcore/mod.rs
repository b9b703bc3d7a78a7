//! Dense state-vector and density-matrix simulation, state metrics and
//! Pauli operators.

mod bits;
mod circuit;
mod gate;
pub(crate) mod kernel;
mod metrics;
mod oracle;
mod pauli;
mod random;
mod serialize;
mod sim;
mod state;

pub use bits::BitString;
pub use circuit::QuantumCircuit;
pub use gate::{Gate, NamedGate, Op, Unitary, UNITARY_TOL};
pub use metrics::{
    channel_distance_estimate, channel_distance_estimate_with, fidelity, phase_invariant_distance,
    trace_distance, ChannelDistance, DEFAULT_PROBES,
};
pub use num_complex::Complex64 as C64;
pub use oracle::CountingOracle;
pub use pauli::{pauli_apply, PauliString};
pub use random::{
    derive_seed, haar_unitary, sample_random_mixed_state, sample_random_state, state_prep_unitary,
    trial_rng,
};
pub use sim::{
    run_circuit, run_circuit_sampled, run_circuit_with_side, run_circuit_with_side_sampled,
    SampledRun, PRODUCT_TOL,
};
pub use state::{Mode, QuantumState, MAX_MIXED_QUBITS, MAX_PURE_QUBITS, STATE_TOL};
