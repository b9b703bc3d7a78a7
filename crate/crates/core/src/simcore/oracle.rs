use std::fmt;

use rand::RngCore;

use super::bits::BitString;
use super::circuit::QuantumCircuit;
use super::sim::{run_circuit, run_circuit_sampled};
use super::state::QuantumState;
use crate::{Error, Result};

/// Forward-only black-box access to a circuit. Every call, successful or
/// not, counts as one query.
pub struct CountingOracle {
    circuit: QuantumCircuit,
    queries: usize,
}

impl CountingOracle {
    pub fn new(circuit: QuantumCircuit) -> Self {
        Self {
            circuit,
            queries: 0,
        }
    }

    pub fn arity(&self) -> usize {
        self.circuit.arity()
    }

    pub fn output_arity(&self) -> usize {
        self.circuit.output_arity()
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.circuit.arity() {
            return Err(Error::ArityMismatch {
                expected: self.circuit.arity(),
                actual: n,
            });
        }
        Ok(())
    }

    pub fn apply(&mut self, state: &QuantumState) -> Result<QuantumState> {
        self.queries += 1;
        self.check(state.num_qubits())?;
        run_circuit(&self.circuit, state)
    }

    pub fn apply_sampled(
        &mut self,
        state: &QuantumState,
        rng: &mut (impl RngCore + ?Sized),
    ) -> Result<QuantumState> {
        self.queries += 1;
        self.check(state.num_qubits())?;
        Ok(run_circuit_sampled(&self.circuit, state, rng)?.state)
    }

    /// A classical query on a basis input.
    pub fn query_basis(&mut self, input: &BitString) -> Result<BitString> {
        self.queries += 1;
        self.check(input.len())?;
        self.circuit.eval_classical(input)
    }
}

impl fmt::Debug for CountingOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CountingOracle")
            .field("arity", &self.circuit.arity())
            .field("queries", &self.queries)
            .finish_non_exhaustive()
    }
}
