use rand::RngCore;

use super::interp::Interpreter;
use crate::simcore::{
    run_circuit_with_side, run_circuit_with_side_sampled, BitString, Op, QuantumCircuit,
    QuantumState,
};
use crate::{Error, Result};

/// An obfuscator: circuits in, programs out.
pub trait Obfuscator: Send + Sync {
    fn name(&self) -> &str;

    /// Output must be a deterministic function of `(circuit, randomness)`.
    fn obfuscate(
        &self,
        circuit: &QuantumCircuit,
        randomness: &BitString,
    ) -> Result<ObfuscatedProgram>;

    /// Upper bound on the output size (bytes for descriptions, qubits for
    /// states) for circuits shaped like `circuit`.
    fn size_bound(&self, circuit: &QuantumCircuit) -> usize;
}

#[derive(Debug)]
pub enum ProgramForm {
    Description(Vec<u8>),
    State {
        advice: QuantumState,
        interpreter: String,
    },
}

/// The output of an obfuscator. Not `Clone`: a state-form program is a
/// quantum state. Description forms can be copied with
/// [`ObfuscatedProgram::try_clone`].
#[derive(Debug)]
pub struct ObfuscatedProgram {
    form: ProgramForm,
    arity: usize,
    uses_remaining: Option<u32>,
}

impl ObfuscatedProgram {
    pub fn from_description(bytes: Vec<u8>, arity: usize, uses: Option<u32>) -> Self {
        Self {
            form: ProgramForm::Description(bytes),
            arity,
            uses_remaining: uses,
        }
    }

    pub fn from_state(
        advice: QuantumState,
        interpreter: impl Into<String>,
        arity: usize,
        uses: Option<u32>,
    ) -> Self {
        Self {
            form: ProgramForm::State {
                advice,
                interpreter: interpreter.into(),
            },
            arity,
            uses_remaining: uses,
        }
    }

    pub fn form(&self) -> &ProgramForm {
        &self.form
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn uses_remaining(&self) -> Option<u32> {
        self.uses_remaining
    }

    pub fn is_description(&self) -> bool {
        matches!(self.form, ProgramForm::Description(_))
    }

    /// Program size: bytes for a description, qubits for a state.
    pub fn size(&self) -> usize {
        match &self.form {
            ProgramForm::Description(b) => b.len(),
            ProgramForm::State { advice, .. } => advice.num_qubits(),
        }
    }

    pub fn description(&self) -> Result<&[u8]> {
        match &self.form {
            ProgramForm::Description(b) => Ok(b),
            ProgramForm::State { .. } => Err(Error::NotSerializable),
        }
    }

    /// Parses a description-form program.
    pub fn circuit(&self) -> Result<QuantumCircuit> {
        let text = std::str::from_utf8(self.description()?)
            .map_err(|e| Error::Malformed(format!("description is not utf-8: {e}")))?;
        QuantumCircuit::from_text(text)
    }

    pub fn try_clone(&self) -> Result<Self> {
        match &self.form {
            ProgramForm::Description(b) => Ok(Self {
                form: ProgramForm::Description(b.clone()),
                arity: self.arity,
                uses_remaining: self.uses_remaining,
            }),
            ProgramForm::State { .. } => Err(Error::NotSerializable),
        }
    }

    fn consume(&mut self) -> Result<()> {
        match &mut self.uses_remaining {
            None => Ok(()),
            Some(0) => Err(Error::UsesExhausted),
            Some(k) => {
                *k -= 1;
                Ok(())
            }
        }
    }

    fn check_input(&self, input: &QuantumState, extra: usize) -> Result<()> {
        if input.num_qubits() < self.arity + extra {
            return Err(Error::ArityMismatch {
                expected: self.arity + extra,
                actual: input.num_qubits(),
            });
        }
        Ok(())
    }

    /// Runs the program on `input`. Qubits past the arity are a side
    /// register and come back untouched at the end of the output.
    pub fn interpret(&mut self, input: &QuantumState) -> Result<QuantumState> {
        self.check_input(input, 0)?;
        self.consume()?;
        match &self.form {
            ProgramForm::Description(_) => run_circuit_with_side(&self.circuit()?, input),
            ProgramForm::State {
                advice,
                interpreter,
            } => Interpreter::from_id(interpreter)?.run(advice, input, false, None),
        }
    }

    /// As [`interpret`](Self::interpret), with measurements sampled.
    pub fn interpret_sampled(
        &mut self,
        input: &QuantumState,
        rng: &mut dyn RngCore,
    ) -> Result<QuantumState> {
        self.check_input(input, 0)?;
        self.consume()?;
        match &self.form {
            ProgramForm::Description(_) => {
                Ok(run_circuit_with_side_sampled(&self.circuit()?, input, rng)?.state)
            }
            ProgramForm::State {
                advice,
                interpreter,
            } => Interpreter::from_id(interpreter)?.run(advice, input, false, Some(rng)),
        }
    }

    /// Runs the program controlled on qubit 0 of `input`; the remaining
    /// qubits are the program input followed by any side register.
    pub fn interpret_controlled(&mut self, input: &QuantumState) -> Result<QuantumState> {
        self.check_input(input, 1)?;
        self.consume()?;
        match &self.form {
            ProgramForm::Description(_) => {
                run_circuit_with_side(&self.circuit()?.controlled_by(), input)
            }
            ProgramForm::State {
                advice,
                interpreter,
            } => Interpreter::from_id(interpreter)?.run(advice, input, true, None),
        }
    }

    /// The public first stage of a measure-and-dispatch interpreter:
    /// measures the advice and decodes the circuit it names. Costs one use.
    pub fn measure_advice(&mut self, rng: &mut dyn RngCore) -> Result<QuantumCircuit> {
        self.consume()?;
        match &self.form {
            ProgramForm::Description(_) => self.circuit(),
            ProgramForm::State {
                advice,
                interpreter,
            } => match Interpreter::from_id(interpreter)? {
                Interpreter::MeasureDispatch(codec) => {
                    let all: Vec<usize> = (0..advice.num_qubits()).collect();
                    let v = advice.sample_measurement(&all, rng)?;
                    codec.decode(&v)
                }
                other => Err(Error::Unsupported(format!(
                    "interpreter {} has no measurement stage",
                    other.id()
                ))),
            },
        }
    }
}

/// The identity obfuscator: outputs the canonical description, salted with
/// the randomness. Gives correctness and nothing else.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlainObfuscator {
    uses: Option<u32>,
}

impl PlainObfuscator {
    /// Programs that can be interpreted `uses` times.
    pub fn with_uses(uses: u32) -> Self {
        Self { uses: Some(uses) }
    }
}

impl Obfuscator for PlainObfuscator {
    fn name(&self) -> &str {
        "plain"
    }

    fn obfuscate(
        &self,
        circuit: &QuantumCircuit,
        randomness: &BitString,
    ) -> Result<ObfuscatedProgram> {
        let text = circuit.to_text_salted(Some(randomness));
        Ok(ObfuscatedProgram::from_description(
            text.into_bytes(),
            circuit.arity(),
            self.uses,
        ))
    }

    fn size_bound(&self, circuit: &QuantumCircuit) -> usize {
        // Header plus a per-gate line; each real takes at most 24 bytes.
        let header = 64 + 8 * circuit.width();
        let gates: usize = circuit
            .gates()
            .iter()
            .map(|g| {
                let wires = g.targets().len() + g.controls().len();
                let reals = match g.op() {
                    Op::Custom(u) => 2usize << (2 * u.num_qubits()),
                    Op::Named(n) => usize::from(n.param().is_some()),
                    _ => 0,
                };
                24 + 12 * wires + 25 * reals
            })
            .sum();
        header + gates + 4 * randomness_allowance(circuit)
    }
}

// Salt length is chosen by the caller; allow one salt bit per wire per gate.
fn randomness_allowance(circuit: &QuantumCircuit) -> usize {
    circuit.width() * (circuit.gate_count() + 1)
}
