//! Circuit execution.
//!
//! The deterministic runner stays in state-vector mode until a measurement,
//! discard or preparation would split the state into a proper mixture, and
//! only then switches to a density operator. The sampled runner never
//! leaves state-vector mode for pure inputs.

use num_complex::Complex64 as C64;
use rand::{Rng, RngCore};

use super::circuit::QuantumCircuit;
use super::gate::{Gate, Op};
use super::kernel::{self, Footprint};
use super::state::QuantumState;
use crate::{Error, Result};

/// Below this weight a channel branch is treated as absent.
const BRANCH_EPS: f64 = 1e-14;
/// Residual weight under which the unread wires are taken to be in a
/// product state with the output register.
pub const PRODUCT_TOL: f64 = 1e-20;

/// Result of a sampled run: the output state and each measurement outcome
/// in gate order.
#[derive(Clone, Debug)]
pub struct SampledRun {
    pub state: QuantumState,
    pub outcomes: Vec<bool>,
}

/// Runs `circuit` on `input` and returns the output register. Non-unitary
/// gates are applied as channels, so the result is exact and deterministic.
pub fn run_circuit(circuit: &QuantumCircuit, input: &QuantumState) -> Result<QuantumState> {
    let state = prepare(circuit, input)?;
    let state = execute(circuit, state, None, &mut Vec::new())?;
    state.reduce(circuit.outputs(), PRODUCT_TOL)
}

/// Runs `circuit` with measurements sampled from `rng`.
pub fn run_circuit_sampled(
    circuit: &QuantumCircuit,
    input: &QuantumState,
    rng: &mut (impl RngCore + ?Sized),
) -> Result<SampledRun> {
    let state = prepare(circuit, input)?;
    let mut outcomes = Vec::new();
    let state = execute(circuit, state, Some(&mut RngAdapter(rng)), &mut outcomes)?;
    Ok(SampledRun {
        state: state.reduce(circuit.outputs(), PRODUCT_TOL)?,
        outcomes,
    })
}

/// Runs `circuit` on the first `arity` qubits of `input`; any further qubits
/// are carried through untouched and appended to the output.
pub fn run_circuit_with_side(
    circuit: &QuantumCircuit,
    input: &QuantumState,
) -> Result<QuantumState> {
    let side = side_qubits(circuit, input)?;
    run_circuit(&circuit.with_reference(side), input)
}

pub fn run_circuit_with_side_sampled(
    circuit: &QuantumCircuit,
    input: &QuantumState,
    rng: &mut (impl RngCore + ?Sized),
) -> Result<SampledRun> {
    let side = side_qubits(circuit, input)?;
    run_circuit_sampled(&circuit.with_reference(side), input, rng)
}

fn side_qubits(circuit: &QuantumCircuit, input: &QuantumState) -> Result<usize> {
    input
        .num_qubits()
        .checked_sub(circuit.arity())
        .ok_or(Error::ArityMismatch {
            expected: circuit.arity(),
            actual: input.num_qubits(),
        })
}

struct RngAdapter<'a, R: RngCore + ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

fn prepare(circuit: &QuantumCircuit, input: &QuantumState) -> Result<QuantumState> {
    if input.num_qubits() != circuit.arity() {
        return Err(Error::ArityMismatch {
            expected: circuit.arity(),
            actual: input.num_qubits(),
        });
    }
    input.with_zero_ancillas(circuit.ancillas())
}

fn kraus_pair(op: &Op) -> ([C64; 4], [C64; 4]) {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    match op {
        Op::Measure => ([o, z, z, z], [z, z, z, o]),
        Op::Discard | Op::Prepare => ([o, z, z, z], [z, o, z, z]),
        _ => unreachable!("unitary op has no Kraus pair"),
    }
}

/// Indices of gates whose effect is invisible in the output: uncontrolled
/// resets (and, when not sampling, measurements) of wires that no later gate
/// reads and that are not outputs. Tracing them at the end is equivalent.
fn skippable(circuit: &QuantumCircuit, sampling: bool) -> Vec<bool> {
    let width = circuit.width();
    let mut live = vec![false; width];
    for &w in circuit.outputs() {
        live[w] = true;
    }
    let mut skip = vec![false; circuit.gate_count()];
    for (i, g) in circuit.gates().iter().enumerate().rev() {
        let dead_target = !live[g.targets()[0]];
        skip[i] = g.controls().is_empty()
            && dead_target
            && match g.op() {
                Op::Discard | Op::Prepare => true,
                Op::Measure => !sampling,
                _ => false,
            };
        if !skip[i] {
            for &t in g.targets() {
                live[t] = true;
            }
            for &(c, _) in g.controls() {
                live[c] = true;
            }
        }
    }
    skip
}

pub(crate) fn execute(
    circuit: &QuantumCircuit,
    mut state: QuantumState,
    mut rng: Option<&mut dyn RngCore>,
    outcomes: &mut Vec<bool>,
) -> Result<QuantumState> {
    let skip = skippable(circuit, rng.is_some());
    for (gate, skip) in circuit.gates().iter().zip(skip) {
        if skip {
            continue;
        }
        match gate.op() {
            Op::Named(_) | Op::Custom(_) => {
                let m = gate.op().matrix().expect("unitary op");
                state.apply_matrix(gate.targets(), gate.controls(), &m);
            }
            op => {
                let (m0, m1) = kraus_pair(op);
                let p1 = branch_one_weight(&state, gate);
                let choice = match rng.as_deref_mut() {
                    Some(r) => Some(r.random::<f64>() < p1),
                    None if p1 < BRANCH_EPS => Some(false),
                    None if p1 > 1.0 - BRANCH_EPS => Some(true),
                    None => None,
                };
                match choice {
                    Some(one) => {
                        apply_kraus(&mut state, gate, if one { &m1 } else { &m0 }, one);
                        if matches!(op, Op::Measure) && rng.is_some() {
                            outcomes.push(one);
                        }
                    }
                    None => {
                        if state.is_pure_mode() {
                            state = state.to_mixed()?;
                        }
                        state.apply_controlled_channel(
                            gate.targets()[0],
                            gate.controls(),
                            &m0,
                            &m1,
                        );
                    }
                }
            }
        }
    }
    Ok(state)
}

/// Weight of the second Kraus branch: controls satisfied and target `|1>`.
fn branch_one_weight(state: &QuantumState, gate: &Gate) -> f64 {
    let n = state.num_qubits();
    let mut controls = gate.controls().to_vec();
    controls.push((gate.targets()[0], true));
    let fp = Footprint::new(n, &[], &controls);
    match state.amplitudes() {
        Some(a) => a
            .iter()
            .enumerate()
            .filter(|(i, _)| fp.matches(*i))
            .map(|(_, z)| z.norm_sqr())
            .sum(),
        None => state
            .probabilities()
            .iter()
            .enumerate()
            .filter(|(i, _)| fp.matches(*i))
            .map(|(_, p)| p)
            .sum(),
    }
}

/// Applies a single Kraus operator and renormalizes.
fn apply_kraus(state: &mut QuantumState, gate: &Gate, m: &[C64; 4], second: bool) {
    let n = state.num_qubits();
    let t = gate.targets();
    let c = gate.controls();
    if let Some(a) = state.pure_amps_mut() {
        kernel::apply_matrix(a.as_mut_slice(), n, t, c, m);
        if second && !c.is_empty() {
            kernel::zero_outside(a.as_mut_slice(), n, c);
        }
        let norm = kernel::norm_sqr(a.as_slice()).sqrt();
        if norm > 0.0 {
            *a /= C64::new(norm, 0.0);
        }
    } else if let Some(rho) = state.mixed_mut() {
        let rt: Vec<usize> = t.iter().map(|w| w + n).collect();
        let rc: Vec<(usize, bool)> = c.iter().map(|&(w, v)| (w + n, v)).collect();
        let conj = m.map(|z| z.conj());
        kernel::apply_matrix(rho.as_mut_slice(), 2 * n, &rt, &rc, m);
        kernel::apply_matrix(rho.as_mut_slice(), 2 * n, t, c, &conj);
        if second && !c.is_empty() {
            kernel::zero_outside(rho.as_mut_slice(), 2 * n, &rc);
            kernel::zero_outside(rho.as_mut_slice(), 2 * n, c);
        }
        let tr = rho.trace().re;
        if tr > 0.0 {
            *rho /= C64::new(tr, 0.0);
        }
    }
}
