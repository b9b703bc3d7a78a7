use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::bits::BitString;
use super::gate::{Gate, NamedGate, Op, Unitary};
use super::kernel;
use super::state::check_pure_size;
use crate::{Error, Result};

/// A gate list over `arity` input wires followed by `ancillas` work wires
/// that start in `|0>`. `outputs` names the wires returned after a run.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCircuit {
    arity: usize,
    ancillas: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl QuantumCircuit {
    pub fn new(arity: usize) -> Self {
        Self {
            arity,
            ancillas: 0,
            gates: Vec::new(),
            outputs: (0..arity).collect(),
        }
    }

    /// Same as [`new`](Self::new) with `ancillas` work wires; outputs default
    /// to the input wires.
    pub fn with_ancillas(arity: usize, ancillas: usize) -> Self {
        Self {
            ancillas,
            ..Self::new(arity)
        }
    }

    pub fn identity(arity: usize) -> Self {
        Self::new(arity)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn width(&self) -> usize {
        self.arity + self.ancillas
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn output_arity(&self) -> usize {
        self.outputs.len()
    }

    /// Adds `k` ancilla wires and returns their indices.
    pub fn add_ancillas(&mut self, k: usize) -> std::ops::Range<usize> {
        let start = self.width();
        self.ancillas += k;
        start..start + k
    }

    pub fn set_outputs(&mut self, outputs: Vec<usize>) -> Result<&mut Self> {
        for (i, &w) in outputs.iter().enumerate() {
            if w >= self.width() {
                return Err(Error::IndexOutOfRange {
                    index: w,
                    qubits: self.width(),
                });
            }
            if outputs[..i].contains(&w) {
                return Err(Error::InvalidGate(format!("output wire {w} repeated")));
            }
        }
        self.outputs = outputs;
        Ok(self)
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        if gate.max_wire() >= self.width() {
            return Err(Error::IndexOutOfRange {
                index: gate.max_wire(),
                qubits: self.width(),
            });
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn named(
        &mut self,
        g: NamedGate,
        targets: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<&mut Self> {
        self.push(Gate::new(
            Op::Named(g),
            targets.to_vec(),
            controls.to_vec(),
        )?)
    }

    pub fn x(&mut self, t: usize) -> Result<&mut Self> {
        self.named(NamedGate::X, &[t], &[])
    }

    pub fn z(&mut self, t: usize) -> Result<&mut Self> {
        self.named(NamedGate::Z, &[t], &[])
    }

    pub fn h(&mut self, t: usize) -> Result<&mut Self> {
        self.named(NamedGate::H, &[t], &[])
    }

    pub fn cx(&mut self, c: usize, t: usize) -> Result<&mut Self> {
        self.named(NamedGate::X, &[t], &[(c, true)])
    }

    pub fn ccx(&mut self, c1: usize, c2: usize, t: usize) -> Result<&mut Self> {
        self.named(NamedGate::X, &[t], &[(c1, true), (c2, true)])
    }

    /// X on `t` when every control wire holds its given value.
    pub fn mcx(&mut self, controls: &[(usize, bool)], t: usize) -> Result<&mut Self> {
        self.named(NamedGate::X, &[t], controls)
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<&mut Self> {
        self.named(NamedGate::Swap, &[a, b], &[])
    }

    pub fn custom(
        &mut self,
        u: Unitary,
        targets: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<&mut Self> {
        self.push(Gate::new(
            Op::Custom(u),
            targets.to_vec(),
            controls.to_vec(),
        )?)
    }

    pub fn measure(&mut self, t: usize) -> Result<&mut Self> {
        self.push(Gate::new(Op::Measure, vec![t], vec![])?)
    }

    pub fn discard(&mut self, t: usize) -> Result<&mut Self> {
        self.push(Gate::new(Op::Discard, vec![t], vec![])?)
    }

    pub fn prepare(&mut self, t: usize) -> Result<&mut Self> {
        self.push(Gate::new(Op::Prepare, vec![t], vec![])?)
    }

    /// Controls wires `wires[i]` on bit `i` of `value`.
    pub fn value_controls(wires: &[usize], value: &BitString) -> Vec<(usize, bool)> {
        wires.iter().copied().zip(value.iter()).collect()
    }

    pub fn is_unitary(&self) -> bool {
        self.gates.iter().all(|g| g.op().is_unitary())
    }

    /// True when the circuit maps its inputs to its inputs (no ancillas and
    /// outputs in natural order).
    pub fn is_square(&self) -> bool {
        self.ancillas == 0 && self.outputs.iter().copied().eq(0..self.arity)
    }

    /// The `2^n x 2^n` matrix of a unitary, ancilla-free circuit.
    pub fn unitary_matrix(&self) -> Result<DMatrix<C64>> {
        if !self.is_unitary() {
            return Err(Error::NotUnitary);
        }
        if !self.is_square() {
            return Err(Error::Unsupported(
                "unitary matrix of a circuit with ancillas or permuted outputs".into(),
            ));
        }
        check_pure_size(2 * self.arity)?;
        let d = 1usize << self.arity;
        // Columns of U are U|j>; apply to all of them at once as a 2n-wire
        // vector whose high half indexes the column.
        let mut cols = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            cols[j * d + j] = C64::new(1.0, 0.0);
        }
        let shift = self.arity;
        for g in &self.gates {
            let m = g.op().matrix().expect("checked unitary");
            let t: Vec<usize> = g.targets().iter().map(|w| w + shift).collect();
            let c: Vec<(usize, bool)> = g.controls().iter().map(|&(w, v)| (w + shift, v)).collect();
            kernel::apply_matrix(&mut cols, 2 * self.arity, &t, &c, &m);
        }
        Ok(DMatrix::from_column_slice(d, d, &cols))
    }

    /// Appends `other`, mapping its wire `w` to `wire_map[w]` in `self`.
    pub fn append(&mut self, other: &QuantumCircuit, wire_map: &[usize]) -> Result<&mut Self> {
        self.append_controlled(other, wire_map, &[])
    }

    /// Appends `other` with every gate additionally conditioned on `controls`.
    pub fn append_controlled(
        &mut self,
        other: &QuantumCircuit,
        wire_map: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<&mut Self> {
        if wire_map.len() != other.width() {
            return Err(Error::DimensionMismatch(format!(
                "wire map of length {} for a circuit of width {}",
                wire_map.len(),
                other.width()
            )));
        }
        for g in &other.gates {
            let g = g.remap(wire_map).with_extra_controls(controls);
            self.push(Gate::new(
                g.op().clone(),
                g.targets().to_vec(),
                g.controls().to_vec(),
            )?)?;
        }
        Ok(self)
    }

    /// The inverse of a unitary circuit.
    pub fn inverse(&self) -> Result<QuantumCircuit> {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(Gate::inverse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            gates,
            ..self.clone()
        })
    }

    /// A copy with one extra wire at index 0 conditioning every gate on `|1>`.
    pub fn controlled_by(&self) -> QuantumCircuit {
        let map: Vec<usize> = (1..=self.width()).collect();
        QuantumCircuit {
            arity: self.arity + 1,
            ancillas: self.ancillas,
            gates: self
                .gates
                .iter()
                .map(|g| g.remap(&map).with_extra_controls(&[(0, true)]))
                .collect(),
            outputs: std::iter::once(0)
                .chain(self.outputs.iter().map(|w| w + 1))
                .collect(),
        }
    }

    /// A copy with `nref` untouched wires inserted after the inputs. They are
    /// inputs and appended to the outputs, so the circuit acts as `C ⊗ I`.
    pub fn with_reference(&self, nref: usize) -> QuantumCircuit {
        if nref == 0 {
            return self.clone();
        }
        let map: Vec<usize> = (0..self.width())
            .map(|w| if w < self.arity { w } else { w + nref })
            .collect();
        QuantumCircuit {
            arity: self.arity + nref,
            ancillas: self.ancillas,
            gates: self.gates.iter().map(|g| g.remap(&map)).collect(),
            outputs: self
                .outputs
                .iter()
                .map(|&w| map[w])
                .chain(self.arity..self.arity + nref)
                .collect(),
        }
    }

    /// Evaluates the circuit on a basis input when every gate maps basis
    /// states to basis states (up to phase). Returns the output wires.
    pub fn eval_classical(&self, input: &BitString) -> Result<BitString> {
        let bits = self.eval_classical_all(input)?;
        Ok(self.outputs.iter().map(|&w| bits.get(w)).collect())
    }

    /// Like [`eval_classical`](Self::eval_classical) but returns every wire.
    pub fn eval_classical_all(&self, input: &BitString) -> Result<BitString> {
        if input.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                actual: input.len(),
            });
        }
        let mut wires = input.concat(&BitString::zeros(self.ancillas));
        for g in &self.gates {
            if !g.controls().iter().all(|&(w, v)| wires.get(w) == v) {
                continue;
            }
            match g.op() {
                Op::Named(NamedGate::X) | Op::Named(NamedGate::Y) => {
                    let t = g.targets()[0];
                    wires.set(t, !wires.get(t));
                }
                Op::Named(NamedGate::Swap) => {
                    let (a, b) = (g.targets()[0], g.targets()[1]);
                    let (va, vb) = (wires.get(a), wires.get(b));
                    wires.set(a, vb);
                    wires.set(b, va);
                }
                Op::Named(n) if n.is_diagonal() => {}
                Op::Named(n) => {
                    return Err(Error::NotClassical(format!("gate `{}`", n.name())));
                }
                Op::Custom(u) => {
                    let k = u.num_qubits();
                    let d = 1usize << k;
                    let col = g
                        .targets()
                        .iter()
                        .fold(0usize, |acc, &t| (acc << 1) | wires.get(t) as usize);
                    let row = (0..d)
                        .find(|&r| u.data()[r * d + col].norm() > 1.0 - 1e-9)
                        .ok_or_else(|| {
                            Error::NotClassical("custom gate creates superposition".into())
                        })?;
                    for (i, &t) in g.targets().iter().enumerate() {
                        wires.set(t, (row >> (k - 1 - i)) & 1 == 1);
                    }
                }
                Op::Measure => {}
                Op::Discard | Op::Prepare => wires.set(g.targets()[0], false),
            }
        }
        Ok(wires)
    }
}
