use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::RngCore;

use super::bits::BitString;
use super::circuit::QuantumCircuit;
use super::gate::NamedGate;
use super::state::QuantumState;
use crate::{Error, Result};

/// An n-qubit Pauli operator `P_r`, `r = (x_1 z_1 ... x_n z_n)`, acting as
/// `X^{x_i} Z^{z_i}` on qubit `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    bits: BitString,
}

impl PauliString {
    pub fn new(bits: BitString) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(Error::LengthMismatch {
                expected: bits.len() + 1,
                actual: bits.len(),
            });
        }
        Ok(Self { bits })
    }

    /// Checks that `bits` indexes a Pauli on exactly `n` qubits.
    pub fn for_qubits(bits: BitString, n: usize) -> Result<Self> {
        if bits.len() != 2 * n {
            return Err(Error::LengthMismatch {
                expected: 2 * n,
                actual: bits.len(),
            });
        }
        Self::new(bits)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            bits: BitString::zeros(2 * n),
        }
    }

    pub fn random(n: usize, rng: &mut (impl RngCore + ?Sized)) -> Self {
        Self {
            bits: BitString::random(2 * n, rng),
        }
    }

    /// Every Pauli string on `n` qubits, in index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| Self {
            bits: BitString::from_usize(i, 2 * n),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.bits.len() / 2
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn x(&self, i: usize) -> bool {
        self.bits.get(2 * i)
    }

    pub fn z(&self, i: usize) -> bool {
        self.bits.get(2 * i + 1)
    }

    /// Dense matrix of `P_r`.
    pub fn as_unitary(&self) -> DMatrix<C64> {
        let n = self.num_qubits();
        let d = 1usize << n;
        let (xmask, zmask) = self.masks();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let sign = if (zmask & j).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            m[(j ^ xmask, j)] = C64::new(sign, 0.0);
        }
        m
    }

    fn masks(&self) -> (usize, usize) {
        let n = self.num_qubits();
        (0..n).fold((0, 0), |(xm, zm), i| {
            let b = 1usize << (n - 1 - i);
            (
                if self.x(i) { xm | b } else { xm },
                if self.z(i) { zm | b } else { zm },
            )
        })
    }

    /// Appends `P_r` (or `P_r†` when `inverse`) to `circuit` on `wires`, with
    /// every gate conditioned on `controls`.
    pub fn append_to(
        &self,
        circuit: &mut QuantumCircuit,
        wires: &[usize],
        controls: &[(usize, bool)],
        inverse: bool,
    ) -> Result<()> {
        if wires.len() != self.num_qubits() {
            return Err(Error::ArityMismatch {
                expected: self.num_qubits(),
                actual: wires.len(),
            });
        }
        for (i, &w) in wires.iter().enumerate() {
            let mut order = [(self.z(i), NamedGate::Z), (self.x(i), NamedGate::X)];
            if inverse {
                order.reverse();
            }
            for (on, g) in order {
                if on {
                    circuit.named(g, &[w], controls)?;
                }
            }
        }
        Ok(())
    }

    /// `P_r ρ P_r†` on the first `2n`-bit-indexed qubits of `state`.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        self.conjugate(state, false)
    }

    /// `P_r† ρ P_r`.
    pub fn apply_inverse(&self, state: &QuantumState) -> Result<QuantumState> {
        self.conjugate(state, true)
    }

    fn conjugate(&self, state: &QuantumState, inverse: bool) -> Result<QuantumState> {
        let n = self.num_qubits();
        if state.num_qubits() < n {
            return Err(Error::LengthMismatch {
                expected: 2 * state.num_qubits(),
                actual: self.bits.len(),
            });
        }
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let xm = [z, o, o, z];
        let zm = [o, z, z, -o];
        let mut out = state.clone();
        for i in 0..n {
            let mut order = [(self.z(i), &zm), (self.x(i), &xm)];
            if inverse {
                order.reverse();
            }
            for (on, m) in order {
                if on {
                    out.apply_matrix(&[i], &[], m);
                }
            }
        }
        Ok(out)
    }
}

/// Applies `P_r ρ P_r†`, requiring `r` to have exactly `2n` bits.
pub fn pauli_apply(r: &PauliString, state: &QuantumState) -> Result<QuantumState> {
    if r.bits.len() != 2 * state.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: 2 * state.num_qubits(),
            actual: r.bits.len(),
        });
    }
    r.apply(state)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.num_qubits() {
            let c = match (self.x(i), self.z(i)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self}; {})", self.bits)
    }
}
