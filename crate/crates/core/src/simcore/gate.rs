use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Deviation from `U†U = I` tolerated for custom payloads.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NamedGate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Phase(f64),
    Swap,
}

impl NamedGate {
    pub fn num_targets(&self) -> usize {
        match self {
            NamedGate::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NamedGate::I => "i",
            NamedGate::X => "x",
            NamedGate::Y => "y",
            NamedGate::Z => "z",
            NamedGate::H => "h",
            NamedGate::S => "s",
            NamedGate::Sdg => "sdg",
            NamedGate::T => "t",
            NamedGate::Tdg => "tdg",
            NamedGate::Rx(_) => "rx",
            NamedGate::Ry(_) => "ry",
            NamedGate::Rz(_) => "rz",
            NamedGate::Phase(_) => "p",
            NamedGate::Swap => "swap",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match self {
            NamedGate::Rx(t) | NamedGate::Ry(t) | NamedGate::Rz(t) | NamedGate::Phase(t) => {
                Some(*t)
            }
            _ => None,
        }
    }

    pub fn from_name(name: &str, param: Option<f64>) -> Result<Self> {
        let need = |p: Option<f64>| {
            p.ok_or_else(|| Error::InvalidGate(format!("gate `{name}` needs an angle")))
        };
        let g = match name {
            "i" => NamedGate::I,
            "x" => NamedGate::X,
            "y" => NamedGate::Y,
            "z" => NamedGate::Z,
            "h" => NamedGate::H,
            "s" => NamedGate::S,
            "sdg" => NamedGate::Sdg,
            "t" => NamedGate::T,
            "tdg" => NamedGate::Tdg,
            "rx" => NamedGate::Rx(need(param)?),
            "ry" => NamedGate::Ry(need(param)?),
            "rz" => NamedGate::Rz(need(param)?),
            "p" => NamedGate::Phase(need(param)?),
            "swap" => NamedGate::Swap,
            other => return Err(Error::InvalidGate(format!("unknown gate `{other}`"))),
        };
        if g.param().is_none() && param.is_some() {
            return Err(Error::InvalidGate(format!("gate `{name}` takes no angle")));
        }
        Ok(g)
    }

    pub fn inverse(&self) -> Self {
        match *self {
            NamedGate::S => NamedGate::Sdg,
            NamedGate::Sdg => NamedGate::S,
            NamedGate::T => NamedGate::Tdg,
            NamedGate::Tdg => NamedGate::T,
            NamedGate::Rx(t) => NamedGate::Rx(-t),
            NamedGate::Ry(t) => NamedGate::Ry(-t),
            NamedGate::Rz(t) => NamedGate::Rz(-t),
            NamedGate::Phase(t) => NamedGate::Phase(-t),
            g => g,
        }
    }

    /// Row-major matrix.
    pub fn matrix(&self) -> Vec<C64> {
        let c = |re: f64, im: f64| C64::new(re, im);
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        match *self {
            NamedGate::I => vec![o, z, z, o],
            NamedGate::X => vec![z, o, o, z],
            NamedGate::Y => vec![z, c(0.0, -1.0), c(0.0, 1.0), z],
            NamedGate::Z => vec![o, z, z, -o],
            NamedGate::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                vec![h, h, h, -h]
            }
            NamedGate::S => vec![o, z, z, c(0.0, 1.0)],
            NamedGate::Sdg => vec![o, z, z, c(0.0, -1.0)],
            NamedGate::T => vec![o, z, z, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            NamedGate::Tdg => vec![o, z, z, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)],
            NamedGate::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
            }
            NamedGate::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            NamedGate::Rz(t) => vec![
                C64::from_polar(1.0, -t / 2.0),
                z,
                z,
                C64::from_polar(1.0, t / 2.0),
            ],
            NamedGate::Phase(t) => vec![o, z, z, C64::from_polar(1.0, t)],
            NamedGate::Swap => {
                let mut m = vec![z; 16];
                m[0] = o;
                m[6] = o;
                m[9] = o;
                m[15] = o;
                m
            }
        }
    }

    /// True for gates diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            NamedGate::I
                | NamedGate::Z
                | NamedGate::S
                | NamedGate::Sdg
                | NamedGate::T
                | NamedGate::Tdg
                | NamedGate::Rz(_)
                | NamedGate::Phase(_)
        )
    }
}

/// A validated unitary on `k` qubits, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    qubits: usize,
    data: Vec<C64>,
}

impl Unitary {
    pub fn new(qubits: usize, data: Vec<C64>) -> Result<Self> {
        let d = 1usize << qubits;
        if data.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {qubits}-qubit unitary",
                data.len()
            )));
        }
        let m = DMatrix::from_row_slice(d, d, &data);
        let dev = (m.adjoint() * &m - DMatrix::<C64>::identity(d, d)).camax();
        if dev.is_nan() || dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Self { qubits, data })
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix",
                d,
                m.ncols()
            )));
        }
        let data = (0..d)
            .flat_map(|r| (0..d).map(move |c| m[(r, c)]))
            .collect();
        Self::new(d.trailing_zeros() as usize, data)
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = 1 << self.qubits;
        DMatrix::from_row_slice(d, d, &self.data)
    }

    pub fn adjoint(&self) -> Self {
        let d = 1 << self.qubits;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        Self {
            qubits: self.qubits,
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Named(NamedGate),
    Custom(Unitary),
    /// Computational-basis measurement; the outcome stays on the wire.
    Measure,
    /// Trace out the wire; it is left in `|0>`.
    Discard,
    /// Reset the wire to a fresh `|0>`.
    Prepare,
}

impl Op {
    pub fn is_unitary(&self) -> bool {
        matches!(self, Op::Named(_) | Op::Custom(_))
    }

    pub fn num_targets(&self) -> usize {
        match self {
            Op::Named(g) => g.num_targets(),
            Op::Custom(u) => u.num_qubits(),
            _ => 1,
        }
    }

    pub fn matrix(&self) -> Option<Vec<C64>> {
        match self {
            Op::Named(g) => Some(g.matrix()),
            Op::Custom(u) => Some(u.data().to_vec()),
            _ => None,
        }
    }
}

/// An operation on target wires, optionally conditioned on control wires
/// holding given classical values.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    op: Op,
    targets: Vec<usize>,
    controls: Vec<(usize, bool)>,
}

impl Gate {
    pub fn new(op: Op, targets: Vec<usize>, controls: Vec<(usize, bool)>) -> Result<Self> {
        if targets.len() != op.num_targets() {
            return Err(Error::InvalidGate(format!(
                "{} targets given, {} expected",
                targets.len(),
                op.num_targets()
            )));
        }
        let mut wires: Vec<usize> = targets.clone();
        wires.extend(controls.iter().map(|c| c.0));
        let mut sorted = wires.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != wires.len() {
            return Err(Error::InvalidGate("repeated wire in gate".into()));
        }
        Ok(Self {
            op,
            targets,
            controls,
        })
    }

    pub fn op(&self) -> &Op {
        &self.op
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[(usize, bool)] {
        &self.controls
    }

    pub fn max_wire(&self) -> usize {
        self.targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.0))
            .max()
            .unwrap_or(0)
    }

    pub fn touches(&self, wire: usize) -> bool {
        self.targets.contains(&wire) || self.controls.iter().any(|c| c.0 == wire)
    }

    pub(crate) fn remap(&self, map: &[usize]) -> Self {
        Self {
            op: self.op.clone(),
            targets: self.targets.iter().map(|&t| map[t]).collect(),
            controls: self.controls.iter().map(|&(w, v)| (map[w], v)).collect(),
        }
    }

    pub(crate) fn with_extra_controls(&self, extra: &[(usize, bool)]) -> Self {
        let mut g = self.clone();
        g.controls.splice(0..0, extra.iter().copied());
        g
    }

    /// The inverse of a unitary gate.
    pub fn inverse(&self) -> Result<Self> {
        let op = match &self.op {
            Op::Named(g) => Op::Named(g.inverse()),
            Op::Custom(u) => Op::Custom(u.adjoint()),
            _ => return Err(Error::NotUnitary),
        };
        Ok(Self {
            op,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        })
    }
}
