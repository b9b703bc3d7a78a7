use std::fmt;

use rand::RngCore;

use super::schemes::{split_tag, Ciphertext, PkScheme};
use crate::obf::ObfuscatedProgram;
use crate::simcore::{BitString, NamedGate, PauliString, QuantumCircuit, QuantumState};
use crate::{Error, Result};

/// For every tag value `t`, applies `pad(t)` (or its inverse) to `payload`
/// conditioned on `tag = t` and on `controls`.
pub fn append_pad_lookup(
    circuit: &mut QuantumCircuit,
    tag: &[usize],
    payload: &[usize],
    pad: &dyn Fn(&BitString) -> Result<PauliString>,
    inverse: bool,
    controls: &[(usize, bool)],
) -> Result<()> {
    for v in 0..1usize << tag.len() {
        let t = BitString::from_usize(v, tag.len());
        let mut ctl = controls.to_vec();
        ctl.extend(QuantumCircuit::value_controls(tag, &t));
        pad(&t)?.append_to(circuit, payload, &ctl, inverse)?;
    }
    Ok(())
}

/// Adds one (mod `2^k`) to the register `wires`, most significant first.
pub fn increment_tag(
    circuit: &mut QuantumCircuit,
    wires: &[usize],
    controls: &[(usize, bool)],
) -> Result<()> {
    for i in 0..wires.len() {
        let mut ctl = controls.to_vec();
        ctl.extend(wires[i + 1..].iter().map(|&w| (w, true)));
        circuit.mcx(&ctl, wires[i])?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableGate {
    Id,
    X(usize),
    Z(usize),
    H(usize),
    S(usize),
    T(usize),
    Cnot(usize, usize),
    Ccx(usize, usize, usize),
}

impl fmt::Display for TableGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableGate::Id => write!(f, "id"),
            TableGate::X(q) => write!(f, "x {q}"),
            TableGate::Z(q) => write!(f, "z {q}"),
            TableGate::H(q) => write!(f, "h {q}"),
            TableGate::S(q) => write!(f, "s {q}"),
            TableGate::T(q) => write!(f, "t {q}"),
            TableGate::Cnot(c, t) => write!(f, "cx {c} {t}"),
            TableGate::Ccx(a, b, t) => write!(f, "ccx {a} {b} {t}"),
        }
    }
}

impl TableGate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            TableGate::Id => vec![],
            TableGate::X(q)
            | TableGate::Z(q)
            | TableGate::H(q)
            | TableGate::S(q)
            | TableGate::T(q) => {
                vec![q]
            }
            TableGate::Cnot(c, t) => vec![c, t],
            TableGate::Ccx(a, b, t) => vec![a, b, t],
        }
    }

    /// Appends the gate with qubit `i` mapped to `wires[i]`.
    pub fn append_to(
        &self,
        circuit: &mut QuantumCircuit,
        wires: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<()> {
        if let Some(&q) = self.qubits().iter().find(|&&q| q >= wires.len()) {
            return Err(Error::IndexOutOfRange {
                index: q,
                qubits: wires.len(),
            });
        }
        let single = |g: NamedGate, q: usize, c: &mut QuantumCircuit| {
            c.named(g, &[wires[q]], controls).map(|_| ())
        };
        match *self {
            TableGate::Id => Ok(()),
            TableGate::X(q) => single(NamedGate::X, q, circuit),
            TableGate::Z(q) => single(NamedGate::Z, q, circuit),
            TableGate::H(q) => single(NamedGate::H, q, circuit),
            TableGate::S(q) => single(NamedGate::S, q, circuit),
            TableGate::T(q) => single(NamedGate::T, q, circuit),
            TableGate::Cnot(c, t) => {
                let mut ctl = controls.to_vec();
                ctl.push((wires[c], true));
                circuit.mcx(&ctl, wires[t]).map(|_| ())
            }
            TableGate::Ccx(a, b, t) => {
                let mut ctl = controls.to_vec();
                ctl.extend([(wires[a], true), (wires[b], true)]);
                circuit.mcx(&ctl, wires[t]).map(|_| ())
            }
        }
    }
}

/// The finite gate set `U_μ` dispatches over, indexed by a classical
/// description register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateTable {
    width: usize,
    entries: Vec<TableGate>,
}

impl GateTable {
    /// Identity; X, Z, H, S, T on each qubit; CNOT on each ordered pair;
    /// Toffoli on each unordered control pair and third target.
    pub fn standard(width: usize) -> Self {
        let mut entries = vec![TableGate::Id];
        for q in 0..width {
            entries.extend([
                TableGate::X(q),
                TableGate::Z(q),
                TableGate::H(q),
                TableGate::S(q),
                TableGate::T(q),
            ]);
        }
        for c in 0..width {
            for t in 0..width {
                if c != t {
                    entries.push(TableGate::Cnot(c, t));
                }
            }
        }
        for a in 0..width {
            for b in a + 1..width {
                for t in 0..width {
                    if t != a && t != b {
                        entries.push(TableGate::Ccx(a, b, t));
                    }
                }
            }
        }
        Self { width, entries }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TableGate] {
        &self.entries
    }

    /// Width of the description register.
    pub fn index_bits(&self) -> usize {
        (usize::BITS - (self.entries.len().max(2) - 1).leading_zeros()) as usize
    }

    pub fn index_of(&self, gate: &TableGate) -> Option<usize> {
        let g = match *gate {
            TableGate::Ccx(a, b, t) if a > b => TableGate::Ccx(b, a, t),
            g => g,
        };
        self.entries.iter().position(|e| *e == g)
    }

    /// Applies entry `v` to `payload` conditioned on `desc = v`, for every
    /// entry.
    pub fn append_dispatch(
        &self,
        circuit: &mut QuantumCircuit,
        desc: &[usize],
        payload: &[usize],
        controls: &[(usize, bool)],
    ) -> Result<()> {
        if desc.len() != self.index_bits() {
            return Err(Error::LengthMismatch {
                expected: self.index_bits(),
                actual: desc.len(),
            });
        }
        for (v, g) in self.entries.iter().enumerate() {
            let mut ctl = controls.to_vec();
            ctl.extend(QuantumCircuit::value_controls(
                desc,
                &BitString::from_usize(v, desc.len()),
            ));
            g.append_to(circuit, payload, &ctl)?;
        }
        Ok(())
    }
}

/// Keys for homomorphic evaluation: the public-key pair plus an evaluation
/// key, an obfuscation of decrypt, apply a table gate, re-encrypt.
#[derive(Debug)]
pub struct HomKeys {
    pub sk: BitString,
    pub pk: ObfuscatedProgram,
    pub eval: ObfuscatedProgram,
}

#[derive(Clone)]
pub struct HomScheme {
    pk: PkScheme,
    table: GateTable,
}

impl HomScheme {
    pub fn new(pk: PkScheme) -> Self {
        let table = GateTable::standard(pk.base().n());
        Self { pk, table }
    }

    pub fn pk_scheme(&self) -> &PkScheme {
        &self.pk
    }

    pub fn table(&self) -> &GateTable {
        &self.table
    }

    /// Wires: tag `n`, payload `n`, gate description. Re-encryption uses the
    /// tag incremented by one, so the fresh pad is `f_k(r + 1)`.
    pub fn eval_circuit(&self, sk: &BitString) -> Result<QuantumCircuit> {
        let base = self.pk.base();
        let n = base.n();
        let g = self.table.index_bits();
        let tag: Vec<usize> = (0..n).collect();
        let payload: Vec<usize> = (n..2 * n).collect();
        let desc: Vec<usize> = (2 * n..2 * n + g).collect();
        let pad = |t: &BitString| base.pad(sk, t);
        let mut c = QuantumCircuit::new(2 * n + g);
        append_pad_lookup(&mut c, &tag, &payload, &pad, true, &[])?;
        self.table.append_dispatch(&mut c, &desc, &payload, &[])?;
        increment_tag(&mut c, &tag, &[])?;
        append_pad_lookup(&mut c, &tag, &payload, &pad, false, &[])?;
        Ok(c)
    }

    pub fn keygen(&self, rng: &mut dyn RngCore) -> Result<HomKeys> {
        let (sk, pk) = self.pk.keygen(rng)?;
        let coins = BitString::random(self.pk.base().n(), rng);
        let eval = self
            .pk
            .obfuscator()
            .obfuscate(&self.eval_circuit(&sk)?, &coins)?;
        Ok(HomKeys { sk, pk, eval })
    }

    /// Runs the evaluation key on `|r> ⊗ payload ⊗ |G>`.
    pub fn evaluate(
        &self,
        eval: &mut ObfuscatedProgram,
        ct: Ciphertext,
        gate: &TableGate,
    ) -> Result<Ciphertext> {
        let n = self.pk.base().n();
        if ct.payload.num_qubits() != n {
            return Err(Error::DimensionMismatch(format!(
                "evaluation needs a bare {n}-qubit payload, got {}",
                ct.payload.num_qubits()
            )));
        }
        let v = self
            .table
            .index_of(gate)
            .ok_or_else(|| Error::Malformed(format!("gate {gate} is not in the table")))?;
        let desc = BitString::from_usize(v, self.table.index_bits());
        let input = QuantumState::basis(&ct.tag)?
            .tensor(&ct.payload)?
            .tensor(&QuantumState::basis(&desc)?)?;
        let out = eval.interpret(&input)?;
        let keep: Vec<usize> = (0..2 * n).collect();
        let out = out.reduce(&keep, crate::simcore::PRODUCT_TOL)?;
        split_tag(&out, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obf::PlainObfuscator;
    use crate::simcore::{run_circuit, sample_random_state, trace_distance, trial_rng};
    use std::sync::Arc;

    #[test]
    fn table_sizes() {
        assert_eq!(GateTable::standard(2).len(), 13);
        assert_eq!(GateTable::standard(2).index_bits(), 4);
        assert_eq!(GateTable::standard(4).len(), 45);
        assert_eq!(GateTable::standard(4).index_bits(), 6);
        let t = GateTable::standard(3);
        assert_eq!(
            t.index_of(&TableGate::Ccx(2, 0, 1)),
            t.index_of(&TableGate::Ccx(0, 2, 1))
        );
    }

    #[test]
    fn increment_wraps() {
        let mut c = QuantumCircuit::new(3);
        increment_tag(&mut c, &[0, 1, 2], &[]).unwrap();
        for v in 0..8 {
            let out = c.eval_classical(&BitString::from_usize(v, 3)).unwrap();
            assert_eq!(out.to_usize(), (v + 1) % 8);
        }
    }

    #[test]
    fn hom_x_then_h_h() {
        let mut rng = trial_rng(21, 0);
        let s = HomScheme::new(PkScheme::new(2, Arc::new(PlainObfuscator::default())));
        let mut keys = s.keygen(&mut rng).unwrap();
        let zero = QuantumState::zero(2).unwrap();
        let ct = s
            .pk_scheme()
            .encrypt(&mut keys.pk, &zero, &mut rng)
            .unwrap();
        let ct = s.evaluate(&mut keys.eval, ct, &TableGate::X(0)).unwrap();
        let one = QuantumState::basis(&BitString::parse("10").unwrap()).unwrap();
        let got = s
            .pk_scheme()
            .decrypt(&keys.sk, ct.try_clone().unwrap())
            .unwrap();
        assert!(trace_distance(&got, &one).unwrap() < 1e-9);

        let rho = sample_random_state(2, &mut rng).unwrap();
        let mut ct = s.pk_scheme().encrypt(&mut keys.pk, &rho, &mut rng).unwrap();
        for _ in 0..2 {
            ct = s.evaluate(&mut keys.eval, ct, &TableGate::H(1)).unwrap();
        }
        let got = s.pk_scheme().decrypt(&keys.sk, ct).unwrap();
        assert!(trace_distance(&got, &rho).unwrap() < 1e-9);
    }

    #[test]
    fn dispatch_matches_direct_gate() {
        let t = GateTable::standard(2);
        let mut rng = trial_rng(22, 0);
        let psi = sample_random_state(2, &mut rng).unwrap();
        for (v, g) in t.entries().iter().enumerate() {
            let mut disp = QuantumCircuit::new(6);
            t.append_dispatch(&mut disp, &[2, 3, 4, 5], &[0, 1], &[])
                .unwrap();
            disp.set_outputs(vec![0, 1]).unwrap();
            let mut direct = QuantumCircuit::new(2);
            g.append_to(&mut direct, &[0, 1], &[]).unwrap();
            let input = psi
                .tensor(&QuantumState::basis(&BitString::from_usize(v, 4)).unwrap())
                .unwrap();
            let a = run_circuit(&disp, &input).unwrap();
            let b = run_circuit(&direct, &psi).unwrap();
            assert!(trace_distance(&a, &b).unwrap() < 1e-12, "entry {g}");
        }
    }
}
