use super::interp::Interpreter;
use crate::simcore::{BitString, Gate, QuantumCircuit};
use crate::{Error, Result};

/// `U_{a,b}` for equal-length `a` and `b`.
pub fn make_point_circuit(a: &BitString, b: &BitString) -> Result<QuantumCircuit> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    make_point_circuit_general(a, b)
}

/// `|x, y> -> |x, y ⊕ b>` if `x = a`, on `|a| + |b|` qubits.
pub fn make_point_circuit_general(a: &BitString, b: &BitString) -> Result<QuantumCircuit> {
    let n = a.len();
    let mut c = QuantumCircuit::new(n + b.len());
    let xs: Vec<usize> = (0..n).collect();
    let controls = QuantumCircuit::value_controls(&xs, a);
    for j in 0..b.len() {
        if b.get(j) {
            c.mcx(&controls, n + j)?;
        }
    }
    Ok(c)
}

/// `D'_{a,b}` over the coherent point interpreter with `m`-qubit advice.
///
/// Wires: advice `0..m`, work `x` and `y` (`n` each), then the output qubit.
/// `x` is loaded with `a`, the interpreter runs, `y` is compared with `b`,
/// and the interpreter runs again to clear `y`. The only output is the
/// flag qubit.
pub fn make_checker_circuit(a: &BitString, b: &BitString, m: usize) -> Result<QuantumCircuit> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if m != 2 * n + 1 {
        return Err(Error::UnknownInterpreter(format!(
            "no interpreter registered for {m}-qubit advice at n = {n}"
        )));
    }
    let j = Interpreter::PointCoherent { n }.circuit()?;
    let mut c = QuantumCircuit::with_ancillas(m, 2 * n + 1);
    let x = m;
    let y = m + n;
    let out = m + 2 * n;
    for i in 0..n {
        if a.get(i) {
            c.x(x + i)?;
        }
    }
    let map: Vec<usize> = (0..m + 2 * n).collect();
    c.append(&j, &map)?;
    let ys: Vec<usize> = (y..y + n).collect();
    c.mcx(&QuantumCircuit::value_controls(&ys, b), out)?;
    c.append(&j, &map)?;
    c.set_outputs(vec![out])?;
    Ok(c)
}

/// `C_0 # C_1 # ...`: a selector register picks the branch.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedCircuit {
    selector_width: usize,
    branches: Vec<QuantumCircuit>,
}

/// Combines at least two branches of equal arity whose outputs are their
/// inputs in order. Branch ancillas are shared.
pub fn combine(branches: Vec<QuantumCircuit>) -> Result<CombinedCircuit> {
    if branches.len() < 2 {
        return Err(Error::InvalidConfig(
            "combine needs at least two branches".into(),
        ));
    }
    let arity = branches[0].arity();
    for b in &branches {
        if b.arity() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                actual: b.arity(),
            });
        }
        if !b.outputs().iter().copied().eq(0..arity) {
            return Err(Error::DimensionMismatch(
                "branch outputs must be its inputs in order".into(),
            ));
        }
    }
    let selector_width = (usize::BITS - (branches.len() - 1).leading_zeros()) as usize;
    Ok(CombinedCircuit {
        selector_width,
        branches,
    })
}

impl CombinedCircuit {
    pub fn selector_width(&self) -> usize {
        self.selector_width
    }

    pub fn branches(&self) -> &[QuantumCircuit] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> Option<&QuantumCircuit> {
        self.branches.get(i)
    }

    /// Arity of each branch (without the selector).
    pub fn branch_arity(&self) -> usize {
        self.branches[0].arity()
    }

    /// Selector on wires `0..selector_width`, then the branch register.
    /// Unused selector values act as the identity.
    pub fn to_circuit(&self) -> Result<QuantumCircuit> {
        let s = self.selector_width;
        let arity = self.branch_arity();
        let anc = self
            .branches
            .iter()
            .map(|b| b.ancillas())
            .max()
            .unwrap_or(0);
        let mut c = QuantumCircuit::with_ancillas(s + arity, anc);
        let sel: Vec<usize> = (0..s).collect();
        for (i, b) in self.branches.iter().enumerate() {
            let map: Vec<usize> = (0..b.width()).map(|w| s + w).collect();
            let ctl = QuantumCircuit::value_controls(&sel, &BitString::from_usize(i, s));
            c.append_controlled(b, &map, &ctl)?;
        }
        Ok(c)
    }
}

/// Recovers branch `index` from a flattened combined circuit: the gates
/// whose leading controls select it, with the selector stripped.
pub fn branch_from_circuit(
    circuit: &QuantumCircuit,
    selector_width: usize,
    index: usize,
) -> Result<QuantumCircuit> {
    let s = selector_width;
    let arity = circuit
        .arity()
        .checked_sub(s)
        .ok_or_else(|| Error::Malformed("circuit narrower than its selector".into()))?;
    let mut out = QuantumCircuit::with_ancillas(arity, circuit.ancillas());
    let want = BitString::from_usize(index, s);
    for g in circuit.gates() {
        let ctl = g.controls();
        if ctl.len() < s || (0..s).any(|i| ctl[i].0 != i) {
            return Err(Error::Malformed("gate without selector controls".into()));
        }
        if (0..s).any(|i| ctl[i].1 != want.get(i)) {
            continue;
        }
        let controls = ctl[s..].iter().map(|&(w, v)| (w - s, v)).collect();
        let targets = g.targets().iter().map(|&w| w - s).collect();
        out.push(Gate::new(g.op().clone(), targets, controls)?)?;
    }
    Ok(out)
}
