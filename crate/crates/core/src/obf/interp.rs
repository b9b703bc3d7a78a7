use rand::RngCore;

use super::circuits::make_point_circuit;
use super::family::family_circuit;
use super::program::{ObfuscatedProgram, Obfuscator};
use crate::simcore::{
    run_circuit, run_circuit_sampled, run_circuit_with_side, run_circuit_with_side_sampled,
    BitString, QuantumCircuit, QuantumState,
};
use crate::{Error, Result};

/// How a basis-state advice string names a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdviceCodec {
    /// `(flag, a, b)` on `2n + 1` bits: the point circuit `C_{a,b}` when the
    /// flag is set, the identity on `2n` qubits otherwise.
    Point { n: usize },
    /// `(s, a, b, k, r)` on `1 + 4n` bits: a sample of the unobfuscatable
    /// family.
    UnobfFamily { n: usize },
}

impl AdviceCodec {
    pub fn advice_len(&self) -> usize {
        match *self {
            AdviceCodec::Point { n } => 2 * n + 1,
            AdviceCodec::UnobfFamily { n } => 4 * n + 1,
        }
    }

    pub fn decode(&self, advice: &BitString) -> Result<QuantumCircuit> {
        if advice.len() != self.advice_len() {
            return Err(Error::LengthMismatch {
                expected: self.advice_len(),
                actual: advice.len(),
            });
        }
        match *self {
            AdviceCodec::Point { n } => {
                if advice.get(0) {
                    make_point_circuit(&advice.slice(1..n + 1), &advice.slice(n + 1..2 * n + 1))
                } else {
                    Ok(QuantumCircuit::identity(2 * n))
                }
            }
            AdviceCodec::UnobfFamily { n } => family_circuit(
                n,
                advice.get(0),
                &advice.slice(1..n + 1),
                &advice.slice(n + 1..2 * n + 1),
                &advice.slice(2 * n + 1..3 * n + 1),
                &advice.slice(3 * n + 1..4 * n + 1),
            ),
        }
    }

    fn tag(&self) -> String {
        match *self {
            AdviceCodec::Point { n } => format!("point:{n}"),
            AdviceCodec::UnobfFamily { n } => format!("unobf:{n}"),
        }
    }
}

/// The public interpreters a state-form program may name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpreter {
    /// Coherent point-function interpreter `J` on `2n + 1` advice qubits:
    /// XORs `b'` into `y` when the flag is set and `x = a'`. Self-inverse,
    /// and it leaves the advice untouched.
    PointCoherent { n: usize },
    /// Measures the advice in the computational basis, decodes, and runs the
    /// decoded circuit.
    MeasureDispatch(AdviceCodec),
}

impl Interpreter {
    pub fn id(&self) -> String {
        match self {
            Interpreter::PointCoherent { n } => format!("point-coherent:{n}"),
            Interpreter::MeasureDispatch(c) => format!("measure-dispatch:{}", c.tag()),
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownInterpreter(id.to_string());
        let parts: Vec<&str> = id.split(':').collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
        match parts.as_slice() {
            ["point-coherent", n] => Ok(Interpreter::PointCoherent { n: num(n)? }),
            ["measure-dispatch", "point", n] => {
                Ok(Interpreter::MeasureDispatch(AdviceCodec::Point {
                    n: num(n)?,
                }))
            }
            ["measure-dispatch", "unobf", n] => {
                Ok(Interpreter::MeasureDispatch(AdviceCodec::UnobfFamily {
                    n: num(n)?,
                }))
            }
            _ => Err(unknown()),
        }
    }

    pub fn codec(&self) -> AdviceCodec {
        match *self {
            Interpreter::PointCoherent { n } => AdviceCodec::Point { n },
            Interpreter::MeasureDispatch(c) => c,
        }
    }

    pub fn advice_len(&self) -> usize {
        self.codec().advice_len()
    }

    /// The interpreter as a circuit on advice followed by input, when it has
    /// one. Every wire is an output.
    pub fn circuit(&self) -> Result<QuantumCircuit> {
        match *self {
            Interpreter::PointCoherent { n } => Ok(point_interpreter(n)),
            Interpreter::MeasureDispatch(_) => Err(Error::Unsupported(format!(
                "{} is not a unitary circuit",
                self.id()
            ))),
        }
    }

    /// Runs the interpreter on `advice ⊗ input`. With `controlled`, qubit 0
    /// of `input` gates the whole run.
    pub(crate) fn run(
        &self,
        advice: &QuantumState,
        input: &QuantumState,
        controlled: bool,
        rng: Option<&mut dyn RngCore>,
    ) -> Result<QuantumState> {
        if advice.num_qubits() != self.advice_len() {
            return Err(Error::ArityMismatch {
                expected: self.advice_len(),
                actual: advice.num_qubits(),
            });
        }
        match *self {
            Interpreter::PointCoherent { n } => {
                let wrapper = advice_wrapper(
                    &point_interpreter(n),
                    2 * n + 1,
                    input.num_qubits(),
                    controlled,
                );
                let joint = input.tensor(advice)?;
                match rng {
                    Some(r) => Ok(run_circuit_sampled(&wrapper, &joint, r)?.state),
                    None => run_circuit(&wrapper, &joint),
                }
            }
            Interpreter::MeasureDispatch(codec) => {
                let realize = |v: &BitString| -> Result<QuantumCircuit> {
                    let c = codec.decode(v)?;
                    Ok(if controlled { c.controlled_by() } else { c })
                };
                let all: Vec<usize> = (0..advice.num_qubits()).collect();
                match rng {
                    Some(r) => {
                        let v = advice.sample_measurement(&all, r)?;
                        Ok(run_circuit_with_side_sampled(&realize(&v)?, input, r)?.state)
                    }
                    None => {
                        let len = advice.num_qubits();
                        let mut parts = Vec::new();
                        for (i, p) in advice.probabilities().into_iter().enumerate() {
                            if p > 1e-14 {
                                let v = BitString::from_usize(i, len);
                                parts.push((p, run_circuit_with_side(&realize(&v)?, input)?));
                            }
                        }
                        mixture(parts)
                    }
                }
            }
        }
    }
}

fn mixture(parts: Vec<(f64, QuantumState)>) -> Result<QuantumState> {
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().expect("one part").1);
    }
    let total: f64 = parts.iter().map(|p| p.0).sum();
    let mut it = parts.into_iter();
    let (p0, s0) = it
        .next()
        .ok_or_else(|| Error::InvalidState("empty advice".into()))?;
    let mut rho = s0.density() * num_complex::Complex64::new(p0 / total, 0.0);
    for (p, s) in it {
        rho += s.density() * num_complex::Complex64::new(p / total, 0.0);
    }
    QuantumState::from_density(rho)
}

/// `J`: advice `(flag, a', b')` on wires `0..m`, then `x` and `y`.
fn point_interpreter(n: usize) -> QuantumCircuit {
    let m = 2 * n + 1;
    let a = |i: usize| 1 + i;
    let b = |j: usize| 1 + n + j;
    let x = |i: usize| m + i;
    let y = |j: usize| m + n + j;
    let mut c = QuantumCircuit::new(m + 2 * n);
    for i in 0..n {
        c.cx(a(i), x(i)).expect("distinct wires");
    }
    for j in 0..n {
        let mut ctl = vec![(0, true)];
        ctl.extend((0..n).map(|i| (x(i), false)));
        ctl.push((b(j), true));
        c.mcx(&ctl, y(j)).expect("distinct wires");
    }
    for i in 0..n {
        c.cx(a(i), x(i)).expect("distinct wires");
    }
    c
}

/// Lays `j` (advice on its first `m` wires, then the program input) over a
/// register holding the caller's input, then the advice. The caller's input
/// is returned; the advice is traced out.
fn advice_wrapper(
    j: &QuantumCircuit,
    m: usize,
    input_qubits: usize,
    controlled: bool,
) -> QuantumCircuit {
    let c = usize::from(controlled);
    let core = j.arity() - m;
    let mut w = QuantumCircuit::with_ancillas(input_qubits + m, j.ancillas());
    let map: Vec<usize> = (0..j.width())
        .map(|v| {
            if v < m {
                input_qubits + v
            } else if v < m + core {
                c + v - m
            } else {
                input_qubits + m + (v - m - core)
            }
        })
        .collect();
    let ctl: Vec<(usize, bool)> = if controlled { vec![(0, true)] } else { vec![] };
    w.append_controlled(j, &map, &ctl).expect("wrapper fits");
    w.set_outputs((0..input_qubits).collect())
        .expect("outputs in range");
    w
}

/// Encodes a circuit as a computational-basis advice state by searching the
/// codec's range. Only circuits the codec can name are accepted.
#[derive(Clone, Copy, Debug)]
pub struct BasisStateObfuscator {
    interpreter: Interpreter,
    uses: Option<u32>,
}

impl BasisStateObfuscator {
    pub fn new(interpreter: Interpreter) -> Self {
        Self {
            interpreter,
            uses: None,
        }
    }

    pub fn with_uses(mut self, uses: u32) -> Self {
        self.uses = Some(uses);
        self
    }

    pub fn interpreter(&self) -> Interpreter {
        self.interpreter
    }

    /// The advice bits naming `circuit`, if any.
    pub fn find_advice(&self, circuit: &QuantumCircuit) -> Option<BitString> {
        let codec = self.interpreter.codec();
        let len = codec.advice_len();
        let target = circuit.canonical_bytes();
        (0..1usize << len)
            .map(|v| BitString::from_usize(v, len))
            .find(|v| {
                codec
                    .decode(v)
                    .map(|c| c.canonical_bytes() == target)
                    .unwrap_or(false)
            })
    }
}

impl Obfuscator for BasisStateObfuscator {
    fn name(&self) -> &str {
        "basis-state"
    }

    fn obfuscate(
        &self,
        circuit: &QuantumCircuit,
        _randomness: &BitString,
    ) -> Result<ObfuscatedProgram> {
        let advice = self.find_advice(circuit).ok_or_else(|| {
            Error::Unsupported(format!(
                "circuit not encodable by {}",
                self.interpreter.id()
            ))
        })?;
        Ok(ObfuscatedProgram::from_state(
            QuantumState::basis(&advice)?,
            self.interpreter.id(),
            circuit.arity(),
            self.uses,
        ))
    }

    fn size_bound(&self, _circuit: &QuantumCircuit) -> usize {
        self.interpreter.advice_len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obf::PlainObfuscator;
    use crate::simcore::trace_distance;

    fn bits(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn ids_roundtrip() {
        for i in [
            Interpreter::PointCoherent { n: 3 },
            Interpreter::MeasureDispatch(AdviceCodec::Point { n: 2 }),
            Interpreter::MeasureDispatch(AdviceCodec::UnobfFamily { n: 2 }),
        ] {
            assert_eq!(Interpreter::from_id(&i.id()).unwrap(), i);
        }
        assert!(matches!(
            Interpreter::from_id("grover:4"),
            Err(Error::UnknownInterpreter(_))
        ));
    }

    #[test]
    fn state_forms_match_description_form() {
        let c = make_point_circuit(&bits("10"), &bits("11")).unwrap();
        let mut plain = PlainObfuscator::default().obfuscate(&c, &bits("")).unwrap();
        for interp in [
            Interpreter::PointCoherent { n: 2 },
            Interpreter::MeasureDispatch(AdviceCodec::Point { n: 2 }),
        ] {
            let mut p = BasisStateObfuscator::new(interp)
                .obfuscate(&c, &bits(""))
                .unwrap();
            assert!(!p.is_description());
            for x in 0..16 {
                let input = QuantumState::basis(&BitString::from_usize(x, 4)).unwrap();
                let a = p.interpret(&input).unwrap();
                let b = plain.interpret(&input).unwrap();
                assert!(trace_distance(&a, &b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_interpreter_keeps_superpositions() {
        let c = make_point_circuit(&bits("1"), &bits("1")).unwrap();
        let mut p = BasisStateObfuscator::new(Interpreter::PointCoherent { n: 1 })
            .obfuscate(&c, &bits(""))
            .unwrap();
        // |+>|0> -> (|00> + |11>)/sqrt 2, still pure.
        let input = QuantumState::plus()
            .tensor(&QuantumState::zero(1).unwrap())
            .unwrap();
        let out = p.interpret(&input).unwrap();
        assert!(out.purity() > 1.0 - 1e-12);
        let p = out.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uncodable_circuit_rejected() {
        let mut c = QuantumCircuit::new(2);
        c.h(0).unwrap();
        let o = BasisStateObfuscator::new(Interpreter::PointCoherent { n: 1 });
        assert!(o.obfuscate(&c, &bits("")).is_err());
    }
}
