use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::circuits::branch_from_circuit;
use super::family::{FamilyLayout, SELECTOR_B, SELECTOR_E, SELECTOR_HOM, SELECTOR_MAIN};
use super::interp::{BasisStateObfuscator, Interpreter};
use super::program::{ObfuscatedProgram, ProgramForm};
use crate::qenc::{GateTable, TableGate};
use crate::simcore::{
    BitString, CountingOracle, NamedGate, Op, QuantumCircuit, QuantumState, PRODUCT_TOL,
};
use crate::{Error, Result};

/// Report of an unobfuscatable-family experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub family: String,
    pub n: usize,
    pub samples: usize,
    #[serde(rename = "p_accept_F")]
    pub p_accept_f: f64,
    #[serde(rename = "p_accept_G")]
    pub p_accept_g: f64,
    pub gap: f64,
    pub baseline_q: usize,
    pub baseline_advantage: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomAttackOutcome {
    /// `true` when branch 0 looks like the point circuit.
    pub guess: bool,
    /// Interpretations consumed across all copies.
    pub interpretations: usize,
    /// Gates of branch 0 evaluated under Hom.
    pub gates: usize,
}

/// Rewrites a circuit of X, CNOT and Toffoli gates (controls of either
/// polarity) plus uncontrolled Z, H, S, T into table entries.
pub fn compile_to_table(circuit: &QuantumCircuit, table: &GateTable) -> Result<Vec<TableGate>> {
    let w = table.width();
    let mut out = Vec::new();
    for g in circuit.gates() {
        let t = g.targets()[0];
        let ctl = g.controls();
        if t >= w || ctl.iter().any(|c| c.0 >= w) {
            return Err(Error::Unsupported(
                "gate outside the plaintext register".into(),
            ));
        }
        let named = match g.op() {
            Op::Named(n) => *n,
            _ => return Err(Error::Unsupported("only named gates compile".into())),
        };
        let flips: Vec<TableGate> = ctl
            .iter()
            .filter(|c| !c.1)
            .map(|c| TableGate::X(c.0))
            .collect();
        let core = match (named, ctl) {
            (NamedGate::I, []) => continue,
            (NamedGate::X, []) => TableGate::X(t),
            (NamedGate::Z, []) => TableGate::Z(t),
            (NamedGate::H, []) => TableGate::H(t),
            (NamedGate::S, []) => TableGate::S(t),
            (NamedGate::T, []) => TableGate::T(t),
            (NamedGate::X, [c]) => TableGate::Cnot(c.0, t),
            (NamedGate::X, [c1, c2]) => TableGate::Ccx(c1.0, c2.0, t),
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} with {} controls is not in the gate table",
                    named.name(),
                    ctl.len()
                )))
            }
        };
        out.extend(flips.iter().copied());
        out.push(core);
        out.extend(flips);
    }
    if let Some(g) = out.iter().find(|g| table.index_of(g).is_none()) {
        return Err(Error::Unsupported(format!("{g} is not in the gate table")));
    }
    Ok(out)
}

fn head(l: &FamilyLayout, selector: usize, desc: usize) -> BitString {
    BitString::from_usize(selector, l.selector_width())
        .concat(&BitString::from_usize(desc, l.desc().len()))
}

fn block_state(
    out: &QuantumState,
    l: &FamilyLayout,
    wires: std::ops::Range<usize>,
) -> Result<QuantumState> {
    let s = l.selector_width();
    let keep: Vec<usize> = wires.map(|w| w + s).collect();
    out.reduce(&keep, PRODUCT_TOL)
}

/// The gate-by-gate attack on a family sample.
///
/// `copies[0]` is interpreted `|G| + 3` times: two E queries (for `Enc(a)`
/// and `Enc(0^n)`), one Hom query per gate of branch 0, and one B query.
/// A description-form program reveals branch 0 directly. A state-form
/// program needs a second copy, whose advice is measured once through the
/// interpreter's public first stage to read branch 0.
pub fn adversary_homomorphic(
    copies: &mut [ObfuscatedProgram],
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<HomAttackOutcome> {
    let l = FamilyLayout::new(n);
    let first = copies
        .first()
        .ok_or(Error::InsufficientCopies { need: 1, got: 0 })?;
    if first.arity() != l.program_arity() {
        return Err(Error::ArityMismatch {
            expected: l.program_arity(),
            actual: first.arity(),
        });
    }
    let mut used = 0;
    let program = match first.form() {
        ProgramForm::Description(_) => first.circuit()?,
        ProgramForm::State { interpreter, .. } => {
            if !matches!(
                Interpreter::from_id(interpreter)?,
                Interpreter::MeasureDispatch(_)
            ) {
                return Err(Error::Unsupported(format!(
                    "interpreter {interpreter} exposes no measurement stage"
                )));
            }
            let second = copies
                .get_mut(1)
                .ok_or(Error::InsufficientCopies { need: 2, got: 1 })?;
            used += 1;
            second.measure_advice(rng)?
        }
    };
    let main = branch_from_circuit(&program, l.selector_width(), SELECTOR_MAIN)?;
    let table = l.table();
    let gates = compile_to_table(&main, &table)?;

    let p = &mut copies[0];
    let need = gates.len() + 3;
    if let Some(have) = p.uses_remaining() {
        if (have as usize) < need {
            return Err(Error::UsesExhausted);
        }
    }
    let rest = QuantumState::zero(4 * n)?;
    let x_block = l.x_tag().start..l.x_payload().end;
    let flag = 1 << (l.desc().len() - 1);

    let out = p.interpret(&QuantumState::basis(&head(&l, SELECTOR_E, 0))?.tensor(&rest)?)?;
    let enc_a = block_state(&out, &l, x_block.clone())?;
    let out = p.interpret(&QuantumState::basis(&head(&l, SELECTOR_E, flag))?.tensor(&rest)?)?;
    let enc_0 = block_state(&out, &l, x_block)?;
    let mut sigma = enc_a.tensor(&enc_0)?;
    used += 2;

    for g in &gates {
        let v = table.index_of(g).expect("compiled gates are in the table");
        let out = p.interpret(&QuantumState::basis(&head(&l, SELECTOR_HOM, v))?.tensor(&sigma)?)?;
        sigma = block_state(&out, &l, l.blocks())?;
        used += 1;
    }

    let out = p.interpret_sampled(
        &QuantumState::basis(&head(&l, SELECTOR_B, 0))?.tensor(&sigma)?,
        rng,
    )?;
    used += 1;
    let s = l.selector_width();
    let yp: Vec<usize> = l.y_payload().map(|w| w + s).collect();
    let a_guess = out.sample_measurement(&yp, rng)?;

    let probe = a_guess.concat(&BitString::zeros(main.arity() - n));
    let image = main.eval_classical(&probe)?;
    Ok(HomAttackOutcome {
        guess: !image.slice(n..2 * n).is_zero(),
        interpretations: used,
        gates: gates.len(),
    })
}

/// The checker adversary: feeds a basis-state encoding of `u` (a program
/// for a point circuit or the identity on `2n` qubits) to `checker`, an
/// obfuscation of `D'_{a,b}`, and reports the output qubit.
pub fn adversary_checker(
    u: &ObfuscatedProgram,
    checker: &mut ObfuscatedProgram,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<bool> {
    let point = Interpreter::PointCoherent { n };
    let advice = match u.form() {
        ProgramForm::Description(_) => {
            let c = u.circuit()?;
            let bits = BasisStateObfuscator::new(point)
                .find_advice(&c)
                .ok_or_else(|| Error::Unsupported("program is not a point circuit".into()))?;
            QuantumState::basis(&bits)?
        }
        ProgramForm::State {
            advice,
            interpreter,
        } => {
            if Interpreter::from_id(interpreter)?.codec() != point.codec() {
                return Err(Error::Unsupported(format!(
                    "advice for {interpreter} is not point advice"
                )));
            }
            advice.clone()
        }
    };
    let out = checker.interpret(&advice)?;
    Ok(out.sample_measurement(&[0], rng)?.get(0))
}

/// Random-probe black-box baseline against the first oracle, which takes
/// `x` then `y` on `2n` qubits. Spends exactly `q` basis queries at uniform
/// points (or at `hint` when given) and answers `true` ("not the identity")
/// as soon as one changes its input. With no evidence it guesses, unless it
/// probed the hinted point.
pub fn blackbox_baseline(
    oracles: &mut [CountingOracle],
    q: usize,
    rng: &mut dyn RngCore,
    hint: Option<&BitString>,
) -> Result<bool> {
    let oracle = oracles
        .first_mut()
        .ok_or_else(|| Error::InvalidConfig("baseline needs an oracle".into()))?;
    let width = oracle.arity();
    let n = width / 2;
    let start = oracle.queries();
    let mut hit = false;
    for _ in 0..q {
        let x = match hint {
            Some(h) => h.clone(),
            None => BitString::random(n, rng),
        };
        let input = x.concat(&BitString::zeros(width - n));
        if oracle.query_basis(&input)? != input {
            hit = true;
        }
    }
    let spent = oracle.queries() - start;
    if spent != q {
        return Err(Error::BudgetExceeded(spent));
    }
    // A miss at the known point is conclusive; a miss at random points is not.
    Ok(hit || ((hint.is_none() || q == 0) && rng.random()))
}
