//! Public-key quantum money from an obfuscated reflection.
//!
//! A bill is a Haar-random note `|ψ>` together with an obfuscation of
//! `U_ψ = I − 2|ψ><ψ|`. Anyone holding the verifier checks a candidate by
//! phase kickback: `|0>` ancilla, `H`, controlled-`U_ψ`, `H`, and accept on
//! reading `1`. The accept probability is `|<ψ|φ>|²` and an accepted note
//! comes back intact, so verification can be repeated.
//!
//! The only obfuscator shipped here is the plain one, which hands the
//! reflection out in the clear. That makes forging trivial for anyone who
//! reads the description; the counterfeiting experiment below therefore
//! talks to the verifier only through a [`CountingOracle`].

use std::collections::HashSet;
use std::fmt;
use std::sync::Mutex;

use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::obf::{ObfuscatedProgram, Obfuscator};
use crate::simcore::{
    fidelity, run_circuit, sample_random_state, BitString, CountingOracle, QuantumCircuit,
    QuantumState, Unitary, C64,
};
use crate::{Error, Result};

/// Largest note the explicit reflection matrix is built for.
pub const MAX_NOTE_QUBITS: usize = 6;
const OBF_COINS: usize = 64;

/// A minted bill. There is deliberately no `Clone`.
pub struct Bill {
    note: QuantumState,
    verifier: ObfuscatedProgram,
    serial: u64,
}

impl Bill {
    pub fn note(&self) -> &QuantumState {
        &self.note
    }

    pub fn verifier(&self) -> &ObfuscatedProgram {
        &self.verifier
    }

    pub fn verifier_mut(&mut self) -> &mut ObfuscatedProgram {
        &mut self.verifier
    }

    pub fn serial(&self) -> u64 {
        self.serial
    }

    pub fn num_qubits(&self) -> usize {
        self.note.num_qubits()
    }

    /// Verifies the bill's own note, replacing it with the post-accept state.
    pub fn self_check(&mut self) -> Result<f64> {
        let v = verify(&mut self.verifier, &self.note)?;
        if let Some(post) = v.accepted {
            self.note = post;
        }
        Ok(v.accept_prob)
    }

    pub fn into_parts(self) -> (QuantumState, ObfuscatedProgram, u64) {
        (self.note, self.verifier, self.serial)
    }
}

impl fmt::Debug for Bill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bill")
            .field("serial", &format_args!("{:016x}", self.serial))
            .field("qubits", &self.note.num_qubits())
            .finish_non_exhaustive()
    }
}

/// `I − 2|ψ><ψ|` for a pure `ψ`.
pub fn reflection(psi: &QuantumState) -> Result<Unitary> {
    let v = psi
        .amplitudes()
        .ok_or_else(|| Error::InvalidState("reflection needs a pure state".into()))?;
    let d = v.len();
    let m = DMatrix::<C64>::identity(d, d) - (v * v.adjoint()).scale(2.0);
    Unitary::from_matrix(&m)
}

pub fn reflection_circuit(psi: &QuantumState) -> Result<QuantumCircuit> {
    let n = psi.num_qubits();
    let mut c = QuantumCircuit::new(n);
    let wires: Vec<usize> = (0..n).collect();
    c.custom(reflection(psi)?, &wires, &[])?;
    Ok(c)
}

fn check_note_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidState(
            "a note needs at least one qubit".into(),
        ));
    }
    if n > MAX_NOTE_QUBITS {
        return Err(Error::TooLarge {
            qubits: n,
            limit: MAX_NOTE_QUBITS,
            mode: "reflection",
        });
    }
    Ok(())
}

/// Samples `ψ`, obfuscates `U_ψ` and attaches a random serial.
pub fn mint(n: usize, obf: &dyn Obfuscator, rng: &mut dyn RngCore) -> Result<Bill> {
    check_note_size(n)?;
    let note = sample_random_state(n, rng)?;
    let coins = BitString::random(OBF_COINS, rng);
    let verifier = obf.obfuscate(&reflection_circuit(&note)?, &coins)?;
    let serial = rng.next_u64();
    Ok(Bill {
        note,
        verifier,
        serial,
    })
}

/// Issued-serial registry standing in for bank authentication.
#[derive(Debug, Default)]
pub struct Bank {
    issued: Mutex<HashSet<u64>>,
}

impl Bank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mints and registers a bill, redrawing on a serial collision.
    pub fn mint(&self, n: usize, obf: &dyn Obfuscator, rng: &mut dyn RngCore) -> Result<Bill> {
        loop {
            let bill = mint(n, obf, rng)?;
            if self.lock().insert(bill.serial) {
                return Ok(bill);
            }
        }
    }

    pub fn is_issued(&self, serial: u64) -> bool {
        self.lock().contains(&serial)
    }

    pub fn issued_count(&self) -> usize {
        self.lock().len()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashSet<u64>> {
        // The set stays consistent even if a holder panicked.
        self.issued.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Outcome distribution of one verification.
#[derive(Clone, Debug)]
pub struct Verification {
    pub accept_prob: f64,
    /// Candidate register conditioned on accept, if that has weight.
    pub accepted: Option<QuantumState>,
    /// Candidate register conditioned on reject, if that has weight.
    pub rejected: Option<QuantumState>,
}

fn hadamard_on_ancilla(width: usize) -> Result<QuantumCircuit> {
    let mut h = QuantumCircuit::new(width);
    h.h(0)?;
    Ok(h)
}

/// Runs the kickback test on `candidate`. Costs one use of the verifier.
pub fn verify(verifier: &mut ObfuscatedProgram, candidate: &QuantumState) -> Result<Verification> {
    let n = candidate.num_qubits();
    if n != verifier.arity() {
        return Err(Error::ArityMismatch {
            expected: verifier.arity(),
            actual: n,
        });
    }
    let h = hadamard_on_ancilla(n + 1)?;
    let start = QuantumState::zero(1)?.tensor(candidate)?;
    let kicked = verifier.interpret_controlled(&run_circuit(&h, &start)?)?;
    let out = run_circuit(&h, &kicked)?;
    let (accept_prob, accepted) = out.postselect(0, true)?;
    let (_, rejected) = out.postselect(0, false)?;
    Ok(Verification {
        accept_prob: accept_prob.clamp(0.0, 1.0),
        accepted,
        rejected,
    })
}

/// As [`verify`], sampling the ancilla: the accept bit and the collapsed
/// candidate register.
pub fn verify_sampled(
    verifier: &mut ObfuscatedProgram,
    candidate: &QuantumState,
    rng: &mut dyn RngCore,
) -> Result<(bool, QuantumState)> {
    let v = verify(verifier, candidate)?;
    let u: f64 = rand::Rng::random(rng);
    let accept = u < v.accept_prob;
    let post = if accept { v.accepted } else { v.rejected };
    let post = post.ok_or_else(|| Error::InvalidState("sampled a zero-weight branch".into()))?;
    Ok((accept, post))
}

/// Black-box access to the verifier: the controlled reflection, with the
/// control on wire 0.
pub fn verifier_oracle(verifier: &ObfuscatedProgram) -> Result<CountingOracle> {
    Ok(CountingOracle::new(verifier.circuit()?.controlled_by()))
}

/// Naive forging strategies. Each one spends at most `q` oracle queries.
#[derive(Clone, Debug)]
pub enum Strategy {
    /// Probe `q` Haar-random states and keep the one with the highest
    /// acceptance. Reads exact acceptance probabilities, which is more than
    /// a single measurement would give.
    RandomProbe,
    /// Probe computational basis states `0, 1, ...` and keep the best one.
    BasisProbe,
    /// The forger is handed `ψ`; a sanity check for the scoring.
    OutOfBand(QuantumState),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::RandomProbe => "random-probe",
            Strategy::BasisProbe => "basis-probe",
            Strategy::OutOfBand(_) => "out-of-band",
        }
    }
}

fn kickback_accept(oracle: &mut CountingOracle, probe: &QuantumState) -> Result<f64> {
    let h = hadamard_on_ancilla(probe.num_qubits() + 1)?;
    let start = run_circuit(&h, &QuantumState::zero(1)?.tensor(probe)?)?;
    let out = run_circuit(&h, &oracle.apply(&start)?)?;
    Ok(out.marginal_probabilities(&[0])?[1])
}

/// Produces a candidate clone using only `oracle` (the controlled
/// reflection) and at most `q` queries.
pub fn forge(
    oracle: &mut CountingOracle,
    q: usize,
    strategy: &Strategy,
    rng: &mut dyn RngCore,
) -> Result<QuantumState> {
    let n = oracle.arity() - 1;
    let start = oracle.queries();
    let clone = match strategy {
        Strategy::OutOfBand(psi) => psi.clone(),
        Strategy::RandomProbe => {
            let mut best = sample_random_state(n, rng)?;
            let mut best_p = if q > 0 {
                kickback_accept(oracle, &best)?
            } else {
                0.0
            };
            for _ in 1..q {
                let probe = sample_random_state(n, rng)?;
                let p = kickback_accept(oracle, &probe)?;
                if p > best_p {
                    best = probe;
                    best_p = p;
                }
            }
            best
        }
        Strategy::BasisProbe => {
            let (mut best, mut best_p) = (0usize, f64::NEG_INFINITY);
            for i in 0..q.min(1 << n) {
                let p =
                    kickback_accept(oracle, &QuantumState::basis(&BitString::from_usize(i, n))?)?;
                if p > best_p {
                    best = i;
                    best_p = p;
                }
            }
            QuantumState::basis(&BitString::from_usize(best, n))?
        }
    };
    if oracle.queries() - start > q {
        return Err(Error::BudgetExceeded(q));
    }
    Ok(clone)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterfeitOutcome {
    pub n: usize,
    pub q: usize,
    pub strategy: String,
    pub fidelity: f64,
    pub queries_used: usize,
}

/// Runs `strategy` against `oracle` and scores the clone against the true
/// note `psi`, which the strategy never sees.
pub fn counterfeit_experiment(
    oracle: &mut CountingOracle,
    psi: &QuantumState,
    q: usize,
    strategy: &Strategy,
    rng: &mut dyn RngCore,
) -> Result<CounterfeitOutcome> {
    let before = oracle.queries();
    let clone = forge(oracle, q, strategy, rng)?;
    Ok(CounterfeitOutcome {
        n: psi.num_qubits(),
        q,
        strategy: strategy.name().to_owned(),
        fidelity: fidelity(&clone, psi)?,
        queries_used: oracle.queries() - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obf::PlainObfuscator;
    use crate::simcore::trial_rng;

    fn overlap(a: &QuantumState, b: &QuantumState) -> C64 {
        a.amplitudes().unwrap().dotc(b.amplitudes().unwrap())
    }

    /// `ψ⊥` built by Gram-Schmidt against a random vector.
    fn orthogonal_to(psi: &QuantumState, rng: &mut dyn RngCore) -> QuantumState {
        let r = sample_random_state(psi.num_qubits(), rng).unwrap();
        let p = psi.amplitudes().unwrap();
        let ov = p.dotc(r.amplitudes().unwrap());
        let v = r.amplitudes().unwrap() - p * ov;
        QuantumState::from_amplitudes_normalized(v.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn verifier_reflects_the_note() {
        let mut rng = trial_rng(1, 0);
        let bill = mint(3, &PlainObfuscator::default(), &mut rng).unwrap();
        let u = bill.verifier().circuit().unwrap();
        let out = run_circuit(&u, bill.note()).unwrap();
        let sum = out.amplitudes().unwrap() + bill.note().amplitudes().unwrap();
        assert!(sum.norm() < 1e-9);

        let perp = orthogonal_to(bill.note(), &mut rng);
        let fixed = run_circuit(&u, &perp).unwrap();
        assert!((overlap(&perp, &fixed) - C64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn serials_and_notes_differ() {
        let obf = PlainObfuscator::default();
        let a = mint(2, &obf, &mut trial_rng(2, 0)).unwrap();
        let b = mint(2, &obf, &mut trial_rng(2, 1)).unwrap();
        assert_ne!(a.serial(), b.serial());
        assert!(fidelity(a.note(), b.note()).unwrap() < 1.0);
    }

    #[test]
    fn oversize_notes_rejected() {
        let err = mint(7, &PlainObfuscator::default(), &mut trial_rng(0, 0)).unwrap_err();
        assert!(matches!(err, Error::TooLarge { limit: 6, .. }));
    }

    #[test]
    fn accept_probabilities() {
        let mut rng = trial_rng(3, 0);
        let mut bill = mint(3, &PlainObfuscator::default(), &mut rng).unwrap();
        let note = bill.note().clone();
        let perp = orthogonal_to(&note, &mut rng);

        let genuine = verify(bill.verifier_mut(), &note).unwrap();
        assert!((genuine.accept_prob - 1.0).abs() < 1e-9);
        assert!(fidelity(genuine.accepted.as_ref().unwrap(), &note).unwrap() > 1.0 - 1e-9);

        assert!(verify(bill.verifier_mut(), &perp).unwrap().accept_prob < 1e-9);

        let half: Vec<C64> = note
            .amplitudes()
            .unwrap()
            .iter()
            .zip(perp.amplitudes().unwrap().iter())
            .map(|(a, b)| (a + b) / 2f64.sqrt())
            .collect();
        let half = QuantumState::from_amplitudes(half).unwrap();
        assert!((verify(bill.verifier_mut(), &half).unwrap().accept_prob - 0.5).abs() < 1e-9);
    }

    #[test]
    fn mixed_candidates_and_arity() {
        let mut rng = trial_rng(4, 0);
        let mut bill = mint(2, &PlainObfuscator::default(), &mut rng).unwrap();
        let mixed = QuantumState::maximally_mixed(2).unwrap();
        assert!((verify(bill.verifier_mut(), &mixed).unwrap().accept_prob - 0.25).abs() < 1e-9);
        let wrong = QuantumState::zero(3).unwrap();
        assert!(matches!(
            verify(bill.verifier_mut(), &wrong),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn finite_verifier_runs_out() {
        let mut rng = trial_rng(5, 0);
        let mut bill = mint(2, &PlainObfuscator::with_uses(2), &mut rng).unwrap();
        assert!(bill.self_check().is_ok());
        assert!(bill.self_check().is_ok());
        assert!(matches!(bill.self_check(), Err(Error::UsesExhausted)));
    }

    #[test]
    fn bank_tracks_serials() {
        let bank = Bank::new();
        let bill = bank
            .mint(1, &PlainObfuscator::default(), &mut trial_rng(6, 0))
            .unwrap();
        assert!(bank.is_issued(bill.serial()));
        assert!(!bank.is_issued(bill.serial().wrapping_add(1)));
        assert_eq!(bank.issued_count(), 1);
    }

    #[test]
    fn forging_strategies() {
        let mut rng = trial_rng(7, 0);
        let bill = mint(3, &PlainObfuscator::default(), &mut rng).unwrap();
        let psi = bill.note().clone();

        let mut oracle = verifier_oracle(bill.verifier()).unwrap();
        let oob = Strategy::OutOfBand(psi.clone());
        let out = counterfeit_experiment(&mut oracle, &psi, 0, &oob, &mut rng).unwrap();
        assert!((out.fidelity - 1.0).abs() < 1e-12);
        assert_eq!(out.queries_used, 0);

        let out =
            counterfeit_experiment(&mut oracle, &psi, 8, &Strategy::BasisProbe, &mut rng).unwrap();
        let best = psi.probabilities().into_iter().fold(0.0, f64::max);
        assert!((out.fidelity - best).abs() < 1e-9);
        assert!(out.fidelity < 1.0);
        assert_eq!(out.queries_used, 8);

        let out =
            counterfeit_experiment(&mut oracle, &psi, 5, &Strategy::RandomProbe, &mut rng).unwrap();
        assert_eq!(out.queries_used, 5);
    }

    #[test]
    fn sampled_verification_of_genuine_note_accepts() {
        let mut rng = trial_rng(8, 0);
        let mut bill = mint(2, &PlainObfuscator::default(), &mut rng).unwrap();
        let note = bill.note().clone();
        let (ok, post) = verify_sampled(bill.verifier_mut(), &note, &mut rng).unwrap();
        assert!(ok);
        assert!(fidelity(&post, &note).unwrap() > 1.0 - 1e-9);
    }
}
