//! Witness encryption over a toy QMA-style verifier.
//!
//! The ciphertext for instance `x` and plaintext `ρ` is an obfuscation of
//! `Q_{x,ρ}`: run the verifier on the witness, and if it accepts swap a
//! freshly prepared copy of `ρ` into the output register, which otherwise
//! stays `|0^m>`.
//!
//! The toy language is "close to a hidden target state `|τ>`". The verifier
//! undoes the preparation of `τ` and flags all-zero. A yes-instance copies
//! the flag to the accept qubit; a no-instance only rotates the accept qubit
//! by a small angle, so no witness is accepted with probability above
//! `2^{-(n+1)}`.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::obf::{ObfuscatedProgram, Obfuscator};
use crate::simcore::{
    run_circuit, sample_random_state, state_prep_unitary, BitString, NamedGate, QuantumCircuit,
    QuantumState, Unitary, C64,
};
use crate::{Error, Result};

/// Largest plaintext, in qubits.
pub const MAX_PAYLOAD_QUBITS: usize = 3;
/// Largest witness register.
pub const MAX_WITNESS_QUBITS: usize = 4;
const OBF_COINS: usize = 64;

#[derive(Clone, Debug)]
pub enum InstanceKind {
    /// Carries the canonical witness `|τ>`.
    Yes {
        witness: QuantumState,
    },
    No,
}

/// Verifier circuit on an `n`-qubit witness. Wire `n` is the zero-test flag,
/// wire `n + 1` the accept qubit and the only output.
#[derive(Clone, Debug)]
pub struct ToyVerifier {
    instance_id: u64,
    circuit: QuantumCircuit,
    prep: QuantumCircuit,
    kind: InstanceKind,
}

/// Acceptance ceiling of every no-instance on `n` witness qubits.
pub fn soundness_bound(n: usize) -> f64 {
    0.5f64.powi(n as i32 + 1)
}

impl ToyVerifier {
    pub fn yes_instance(n: usize, rng: &mut dyn RngCore) -> Result<Self> {
        Self::build(n, true, rng)
    }

    pub fn no_instance(n: usize, rng: &mut dyn RngCore) -> Result<Self> {
        Self::build(n, false, rng)
    }

    fn build(n: usize, yes: bool, rng: &mut dyn RngCore) -> Result<Self> {
        if n == 0 || n > MAX_WITNESS_QUBITS {
            return Err(Error::TooLarge {
                qubits: n,
                limit: MAX_WITNESS_QUBITS,
                mode: "witness",
            });
        }
        let target = sample_random_state(n, rng)?;
        let p = state_prep_unitary(target.amplitudes().expect("sampled pure"))?;
        let wires: Vec<usize> = (0..n).collect();

        let mut prep = QuantumCircuit::new(n);
        prep.custom(Unitary::from_matrix(&p)?, &wires, &[])?;

        let (flag, accept) = (n, n + 1);
        let mut c = QuantumCircuit::with_ancillas(n, 2);
        c.custom(Unitary::from_matrix(&p.adjoint())?, &wires, &[])?;
        let zero_test: Vec<(usize, bool)> = wires.iter().map(|&w| (w, false)).collect();
        c.mcx(&zero_test, flag)?;
        if yes {
            c.cx(flag, accept)?;
        } else {
            let theta = 2.0 * soundness_bound(n).sqrt().asin();
            c.named(NamedGate::Ry(theta), &[accept], &[(flag, true)])?;
        }
        c.set_outputs(vec![accept])?;

        let kind = if yes {
            InstanceKind::Yes { witness: target }
        } else {
            InstanceKind::No
        };
        Ok(Self {
            instance_id: rng.next_u64(),
            circuit: c,
            prep,
            kind,
        })
    }

    pub fn instance_id(&self) -> u64 {
        self.instance_id
    }

    pub fn witness_qubits(&self) -> usize {
        self.circuit.arity()
    }

    pub fn circuit(&self) -> &QuantumCircuit {
        &self.circuit
    }

    pub fn kind(&self) -> &InstanceKind {
        &self.kind
    }

    pub fn is_yes(&self) -> bool {
        matches!(self.kind, InstanceKind::Yes { .. })
    }

    pub fn witness(&self) -> Option<&QuantumState> {
        match &self.kind {
            InstanceKind::Yes { witness } => Some(witness),
            InstanceKind::No => None,
        }
    }

    /// Prepares the canonical witness from `|0^n>` (yes-instances only).
    pub fn witness_generator(&self) -> Option<&QuantumCircuit> {
        self.is_yes().then_some(&self.prep)
    }

    pub fn acceptance_probability(&self, witness: &QuantumState) -> Result<f64> {
        let out = run_circuit(&self.circuit, witness)?;
        Ok(out.probabilities()[1])
    }
}

/// Unitary taking `|0>` to a purification of `rho`: `rho` itself when pure,
/// else `Σ √λ_i |e_i>|i>` over an equally sized environment.
fn preparation(rho: &QuantumState) -> Result<(Unitary, usize)> {
    if let Some(a) = rho.amplitudes() {
        return Ok((Unitary::from_matrix(&state_prep_unitary(a)?)?, 0));
    }
    let m = rho.num_qubits();
    let d = 1usize << m;
    let eig = rho.density().symmetric_eigen();
    let mut psi = DVector::<C64>::zeros(d * d);
    for i in 0..d {
        let w = eig.eigenvalues[i].max(0.0).sqrt();
        for r in 0..d {
            psi[r * d + i] = eig.eigenvectors[(r, i)] * w;
        }
    }
    let norm = psi.norm();
    psi /= C64::new(norm, 0.0);
    let u: DMatrix<C64> = state_prep_unitary(&psi)?;
    Ok((Unitary::from_matrix(&u)?, m))
}

/// `Q_{x,ρ}` as a circuit on the witness register whose outputs are the
/// emission register.
pub fn encryption_circuit(v: &ToyVerifier, rho: &QuantumState) -> Result<QuantumCircuit> {
    let m = rho.num_qubits();
    if m == 0 || m > MAX_PAYLOAD_QUBITS {
        return Err(Error::PayloadTooLarge {
            qubits: m,
            limit: MAX_PAYLOAD_QUBITS,
        });
    }
    let (prep, env) = preparation(rho)?;
    let vc = v.circuit();
    let n = vc.arity();
    let accept = vc.outputs()[0];

    let mut q = QuantumCircuit::with_ancillas(n, vc.ancillas() + 2 * m + env);
    let base = vc.width();
    let fresh: Vec<usize> = (base..base + m + env).collect();
    let out: Vec<usize> = (base + m + env..base + 2 * m + env).collect();

    let map: Vec<usize> = (0..base).collect();
    q.append(vc, &map)?;
    q.custom(prep, &fresh, &[])?;
    for j in 0..m {
        q.named(NamedGate::Swap, &[fresh[j], out[j]], &[(accept, true)])?;
    }
    q.set_outputs(out)?;
    Ok(q)
}

/// Obfuscates `Q_{x,ρ}`.
pub fn we_encrypt(
    v: &ToyVerifier,
    rho: &QuantumState,
    obf: &dyn Obfuscator,
    rng: &mut dyn RngCore,
) -> Result<ObfuscatedProgram> {
    let q = encryption_circuit(v, rho)?;
    obf.obfuscate(&q, &BitString::random(OBF_COINS, rng))
}

/// Runs the ciphertext on a witness. Costs one use.
pub fn we_decrypt(ct: &mut ObfuscatedProgram, witness: &QuantumState) -> Result<QuantumState> {
    if witness.num_qubits() != ct.arity() {
        return Err(Error::ArityMismatch {
            expected: ct.arity(),
            actual: witness.num_qubits(),
        });
    }
    ct.interpret(witness)
}
