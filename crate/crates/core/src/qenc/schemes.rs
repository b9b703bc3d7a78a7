use std::sync::Arc;

use rand::RngCore;

use super::hom::append_pad_lookup;
use crate::obf::{ObfuscatedProgram, Obfuscator};
use crate::pseudorand::{ggm_eval, PrfKey};
use crate::simcore::{BitString, Op, PauliString, QuantumCircuit, QuantumState, PRODUCT_TOL};
use crate::{Error, Result};

/// `P_r ρ P_r†`.
pub fn qotp_encrypt(r: &PauliString, rho: &QuantumState) -> Result<QuantumState> {
    crate::simcore::pauli_apply(r, rho)
}

/// A ciphertext: the classical tag, the encrypted register (followed by any
/// side register the plaintext was entangled with) and, for schemes that
/// ship one, an obfuscated program.
#[derive(Debug)]
pub struct Ciphertext {
    pub tag: BitString,
    pub payload: QuantumState,
    pub program: Option<ObfuscatedProgram>,
}

impl Ciphertext {
    pub fn new(tag: BitString, payload: QuantumState) -> Self {
        Self {
            tag,
            payload,
            program: None,
        }
    }

    pub fn try_clone(&self) -> Result<Self> {
        Ok(Self {
            tag: self.tag.clone(),
            payload: self.payload.clone(),
            program: self.program.as_ref().map(|p| p.try_clone()).transpose()?,
        })
    }
}

/// A symmetric scheme on `message_qubits` qubits. Encryption and decryption
/// act on the leading qubits of the state, so a side register rides along.
pub trait SymScheme: Send + Sync {
    fn name(&self) -> String;
    fn message_qubits(&self) -> usize;
    fn key_len(&self) -> usize;
    fn randomness_len(&self) -> usize;

    fn keygen(&self, rng: &mut dyn RngCore) -> BitString {
        BitString::random(self.key_len(), rng)
    }

    fn encrypt_with(
        &self,
        key: &BitString,
        rho: &QuantumState,
        r: &BitString,
    ) -> Result<Ciphertext>;

    fn decrypt(&self, key: &BitString, ct: Ciphertext) -> Result<QuantumState>;

    fn encrypt(
        &self,
        key: &BitString,
        rho: &QuantumState,
        rng: &mut dyn RngCore,
    ) -> Result<Ciphertext> {
        let r = BitString::random(self.randomness_len(), rng);
        self.encrypt_with(key, rho, &r)
    }
}

fn check_message(m: usize, rho: &QuantumState) -> Result<()> {
    if rho.num_qubits() < m {
        return Err(Error::ArityMismatch {
            expected: m,
            actual: rho.num_qubits(),
        });
    }
    Ok(())
}

fn check_len(expected: usize, bits: &BitString) -> Result<()> {
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: bits.len(),
        });
    }
    Ok(())
}

/// The GGM pad `f_k(t)` as a Pauli string on `|t|` qubits.
pub fn ggm_pad(key: &BitString, tag: &BitString) -> Result<PauliString> {
    let n = tag.len();
    let f = PrfKey::new(key.clone(), n, 2 * n)?;
    PauliString::new(ggm_eval(&f, tag)?)
}

/// Where a pad-based scheme gets `f_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadFunction {
    /// GGM with an `n`-bit key.
    Ggm,
    /// A uniformly random function: the key is its full truth table.
    TruthTable,
}

/// `Enc_k(ρ) = (r, P_{f_k(r)} ρ P_{f_k(r)}†)` with an `n`-bit tag.
#[derive(Clone, Copy, Debug)]
pub struct PrfScheme {
    n: usize,
    pad: PadFunction,
}

pub fn prf_scheme(n: usize) -> PrfScheme {
    PrfScheme {
        n,
        pad: PadFunction::Ggm,
    }
}

/// The same scheme over a truly random function.
pub fn ideal_scheme(n: usize) -> PrfScheme {
    PrfScheme {
        n,
        pad: PadFunction::TruthTable,
    }
}

impl PrfScheme {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pad_function(&self) -> PadFunction {
        self.pad
    }

    pub fn pad(&self, key: &BitString, tag: &BitString) -> Result<PauliString> {
        check_len(self.key_len(), key)?;
        check_len(self.n, tag)?;
        match self.pad {
            PadFunction::Ggm => ggm_pad(key, tag),
            PadFunction::TruthTable => {
                let w = 2 * self.n;
                let i = tag.to_usize();
                PauliString::new(key.slice(i * w..(i + 1) * w))
            }
        }
    }

    /// `Enc` with the key wired in: inputs are the tag register (`n`) and
    /// the message (`n`); the tag passes through.
    pub fn encryption_circuit(&self, key: &BitString) -> Result<QuantumCircuit> {
        let n = self.n;
        let mut c = QuantumCircuit::new(2 * n);
        let tag: Vec<usize> = (0..n).collect();
        let msg: Vec<usize> = (n..2 * n).collect();
        append_pad_lookup(&mut c, &tag, &msg, &|t| self.pad(key, t), false, &[])?;
        Ok(c)
    }
}

impl SymScheme for PrfScheme {
    fn name(&self) -> String {
        match self.pad {
            PadFunction::Ggm => "prf".into(),
            PadFunction::TruthTable => "ideal".into(),
        }
    }

    fn message_qubits(&self) -> usize {
        self.n
    }

    fn key_len(&self) -> usize {
        match self.pad {
            PadFunction::Ggm => self.n,
            PadFunction::TruthTable => (2 * self.n) << self.n,
        }
    }

    fn randomness_len(&self) -> usize {
        self.n
    }

    fn encrypt_with(
        &self,
        key: &BitString,
        rho: &QuantumState,
        r: &BitString,
    ) -> Result<Ciphertext> {
        check_message(self.n, rho)?;
        let p = self.pad(key, r)?;
        Ok(Ciphertext::new(r.clone(), p.apply(rho)?))
    }

    fn decrypt(&self, key: &BitString, ct: Ciphertext) -> Result<QuantumState> {
        check_message(self.n, &ct.payload)?;
        self.pad(key, &ct.tag)?.apply_inverse(&ct.payload)
    }
}

/// A deliberately broken scheme: every message gets the same public pad.
#[derive(Clone, Debug)]
pub struct ConstantPadScheme {
    pad: PauliString,
}

impl ConstantPadScheme {
    pub fn new(pad: PauliString) -> Self {
        Self { pad }
    }

    pub fn pad(&self) -> &PauliString {
        &self.pad
    }
}

impl SymScheme for ConstantPadScheme {
    fn name(&self) -> String {
        "constant-pad".into()
    }

    fn message_qubits(&self) -> usize {
        self.pad.num_qubits()
    }

    fn key_len(&self) -> usize {
        0
    }

    fn randomness_len(&self) -> usize {
        0
    }

    fn encrypt_with(
        &self,
        _key: &BitString,
        rho: &QuantumState,
        _r: &BitString,
    ) -> Result<Ciphertext> {
        check_message(self.message_qubits(), rho)?;
        Ok(Ciphertext::new(BitString::zeros(0), self.pad.apply(rho)?))
    }

    fn decrypt(&self, _key: &BitString, ct: Ciphertext) -> Result<QuantumState> {
        self.pad.apply_inverse(&ct.payload)
    }
}

/// `U'_{r,k}`: on `|x, y>`, applies `P_r†` to `y` when `x = k`.
pub fn make_pauli_point_circuit(k: &BitString, r: &PauliString) -> Result<QuantumCircuit> {
    let n = k.len();
    if r.num_qubits() != n {
        return Err(Error::LengthMismatch {
            expected: 2 * n,
            actual: r.bits().len(),
        });
    }
    let mut c = QuantumCircuit::new(2 * n);
    let xs: Vec<usize> = (0..n).collect();
    let ys: Vec<usize> = (n..2 * n).collect();
    r.append_to(&mut c, &ys, &QuantumCircuit::value_controls(&xs, k), true)?;
    Ok(c)
}

/// Pad with a fresh Pauli `r` and ship an obfuscation of `U'_{r,k}` that
/// undoes it for whoever holds `k`.
#[derive(Clone)]
pub struct ObfCpaScheme {
    n: usize,
    obf: Arc<dyn Obfuscator>,
}

pub fn obf_cpa_scheme(n: usize, obf: Arc<dyn Obfuscator>) -> ObfCpaScheme {
    ObfCpaScheme { n, obf }
}

impl SymScheme for ObfCpaScheme {
    fn name(&self) -> String {
        format!("obf-cpa/{}", self.obf.name())
    }

    fn message_qubits(&self) -> usize {
        self.n
    }

    fn key_len(&self) -> usize {
        self.n
    }

    fn randomness_len(&self) -> usize {
        2 * self.n
    }

    fn encrypt_with(
        &self,
        key: &BitString,
        rho: &QuantumState,
        r: &BitString,
    ) -> Result<Ciphertext> {
        check_message(self.n, rho)?;
        check_len(self.n, key)?;
        let p = PauliString::for_qubits(r.clone(), self.n)?;
        let program = self.obf.obfuscate(&make_pauli_point_circuit(key, &p)?, r)?;
        Ok(Ciphertext {
            tag: BitString::zeros(0),
            payload: p.apply(rho)?,
            program: Some(program),
        })
    }

    fn decrypt(&self, key: &BitString, ct: Ciphertext) -> Result<QuantumState> {
        check_len(self.n, key)?;
        let mut program = ct
            .program
            .ok_or_else(|| Error::Malformed("ciphertext carries no program".into()))?;
        let input = QuantumState::basis(key)?.tensor(&ct.payload)?;
        let out = program.interpret(&input)?;
        let keep: Vec<usize> = (self.n..out.num_qubits()).collect();
        out.reduce(&keep, PRODUCT_TOL)
    }
}

/// Public-key scheme over a GGM pad scheme: the public key is an
/// obfuscation of the encryption circuit with the secret key wired in.
#[derive(Clone)]
pub struct PkScheme {
    base: PrfScheme,
    obf: Arc<dyn Obfuscator>,
}

impl PkScheme {
    pub fn new(n: usize, obf: Arc<dyn Obfuscator>) -> Self {
        Self {
            base: prf_scheme(n),
            obf,
        }
    }

    pub fn base(&self) -> &PrfScheme {
        &self.base
    }

    pub fn obfuscator(&self) -> &Arc<dyn Obfuscator> {
        &self.obf
    }

    pub fn keygen(&self, rng: &mut dyn RngCore) -> Result<(BitString, ObfuscatedProgram)> {
        let sk = self.base.keygen(rng);
        let coins = BitString::random(self.base.n(), rng);
        let pk = self
            .obf
            .obfuscate(&self.base.encryption_circuit(&sk)?, &coins)?;
        Ok((sk, pk))
    }

    /// Runs the public key on `|r> ⊗ ρ` for a fresh `r`.
    pub fn encrypt(
        &self,
        pk: &mut ObfuscatedProgram,
        rho: &QuantumState,
        rng: &mut dyn RngCore,
    ) -> Result<Ciphertext> {
        let n = self.base.n();
        check_message(n, rho)?;
        let r = BitString::random(n, rng);
        let out = pk.interpret(&QuantumState::basis(&r)?.tensor(rho)?)?;
        split_tag(&out, n)
    }

    pub fn decrypt(&self, sk: &BitString, ct: Ciphertext) -> Result<QuantumState> {
        self.base.decrypt(sk, ct)
    }
}

/// Reads the leading `n` qubits of `out` as a classical tag.
pub(crate) fn split_tag(out: &QuantumState, n: usize) -> Result<Ciphertext> {
    let tag_wires: Vec<usize> = (0..n).collect();
    let (tag, p) = out.most_likely(&tag_wires)?;
    if p < 1.0 - 1e-9 {
        return Err(Error::InvalidState(format!(
            "tag register is not classical (p = {p})"
        )));
    }
    let keep: Vec<usize> = (n..out.num_qubits()).collect();
    Ok(Ciphertext::new(tag, out.reduce(&keep, PRODUCT_TOL)?))
}

/// Reads the pad table straight out of a description-form public key: the
/// plain obfuscator hides nothing.
pub fn recover_pad_table(pk: &ObfuscatedProgram, n: usize) -> Result<Vec<PauliString>> {
    let c = pk.circuit()?;
    let mut table = vec![BitString::zeros(2 * n); 1 << n];
    for g in c.gates() {
        let ctl = g.controls();
        if ctl.len() != n || ctl.iter().enumerate().any(|(i, &(w, _))| w != i) {
            return Err(Error::Malformed("gate is not a tag lookup".into()));
        }
        let t: BitString = ctl.iter().map(|&(_, v)| v).collect();
        let q = g.targets()[0]
            .checked_sub(n)
            .ok_or_else(|| Error::Malformed("lookup targets the tag".into()))?;
        let bit = match g.op() {
            Op::Named(crate::simcore::NamedGate::X) => 2 * q,
            Op::Named(crate::simcore::NamedGate::Z) => 2 * q + 1,
            _ => return Err(Error::Malformed("lookup gate is not X or Z".into())),
        };
        table[t.to_usize()].set(bit, true);
    }
    table.into_iter().map(PauliString::new).collect()
}
