use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schemes::{Ciphertext, SymScheme};
use crate::simcore::{
    run_circuit, trial_rng, BitString, PauliString, QuantumCircuit, QuantumState, PRODUCT_TOL,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameMode {
    #[serde(rename = "IND")]
    Ind,
    #[serde(rename = "IND-CPA")]
    Cpa,
    #[serde(rename = "IND-CCA1")]
    Cca1,
}

impl fmt::Display for GameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameMode::Ind => "IND",
            GameMode::Cpa => "IND-CPA",
            GameMode::Cca1 => "IND-CCA1",
        })
    }
}

impl std::str::FromStr for GameMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "IND" => Ok(GameMode::Ind),
            "IND-CPA" | "CPA" => Ok(GameMode::Cpa),
            "IND-CCA1" | "CCA1" => Ok(GameMode::Cca1),
            _ => Err(Error::InvalidConfig(format!("unknown game mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GameOptions {
    /// Lets the adversary pick the encryption randomness in oracle queries.
    pub adversary_randomness: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Challenge,
    Guess,
}

/// The oracle handles an adversary gets. What is allowed depends on the
/// mode and the phase; anything else is a [`Error::ForbiddenOracle`].
pub struct Oracles<'a> {
    scheme: &'a dyn SymScheme,
    key: &'a BitString,
    mode: GameMode,
    phase: Phase,
    options: GameOptions,
    rng: ChaCha8Rng,
    enc_queries: usize,
    dec_queries: usize,
}

impl Oracles<'_> {
    pub fn mode(&self) -> GameMode {
        self.mode
    }

    pub fn message_qubits(&self) -> usize {
        self.scheme.message_qubits()
    }

    pub fn enc_queries(&self) -> usize {
        self.enc_queries
    }

    pub fn dec_queries(&self) -> usize {
        self.dec_queries
    }

    fn check_enc(&self) -> Result<()> {
        if self.mode == GameMode::Ind {
            return Err(Error::ForbiddenOracle(
                "no encryption oracle in the IND game".into(),
            ));
        }
        Ok(())
    }

    pub fn encrypt(&mut self, rho: &QuantumState) -> Result<Ciphertext> {
        self.check_enc()?;
        self.enc_queries += 1;
        self.scheme.encrypt(self.key, rho, &mut self.rng)
    }

    pub fn encrypt_with(&mut self, rho: &QuantumState, r: &BitString) -> Result<Ciphertext> {
        self.check_enc()?;
        if !self.options.adversary_randomness {
            return Err(Error::ForbiddenOracle(
                "adversary-chosen randomness is disabled".into(),
            ));
        }
        self.enc_queries += 1;
        self.scheme.encrypt_with(self.key, rho, r)
    }

    pub fn decrypt(&mut self, ct: Ciphertext) -> Result<QuantumState> {
        if self.mode != GameMode::Cca1 {
            return Err(Error::ForbiddenOracle(format!(
                "no decryption oracle in {}",
                self.mode
            )));
        }
        if self.phase != Phase::Challenge {
            return Err(Error::ForbiddenOracle(
                "decryption oracle revoked after the challenge".into(),
            ));
        }
        self.dec_queries += 1;
        self.scheme.decrypt(self.key, ct)
    }
}

/// A two-phase adversary. `challenge` returns a state whose first
/// `message_qubits` qubits are the message; the rest is a side register the
/// adversary keeps. `guess` sees the ciphertext with the side register
/// attached and returns its guess of the challenger's bit.
pub trait Adversary: Send {
    fn name(&self) -> String;

    fn challenge(
        &mut self,
        oracles: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<QuantumState>;

    fn guess(
        &mut self,
        ct: Ciphertext,
        oracles: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<bool>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub trials: usize,
    pub wins: usize,
    pub advantage: f64,
    pub ci95: f64,
}

impl GameResult {
    pub fn from_counts(trials: usize, wins: usize) -> Self {
        let n = trials.max(1) as f64;
        let p = wins as f64 / n;
        let z = 1.96f64;
        let ci95 = z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        Self {
            trials,
            wins,
            advantage: (2.0 * p - 1.0).abs(),
            ci95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub scheme: String,
    pub mode: GameMode,
    pub n: usize,
    pub trials: usize,
    pub wins: usize,
    pub advantage: f64,
    pub ci95: f64,
    pub seed: u64,
}

impl GameRecord {
    pub fn new(scheme: &dyn SymScheme, mode: GameMode, seed: u64, r: &GameResult) -> Self {
        Self {
            scheme: scheme.name(),
            mode,
            n: scheme.message_qubits(),
            trials: r.trials,
            wins: r.wins,
            advantage: r.advantage,
            ci95: r.ci95,
            seed,
        }
    }
}

/// `|0^m><0^m| ⊗ Tr_M(ρ)`: the message is replaced, the side register kept.
fn forget_message(state: &QuantumState, m: usize) -> Result<QuantumState> {
    let zero = QuantumState::zero(m)?;
    if state.num_qubits() == m {
        return Ok(zero);
    }
    let side: Vec<usize> = (m..state.num_qubits()).collect();
    zero.tensor(&state.reduce(&side, PRODUCT_TOL)?)
}

fn play_trial(
    scheme: &dyn SymScheme,
    adversary: &mut dyn Adversary,
    mode: GameMode,
    options: GameOptions,
    seed: u64,
    index: u64,
) -> Result<bool> {
    let mut rng = trial_rng(seed, index);
    let key = scheme.keygen(&mut rng);
    let mut adv_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut oracles = Oracles {
        scheme,
        key: &key,
        mode,
        phase: Phase::Challenge,
        options,
        rng: ChaCha8Rng::seed_from_u64(rng.next_u64()),
        enc_queries: 0,
        dec_queries: 0,
    };
    let state = adversary.challenge(&mut oracles, &mut adv_rng)?;
    oracles.phase = Phase::Guess;
    let m = scheme.message_qubits();
    if state.num_qubits() < m {
        return Err(Error::ArityMismatch {
            expected: m,
            actual: state.num_qubits(),
        });
    }
    let bit: bool = rng.random();
    let plaintext = if bit {
        state
    } else {
        forget_message(&state, m)?
    };
    let ct = scheme.encrypt(&key, &plaintext, &mut rng)?;
    Ok(adversary.guess(ct, &mut oracles, &mut adv_rng)? == bit)
}

/// Plays `trials` independent games. Trial `i` draws everything from
/// `trial_rng(seed, i)`, so results do not depend on scheduling.
pub fn ind_game(
    scheme: &dyn SymScheme,
    adversary: &(dyn Fn() -> Box<dyn Adversary> + Sync),
    mode: GameMode,
    trials: usize,
    seed: u64,
    options: GameOptions,
) -> Result<GameResult> {
    let run = |i: usize| play_trial(scheme, adversary().as_mut(), mode, options, seed, i as u64);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<bool>> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<bool>> = (0..trials).map(run).collect();
    let mut wins = 0;
    for o in outcomes {
        wins += usize::from(o?);
    }
    Ok(GameResult::from_counts(trials, wins))
}

fn sample_message(ct: &Ciphertext, m: usize, rng: &mut dyn RngCore) -> Result<BitString> {
    let wires: Vec<usize> = (0..m).collect();
    ct.payload.sample_measurement(&wires, rng)
}

/// Sends `|0^m>` and guesses at random.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoinFlip;

impl Adversary for CoinFlip {
    fn name(&self) -> String {
        "coin-flip".into()
    }

    fn challenge(&mut self, o: &mut Oracles<'_>, _rng: &mut dyn RngCore) -> Result<QuantumState> {
        QuantumState::zero(o.message_qubits())
    }

    fn guess(
        &mut self,
        _ct: Ciphertext,
        _o: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        Ok(rng.random())
    }
}

/// Sends `|1^m>`, measures the ciphertext, and says "mine" iff it reads
/// `1^m` back.
#[derive(Clone, Copy, Debug, Default)]
pub struct BasisMeasurement;

impl Adversary for BasisMeasurement {
    fn name(&self) -> String {
        "basis-measurement".into()
    }

    fn challenge(&mut self, o: &mut Oracles<'_>, _rng: &mut dyn RngCore) -> Result<QuantumState> {
        QuantumState::basis(&BitString::ones(o.message_qubits()))
    }

    fn guess(
        &mut self,
        ct: Ciphertext,
        o: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let m = o.message_qubits();
        Ok(sample_message(&ct, m, rng)? == BitString::ones(m))
    }
}

/// Knows the (constant) pad: sends `|1^m>`, strips the pad, measures.
#[derive(Clone, Debug)]
pub struct KnownPad {
    pub pad: PauliString,
}

impl Adversary for KnownPad {
    fn name(&self) -> String {
        "known-pad".into()
    }

    fn challenge(&mut self, o: &mut Oracles<'_>, _rng: &mut dyn RngCore) -> Result<QuantumState> {
        QuantumState::basis(&BitString::ones(o.message_qubits()))
    }

    fn guess(
        &mut self,
        ct: Ciphertext,
        o: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let plain = self.pad.apply_inverse(&ct.payload)?;
        let wires: Vec<usize> = (0..o.message_qubits()).collect();
        Ok(!plain.sample_measurement(&wires, rng)?.is_zero())
    }
}

/// Chosen-plaintext attack on deterministic schemes: encrypts `|0^m>`
/// after the challenge and compares measurement outcomes.
#[derive(Clone, Copy, Debug, Default)]
pub struct Replay;

impl Adversary for Replay {
    fn name(&self) -> String {
        "replay".into()
    }

    fn challenge(&mut self, o: &mut Oracles<'_>, _rng: &mut dyn RngCore) -> Result<QuantumState> {
        QuantumState::basis(&BitString::ones(o.message_qubits()))
    }

    fn guess(
        &mut self,
        ct: Ciphertext,
        o: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let m = o.message_qubits();
        let reference = o.encrypt(&QuantumState::zero(m)?)?;
        Ok(sample_message(&ct, m, rng)? != sample_message(&reference, m, rng)?)
    }
}

/// Entangles each message qubit with a side qubit and checks the Bell
/// correlations on the way back. `pad` is stripped first when known.
#[derive(Clone, Debug, Default)]
pub struct BellSide {
    pub pad: Option<PauliString>,
}

impl Adversary for BellSide {
    fn name(&self) -> String {
        "bell-side".into()
    }

    fn challenge(&mut self, o: &mut Oracles<'_>, _rng: &mut dyn RngCore) -> Result<QuantumState> {
        let m = o.message_qubits();
        let mut c = QuantumCircuit::new(2 * m);
        for i in 0..m {
            c.h(i)?;
            c.cx(i, m + i)?;
        }
        run_circuit(&c, &QuantumState::zero(2 * m)?)
    }

    fn guess(
        &mut self,
        ct: Ciphertext,
        o: &mut Oracles<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let m = o.message_qubits();
        let mut state = ct.payload;
        if let Some(p) = &self.pad {
            state = p.apply_inverse(&state)?;
        }
        let mut c = QuantumCircuit::new(2 * m);
        for i in 0..m {
            c.cx(i, m + i)?;
            c.h(i)?;
        }
        let out = run_circuit(&c, &state)?;
        let all: Vec<usize> = (0..2 * m).collect();
        Ok(out.sample_measurement(&all, rng)?.is_zero())
    }
}
