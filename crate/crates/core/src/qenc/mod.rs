//! Pauli one-time pad schemes, the obfuscation-derived variants, the
//! homomorphic evaluator and the indistinguishability games.
//!
//! The classical randomness register of a ciphertext is kept as plain bits
//! (`Ciphertext::tag`) rather than simulated qubits.

mod game;
mod hom;
mod schemes;

pub use game::{
    ind_game, Adversary, BasisMeasurement, BellSide, CoinFlip, GameMode, GameOptions, GameRecord,
    GameResult, KnownPad, Oracles, Replay,
};
pub use hom::{append_pad_lookup, increment_tag, GateTable, HomKeys, HomScheme, TableGate};
pub use schemes::{
    ggm_pad, ideal_scheme, make_pauli_point_circuit, obf_cpa_scheme, prf_scheme, qotp_encrypt,
    recover_pad_table, Ciphertext, ConstantPadScheme, ObfCpaScheme, PadFunction, PkScheme,
    PrfScheme, SymScheme,
};
