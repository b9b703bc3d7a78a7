//! Obfuscators, interpreters, combined circuits, the unobfuscatable
//! families and the adversaries that tell them apart.
//!
//! Black-box access is forward-only: simulators get [`CountingOracle`]s and
//! nothing else (no controlled or inverse access).
//!
//! [`CountingOracle`]: crate::simcore::CountingOracle

mod attack;
mod circuits;
mod family;
mod interp;
mod program;

pub use attack::{
    adversary_checker, adversary_homomorphic, blackbox_baseline, compile_to_table, AttackReport,
    HomAttackOutcome,
};
pub use circuits::{
    branch_from_circuit, combine, make_checker_circuit, make_point_circuit,
    make_point_circuit_general, CombinedCircuit,
};
pub use family::{
    make_lemma_family, sample_unobf_family, sample_unobf_family_with, FamilyLayout, FamilySample,
    FamilyWitness, SELECTOR_B, SELECTOR_E, SELECTOR_HOM, SELECTOR_MAIN,
};
pub use interp::{AdviceCodec, BasisStateObfuscator, Interpreter};
pub use program::{ObfuscatedProgram, Obfuscator, PlainObfuscator, ProgramForm};
