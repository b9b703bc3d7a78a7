//! Executable quantum-cryptography constructions at small qubit counts.
//!
//! The crate is organised bottom-up:
//!
//! * [`simcore`] dense state-vector / density-matrix simulation, metrics and
//!   Pauli-group machinery;
//! * [`pseudorand`] the length-doubling generator, GGM pseudorandom function
//!   and the obfuscator-derived one-way function;
//! * [`qenc`] quantum one-time pad, symmetric / public-key / homomorphic
//!   schemes and the IND, IND-CPA and IND-CCA1 game harness;
//! * [`obf`] obfuscators and interpreters, combined circuits, unobfuscatable
//!   circuit families and the distinguishing adversaries;
//! * [`money`] public-key quantum money with phase-kickback verification;
//! * [`witenc`] witness encryption over a toy QMA-style verifier;
//! * [`harness`] named, seeded experiments producing deterministic reports.

pub mod error;
pub mod harness;
pub mod money;
pub mod obf;
pub mod pseudorand;
pub mod qenc;
pub mod simcore;
pub mod witenc;

pub use error::{Error, Result};
