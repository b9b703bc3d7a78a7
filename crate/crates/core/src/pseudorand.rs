//! Length-doubling generator, GGM pseudorandom function and the one-way
//! function obtained from a classical-output obfuscator.
//!
//! [`MixPrg`] is a test-grade keyed arithmetic expansion. It is
//! deterministic and well mixed, which is all the experiments need; it is not
//! a vetted cryptographic generator. Swap in another [`Prg`] to change it.

use crate::obf::{make_point_circuit_general, Obfuscator, PlainObfuscator};
use crate::simcore::BitString;
use crate::{Error, Result};

/// A deterministic map from `s` bits to `2s` bits.
pub trait Prg: Send + Sync {
    fn expand(&self, seed: &BitString) -> BitString;
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two-lane splitmix sponge: absorbs the seed 64 bits at a time, then
/// squeezes a counter stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MixPrg {
    key: u64,
}

impl MixPrg {
    pub const DEFAULT_KEY: u64 = 0x6a09_e667_f3bc_c908;

    pub fn new(key: u64) -> Self {
        Self { key }
    }
}

impl Default for MixPrg {
    fn default() -> Self {
        Self::new(Self::DEFAULT_KEY)
    }
}

impl Prg for MixPrg {
    fn expand(&self, seed: &BitString) -> BitString {
        let s = seed.len();
        let mut a = mix64(self.key ^ (s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut b = mix64(a ^ 0x3c6e_f372_fe94_f82b);
        for chunk in seed.to_bytes().chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            let w = u64::from_be_bytes(word);
            a = mix64(a ^ w).wrapping_add(b);
            b = mix64(b.rotate_left(23) ^ a ^ w);
        }
        let mut out = Vec::with_capacity(2 * s);
        let mut ctr = 0u64;
        while out.len() < 2 * s {
            let w = mix64(a ^ mix64(b.wrapping_add(ctr)));
            ctr += 1;
            out.extend((0..64).map(|i| (w >> (63 - i)) & 1 == 1));
        }
        out.truncate(2 * s);
        BitString::new(out)
    }
}

/// Key and shape of a GGM function `f_k : {0,1}^input_len → {0,1}^output_len`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrfKey {
    key: BitString,
    input_len: usize,
    output_len: usize,
}

impl std::fmt::Debug for PrfKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrfKey")
            .field("key_len", &self.key.len())
            .field("input_len", &self.input_len)
            .field("output_len", &self.output_len)
            .finish_non_exhaustive()
    }
}

impl PrfKey {
    /// `output_len` may be at most twice the key length.
    pub fn new(key: BitString, input_len: usize, output_len: usize) -> Result<Self> {
        if key.is_empty() {
            return Err(Error::InvalidConfig("empty PRF key".into()));
        }
        if output_len > 2 * key.len() {
            return Err(Error::LengthMismatch {
                expected: 2 * key.len(),
                actual: output_len,
            });
        }
        Ok(Self {
            key,
            input_len,
            output_len,
        })
    }

    pub fn key(&self) -> &BitString {
        &self.key
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }
}

/// GGM evaluation with the default generator.
pub fn ggm_eval(key: &PrfKey, x: &BitString) -> Result<BitString> {
    ggm_eval_with(&MixPrg::default(), key, x)
}

/// Walks the GGM tree from the key, taking the left half of the expansion on
/// a 0 bit and the right half on a 1 bit. The leaf is truncated to
/// `output_len`, or expanded once more first when `output_len` exceeds the
/// key length.
pub fn ggm_eval_with(prg: &dyn Prg, key: &PrfKey, x: &BitString) -> Result<BitString> {
    if x.len() != key.input_len {
        return Err(Error::LengthMismatch {
            expected: key.input_len,
            actual: x.len(),
        });
    }
    let s = key.key.len();
    let mut node = key.key.clone();
    for bit in x.iter() {
        let e = prg.expand(&node);
        node = if bit {
            e.slice(s..2 * s)
        } else {
            e.slice(0..s)
        };
    }
    if key.output_len <= s {
        Ok(node.truncate(key.output_len))
    } else {
        Ok(prg.expand(&node).truncate(key.output_len))
    }
}

/// `f(a, b, r)`: the plain obfuscation, with coins `r`, of the point circuit
/// that XORs the bit `b` into a one-qubit register when the input equals `a`.
pub fn owf_eval(a: &BitString, b: bool, r: &BitString) -> Result<BitString> {
    owf_eval_with(&PlainObfuscator::default(), a, b, r)
}

/// As [`owf_eval`] over any obfuscator whose output is a classical string.
pub fn owf_eval_with(
    obf: &dyn Obfuscator,
    a: &BitString,
    b: bool,
    r: &BitString,
) -> Result<BitString> {
    let circuit = make_point_circuit_general(a, &BitString::new(vec![b]))?;
    let program = obf.obfuscate(&circuit, r)?;
    Ok(BitString::from_bytes(program.description()?))
}
