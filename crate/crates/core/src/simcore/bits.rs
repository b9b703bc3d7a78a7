use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A classical bit string. Index 0 is the most significant bit, matching the
/// qubit ordering of [`QuantumState`](super::QuantumState).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    /// Big-endian encoding of `value` on `len` bits (higher bits are dropped).
    pub fn from_usize(value: usize, len: usize) -> Self {
        Self(
            (0..len)
                .map(|i| {
                    let shift = len - 1 - i;
                    shift < usize::BITS as usize && (value >> shift) & 1 == 1
                })
                .collect(),
        )
    }

    pub fn random(len: usize, rng: &mut (impl RngCore + ?Sized)) -> Self {
        Self((0..len).map(|_| rng.random::<bool>()).collect())
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidConfig(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    /// Big-endian value. Panics if longer than a machine word.
    pub fn to_usize(&self) -> usize {
        assert!(
            self.0.len() <= usize::BITS as usize,
            "bit string too long for usize"
        );
        self.0
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Self(bits)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> BitString {
        Self(self.0[range].to_vec())
    }

    /// First `len` bits.
    pub fn truncate(&self, len: usize) -> BitString {
        self.slice(0..len.min(self.len()))
    }

    /// Packs into bytes, most significant bit first; the final byte is
    /// zero-padded on the right.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
            })
            .collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self(
            bytes
                .iter()
                .flat_map(|byte| (0..8).map(move |i| (byte >> (7 - i)) & 1 == 1))
                .collect(),
        )
    }

    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usize_roundtrip_is_big_endian() {
        let b = BitString::from_usize(6, 4);
        assert_eq!(b.to_string(), "0110");
        assert_eq!(b.to_usize(), 6);
    }

    #[test]
    fn bytes_roundtrip() {
        let b = BitString::parse("1011001110").unwrap();
        let back = BitString::from_bytes(&b.to_bytes()).truncate(b.len());
        assert_eq!(b, back);
    }

    #[test]
    fn xor_rejects_mismatched_lengths() {
        let a = BitString::zeros(3);
        assert!(matches!(
            a.xor(&BitString::zeros(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
