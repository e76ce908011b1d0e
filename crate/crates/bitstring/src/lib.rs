//! Fixed-length binary vectors.
//!
//! Every component of the optimization loop trades in the same currency: a
//! vector of 0/1 decisions. [`BitString`] keeps the invariant (entries are
//! exactly 0 or 1) in one place and provides the text form (`"0110…"`) used
//! by dataset files and solver reports.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitStringError {
    #[error("bit string contains invalid character '{0}' (expected '0' or '1')")]
    InvalidChar(char),
    #[error("bit value {0} out of range (expected 0 or 1)")]
    InvalidBit(u8),
}

/// A fixed-length vector of binary decisions.
///
/// Bit `i` is addressed by [`BitString::get`]; the textual form writes bit 0
/// first, so `"011"` has bit 0 = 0, bit 1 = 1, bit 2 = 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<u8>);

impl BitString {
    /// All-zero vector of length `n`.
    pub fn zeros(n: usize) -> Self {
        BitString(vec![0; n])
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self, BitStringError> {
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(BitStringError::InvalidBit(bad));
        }
        Ok(BitString(bits))
    }

    /// Builds a vector by evaluating `f` at every index.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        BitString((0..n).map(|i| f(i) as u8).collect())
    }

    /// The bits of the little-endian integer `value`, i.e. bit `i` of the
    /// result equals `(value >> i) & 1`.
    pub fn from_index(value: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        BitString::from_fn(n, |i| (value >> i) & 1 == 1)
    }

    /// Uniformly random vector from the given generator.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        BitString::from_fn(n, |_| rng.random::<bool>())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    #[inline]
    pub fn is_set(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value as u8;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    /// Copy with bit `i` flipped.
    pub fn with_flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    /// Indices of set bits.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// The little-endian integer whose bit `i` is `self.get(i)`.
    /// Panics if the vector is longer than 64 bits.
    pub fn to_index(&self) -> u64 {
        assert!(self.len() <= 64, "bit string too long for a u64 index");
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(BitStringError::InvalidChar(other)),
            }
        }
        Ok(BitString(bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}
