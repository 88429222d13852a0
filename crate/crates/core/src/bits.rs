//! Finite binary strings, the nodes of every tree in this crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A finite string over `{0, 1}`.
///
/// The total order on `BinString` is length-lexicographic (shorter strings
/// first, then lexicographic with `0 < 1`). This is the canonical
/// enumeration order of tree members and of universe elements.
///
/// The empty string prints as `.`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BinString {
    bits: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseBitsError {
    #[error("empty string; use `.` for the empty node")]
    Empty,
    #[error("invalid character {0:?}; expected `0` or `1`")]
    InvalidChar(char),
}

impl BinString {
    pub fn empty() -> Self {
        BinString { bits: Vec::new() }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BinString {
            bits: bits.into_iter().collect(),
        }
    }

    /// Parse a string of `0`/`1` characters. The empty input is the empty string.
    pub fn from_bit_chars(s: &str) -> Result<Self, ParseBitsError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitsError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|bits| BinString { bits })
    }

    /// The `n`-bit string with the given value, most significant bit first.
    pub fn from_value(value: u64, len: usize) -> Self {
        BinString::from_bits((0..len).rev().map(|k| k < 64 && (value >> k) & 1 == 1))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, pos: usize) -> Option<bool> {
        self.bits.get(pos).copied()
    }

    /// `self ⌢ b`.
    pub fn child(&self, b: bool) -> BinString {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(b);
        BinString { bits }
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    /// The string with its last bit removed, `None` for the empty string.
    pub fn parent(&self) -> Option<BinString> {
        if self.bits.is_empty() {
            None
        } else {
            Some(self.prefix(self.bits.len() - 1))
        }
    }

    /// `self↾n`. Panics if `n > self.len()`.
    pub fn prefix(&self, n: usize) -> BinString {
        BinString {
            bits: self.bits[..n].to_vec(),
        }
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &BinString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// `self ≺ other` (proper prefix).
    pub fn is_proper_prefix_of(&self, other: &BinString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// Every prefix of `self`, shortest first, including `⟨⟩` and `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BinString> + '_ {
        (0..=self.len()).map(move |n| self.prefix(n))
    }

    /// Value of the bits read as a binary numeral; `None` past 64 bits.
    pub fn value(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }
}

impl Ord for BinString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BinString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str(".");
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinString({self})")
    }
}

/// Accepts `.` for the empty string and any nonempty run of `0`/`1`.
impl FromStr for BinString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "." => Ok(BinString::empty()),
            "" => Err(ParseBitsError::Empty),
            _ => BinString::from_bit_chars(s),
        }
    }
}

/// Shorthand for tests and examples: `bs("01")`, `bs(".")`.
///
/// Panics on malformed input.
pub fn bs(s: &str) -> BinString {
    s.parse().unwrap_or_else(|e| panic!("bad bit string {s:?}: {e}"))
}
