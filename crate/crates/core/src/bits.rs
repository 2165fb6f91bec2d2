//! Finite binary strings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A finite string over `{0, 1}`.
///
/// Ordering is lexicographic with a proper prefix sorting first, which is
/// the same order as comparing the textual forms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<bool>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid binary digit {found:?} at offset {offset}")]
pub struct BitStringError {
    pub offset: usize,
    pub found: char,
}

impl BitString {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        Self(bits.into_iter().collect())
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

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.0.pop()
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    /// Returns `self` followed by `bit`.
    pub fn child(&self, bit: bool) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    pub fn concat(&self, other: &BitString) -> Self {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Whether `pattern` occurs as a contiguous substring.
    pub fn contains(&self, pattern: &BitString) -> bool {
        pattern.is_empty() || self.0.windows(pattern.len()).any(|w| w == pattern.bits())
    }

    pub fn ends_with(&self, suffix: &[bool]) -> bool {
        self.0.ends_with(suffix)
    }

    /// All strings of length exactly `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "length {len} too large to enumerate");
        (0u64..(1u64 << len)).map(move |code| {
            BitString((0..len).map(|i| (code >> (len - 1 - i)) & 1 == 1).collect())
        })
    }

    /// All strings of length at most `max_len`, length first then lexicographic.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    /// Parses a string of `0`/`1` digits; `ε` and the empty string denote
    /// the empty string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "ε" {
            return Ok(Self::empty());
        }
        s.chars()
            .enumerate()
            .map(|(offset, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                found => Err(BitStringError { offset, found }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let b: BitString = "0110".parse().unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.to_string(), "0110");
        assert_eq!("ε".parse::<BitString>().unwrap(), BitString::empty());
        assert_eq!("01x".parse::<BitString>().unwrap_err().offset, 2);
    }

    #[test]
    fn order_matches_text() {
        let mut all: Vec<BitString> = BitString::all_up_to(3).collect();
        all.sort();
        let text: Vec<String> = all.iter().map(|b| b.to_string()).collect();
        let mut sorted = text.clone();
        sorted.sort();
        assert_eq!(text, sorted);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(BitString::all_up_to(4).count(), 31);
        assert_eq!(BitString::all_of_length(0).next(), Some(BitString::empty()));
    }

    #[test]
    fn substring() {
        let b: BitString = "0010100".parse().unwrap();
        assert!(b.contains(&"101".parse().unwrap()));
        assert!(!b.contains(&"111".parse().unwrap()));
        assert!(b.contains(&BitString::empty()));
    }
}
