//! Finite binary strings labelling preimages of the critical point and the
//! components of Green-level bands.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::HenonError;

/// A finite string over `{0, 1}`. The empty string labels the critical point itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DyadicString {
    bits: Vec<bool>,
}

impl DyadicString {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The string of length `len` whose bits spell `index` in binary, first bit most significant.
    pub fn from_index(index: usize, len: usize) -> Self {
        let bits = (0..len).map(|i| (index >> (len - 1 - i)) & 1 == 1).collect();
        Self { bits }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
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

    /// `α ↦ αb`, appending on the right.
    pub fn child(&self, bit: bool) -> Self {
        let mut bits = self.bits.clone();
        bits.push(bit);
        Self { bits }
    }

    /// Drops the last bit; `None` for the empty string.
    pub fn parent(&self) -> Option<Self> {
        if self.bits.is_empty() {
            return None;
        }
        Some(Self { bits: self.bits[..self.bits.len() - 1].to_vec() })
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self { bits: self.bits[..len.min(self.bits.len())].to_vec() }
    }

    /// All strings of length `n`, in index order.
    pub fn all(n: usize) -> impl Iterator<Item = DyadicString> {
        (0..1usize << n).map(move |i| DyadicString::from_index(i, n))
    }
}

impl PartialOrd for DyadicString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bits.len().cmp(&other.bits.len()).then_with(|| self.bits.cmp(&other.bits))
    }
}

impl fmt::Display for DyadicString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("∅");
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DyadicString {
    type Err = HenonError;

    /// Accepts `0`/`1` strings; `""`, `"-"`, `"e"` and `"∅"` denote the empty string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if matches!(s, "" | "-" | "e" | "∅") {
            return Ok(Self::empty());
        }
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(HenonError::InvalidArgument(format!("bad dyadic digit {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bits)
    }
}

impl Serialize for DyadicString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for DyadicString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_order() {
        for n in 0..6 {
            for (i, s) in DyadicString::all(n).enumerate() {
                assert_eq!(s.len(), n);
                assert_eq!(s.index(), i);
            }
        }
        let a: DyadicString = "01".parse().unwrap();
        assert_eq!(a.child(true).to_string(), "011");
        assert_eq!(a.parent().unwrap().to_string(), "0");
        assert_eq!(DyadicString::empty().to_string(), "∅");
        assert!(DyadicString::empty().parent().is_none());
        assert!("012".parse::<DyadicString>().is_err());
        assert!("1".parse::<DyadicString>().unwrap() > "0".parse().unwrap());
        assert!("00".parse::<DyadicString>().unwrap() > "1".parse().unwrap());
    }

    #[test]
    fn json_uses_plain_digits() {
        let s: DyadicString = "10".parse().unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, "\"10\"");
        let e = serde_json::to_string(&DyadicString::empty()).unwrap();
        assert_eq!(e, "\"\"");
        let back: DyadicString = serde_json::from_str(&e).unwrap();
        assert!(back.is_empty());
    }
}
