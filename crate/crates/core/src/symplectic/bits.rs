//! Packed GF(2) vectors.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length bit vector packed into `u64` words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` are
/// always zero, so word-wise comparisons and popcounts are exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Low `len` bits of `value`, bit `i` of the vector being bit `i` of the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut b = Self::zeros(len);
        if len > 0 {
            let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
            b.words[0] = value & mask;
        }
        b
    }

    /// Inverse of [`Bits::from_u64`]; panics for vectors longer than 64.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut b = Self::zeros(len);
        for w in b.words.iter_mut() {
            *w = rng.gen();
        }
        b.clear_tail();
        b
    }

    /// Uniform over the nonzero vectors of length `len`.
    pub fn random_nonzero<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        assert!(len > 0, "no nonzero vector of length 0");
        loop {
            let b = Self::random(len, rng);
            if !b.is_zero() {
                return b;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if v {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn push(&mut self, v: bool) {
        if self.len % WORD == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }

    /// Appends `k` zero bits.
    pub fn extend_zeros(&mut self, k: usize) {
        self.len += k;
        self.words.resize(words_for(self.len), 0);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.and_weight(other) & 1 == 1
    }

    /// Popcount of the bitwise AND.
    pub fn and_weight(&self, other: &Bits) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The bits at `positions`, in that order.
    pub fn gather(&self, positions: &[usize]) -> Bits {
        let mut out = Bits::zeros(positions.len());
        for (k, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.set(k, true);
            }
        }
        out
    }

    /// Writes `src[k]` into position `positions[k]`.
    pub fn scatter(&mut self, positions: &[usize], src: &Bits) {
        debug_assert_eq!(positions.len(), src.len());
        for (k, &p) in positions.iter().enumerate() {
            self.set(p, src.get(k));
        }
    }

    pub fn slice(&self, start: usize, end: usize) -> Bits {
        let mut out = Bits::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        let base = out.len;
        out.extend_zeros(other.len);
        for i in other.ones_iter() {
            out.set(base + i, true);
        }
        out
    }

    /// Lowercase hex, most significant nibble first, of the vector read as a
    /// little-endian integer (bit 0 is the least significant bit). The string
    /// has exactly `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nib = 0u8;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < self.len && self.get(i) {
                    nib |= 1 << b;
                }
            }
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Bits> {
        if s.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "hex string {s:?} has {} digits, expected {} for {len} bits",
                s.len(),
                len.div_ceil(4)
            )));
        }
        let mut out = Bits::zeros(len);
        for (k, ch) in s.chars().rev().enumerate() {
            let nib = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {ch:?}")))?;
            for b in 0..4 {
                if nib >> b & 1 == 1 {
                    let i = k * 4 + b;
                    if i >= len {
                        return Err(Error::Parse(format!("hex {s:?} overflows {len} bits")));
                    }
                    out.set(i, true);
                }
            }
        }
        Ok(out)
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Serialized as `{"len": n, "hex": "..."}` so that lengths are never ambiguous.
impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Bits", 2)?;
        st.serialize_field("len", &self.len)?;
        st.serialize_field("hex", &self.to_hex())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            len: usize,
            hex: String,
        }
        let raw = Raw::deserialize(d)?;
        Bits::from_hex(&raw.hex, raw.len).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn push_crosses_word_boundary() {
        let mut b = Bits::zeros(63);
        b.push(true);
        b.push(true);
        assert_eq!(b.len(), 65);
        assert_eq!(b.ones_iter().collect::<Vec<_>>(), vec![63, 64]);
    }

    #[test]
    fn hex_is_little_endian_integer() {
        let b = Bits::from_u64(0b1_0110, 5);
        assert_eq!(b.to_hex(), "16");
        assert!(Bits::from_hex("36", 5).is_err());
    }

    proptest! {
        #[test]
        fn hex_roundtrip(len in 0usize..200, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = Bits::random(len, &mut rng);
            prop_assert_eq!(Bits::from_hex(&b.to_hex(), len).unwrap(), b);
        }
    }
}
