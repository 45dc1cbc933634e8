use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Fe, FieldError};

/// Fixed-length vector over GF(2), packed LSB-first into 64-bit words.
///
/// Bits past `len` in the last word are always zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVec({}:", self.len)?;
        for i in 0..self.len.min(128) {
            write!(f, "{}", self.get(i) as u8)?;
        }
        if self.len > 128 {
            write!(f, "…")?;
        }
        write!(f, ")")
    }
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `value` (`len` ≤ 64).
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut v = Self { words, len };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// First 64 bits as an integer.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn inner(&self, other: &BitVec) -> Result<bool, FieldError> {
        if self.len != other.len {
            return Err(FieldError::LengthMismatch(self.len, other.len));
        }
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        Ok(ones & 1 == 1)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Bits at the given positions, in the given order.
    pub fn restrict(&self, idx: &[u32]) -> BitVec {
        let mut out = BitVec::zeros(idx.len());
        for (j, &i) in idx.iter().enumerate() {
            if self.get(i as usize) {
                out.words[j / 64] |= 1u64 << (j % 64);
            }
        }
        out
    }

    /// Bits `[start, start+len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len);
        let mut out = BitVec::zeros(len);
        for j in 0..len {
            if self.get(start + j) {
                out.words[j / 64] |= 1u64 << (j % 64);
            }
        }
        out
    }

    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in 0..self.len {
            if self.get(i) {
                out.set(i, true);
            }
        }
        for i in 0..other.len {
            if other.get(i) {
                out.set(self.len + i, true);
            }
        }
        out
    }

    /// Group bits `ell` at a time into symbols, zero-padding the tail.
    pub fn to_symbols(&self, ell: u32) -> Vec<Fe> {
        let ell = ell as usize;
        (0..self.len.div_ceil(ell))
            .map(|s| {
                let mut v = 0u16;
                for j in 0..ell {
                    let i = s * ell + j;
                    if i < self.len && self.get(i) {
                        v |= 1 << j;
                    }
                }
                Fe(v)
            })
            .collect()
    }

    /// Inverse of [`to_symbols`](Self::to_symbols); returns `None` if any
    /// padding bit is set.
    pub fn from_symbols(symbols: &[Fe], ell: u32, len: usize) -> Option<BitVec> {
        let ell = ell as usize;
        if symbols.len() * ell < len {
            return None;
        }
        let mut out = BitVec::zeros(len);
        for (s, sym) in symbols.iter().enumerate() {
            for j in 0..ell {
                if (sym.0 >> j) & 1 == 1 {
                    let i = s * ell + j;
                    if i >= len {
                        return None;
                    }
                    out.set(i, true);
                }
            }
        }
        Some(out)
    }

    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = (0..self.len.div_ceil(8))
            .map(|b| (self.words[b / 8] >> (8 * (b % 8))) as u8)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(s: &str, len: usize) -> Option<BitVec> {
        let bytes = hex::decode(s).ok()?;
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut words = vec![0u64; len.div_ceil(64)];
        for (b, &byte) in bytes.iter().enumerate() {
            words[b / 8] |= (byte as u64) << (8 * (b % 8));
        }
        let v = BitVec::from_words(words.clone(), len);
        (v.words == words).then_some(v)
    }
}

#[derive(Serialize, Deserialize)]
struct BitVecRepr {
    len: usize,
    hex: String,
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BitVecRepr { len: self.len, hex: self.to_hex() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = BitVecRepr::deserialize(d)?;
        BitVec::from_hex(&r.hex, r.len).ok_or_else(|| serde::de::Error::custom("malformed bit vector"))
    }
}
