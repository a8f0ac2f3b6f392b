//! Bit strings ordered lexicographically by (length, value).
//!
//! The same order is used everywhere in the crate: the empty string first,
//! then `0`, `1`, `00`, `01`, ... The first character of a string is the most
//! significant bit of its numeric value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A finite sequence of bits. Bit `i` is the `i`-th character of the string;
/// bit 0 is the most significant bit of the string's numeric value.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bitstring {
    len: usize,
    words: Vec<u64>,
}

impl Bitstring {
    pub fn new() -> Self {
        Self::default()
    }

    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Self {
        Bitstring {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// The `len`-bit string whose numeric value is `value` (`len <= 64`).
    pub fn from_value(len: usize, value: u64) -> Self {
        assert!(len <= 64, "from_value supports at most 64 bits");
        if len < 64 {
            assert!(value < (1u64 << len), "value does not fit in {len} bits");
        }
        let mut s = Self::zeros(len);
        for i in 0..len {
            s.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, b: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, b);
    }

    /// Numeric value of the string (`len <= 64`).
    pub fn value_u64(&self) -> u64 {
        assert!(self.len <= 64);
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    /// Position in the global (length, value) enumeration: `2^len - 1 + value`.
    pub fn lex_index(&self) -> u64 {
        assert!(self.len < 63);
        (1u64 << self.len) - 1 + self.value_u64()
    }

    /// Inverse of [`lex_index`](Self::lex_index).
    pub fn from_lex_index(idx: u64) -> Self {
        let len = (idx + 1).ilog2() as usize;
        let value = idx + 1 - (1u64 << len);
        Self::from_value(len, value)
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The substring covering bit positions `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Bitstring {
        assert!(start <= end && end <= self.len);
        let mut s = Self::zeros(end - start);
        for i in start..end {
            s.set(i - start, self.get(i));
        }
        s
    }

    pub fn concat(&self, other: &Bitstring) -> Bitstring {
        let mut s = self.clone();
        for b in other.iter() {
            s.push(b);
        }
        s
    }

    /// Bits packed into bytes, bit `i` at byte `i / 8`, position `i % 8`.
    pub fn pack_lsb_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    /// Inverse of [`pack_lsb_bytes`](Self::pack_lsb_bytes).
    pub fn from_lsb_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut s = Self::zeros(len);
        for i in 0..len {
            s.set(i, (bytes[i / 8] >> (i % 8)) & 1 == 1);
        }
        // Padding bits beyond `len` must be zero.
        for i in len..bytes.len() * 8 {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                return None;
            }
        }
        Some(s)
    }
}

impl Ord for Bitstring {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for i in 0..self.len {
                match (self.get(i), other.get(i)) {
                    (false, true) => return Ordering::Less,
                    (true, false) => return Ordering::Greater,
                    _ => {}
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Bitstring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring(\"{self}\")")
    }
}

impl FromStr for Bitstring {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Bitstring::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(format!("invalid bit character {c:?}")),
            }
        }
        Ok(out)
    }
}

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumeration_order_starts_with_empty() {
        let first: Vec<String> = (0..7)
            .map(|i| Bitstring::from_lex_index(i).to_string())
            .collect();
        assert_eq!(first, ["", "0", "1", "00", "01", "10", "11"]);
    }

    #[test]
    fn value_is_msb_first() {
        let s: Bitstring = "0110".parse().unwrap();
        assert_eq!(s.value_u64(), 6);
        assert_eq!(Bitstring::from_value(4, 6), s);
    }

    #[test]
    fn slice_and_concat() {
        let s: Bitstring = "10110".parse().unwrap();
        assert_eq!(s.slice(1, 4).to_string(), "011");
        assert_eq!(s.slice(0, 0).to_string(), "");
        let t: Bitstring = "01".parse().unwrap();
        assert_eq!(s.concat(&t).to_string(), "1011001");
    }

    #[test]
    fn lsb_byte_packing_rejects_dirty_padding() {
        let s: Bitstring = "101".parse().unwrap();
        let bytes = s.pack_lsb_bytes();
        assert_eq!(bytes, vec![0b0000_0101]);
        assert_eq!(Bitstring::from_lsb_bytes(3, &bytes), Some(s));
        assert_eq!(Bitstring::from_lsb_bytes(3, &[0b1000_0101]), None);
    }

    #[test]
    fn fnv_vector() {
        // Published FNV-1a test vector.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }

    proptest! {
        #[test]
        fn lex_index_roundtrip(idx in 0u64..100_000) {
            let s = Bitstring::from_lex_index(idx);
            prop_assert_eq!(s.lex_index(), idx);
        }

        #[test]
        fn lex_index_is_order_isomorphic(a in 0u64..10_000, b in 0u64..10_000) {
            let sa = Bitstring::from_lex_index(a);
            let sb = Bitstring::from_lex_index(b);
            prop_assert_eq!(a.cmp(&b), sa.cmp(&sb));
        }

        #[test]
        fn pack_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let s = Bitstring::from_bools(&bits);
            let packed = s.pack_lsb_bytes();
            prop_assert_eq!(Bitstring::from_lsb_bytes(s.len(), &packed), Some(s));
        }
    }
}
