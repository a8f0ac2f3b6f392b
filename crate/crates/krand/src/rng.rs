//! Deterministic, splittable pseudorandomness.
//!
//! All randomness in the crate flows from a single 64-bit seed through named
//! streams: `stream = mix(seed, purpose label)`. Streams are counter-based
//! (splitmix64 finalizer), so any draw can be addressed directly by index —
//! which is what lets lazily materialized advice reproduce exactly the bits
//! an eager draw would have produced.

use crate::bits::{fnv1a64, Bitstring};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// An addressable stream of pseudorandom 64-bit words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    /// Stream derived from a global seed and a purpose label.
    pub fn new(seed: u64, label: &str) -> Self {
        RngStream {
            key: splitmix(seed ^ fnv1a64(label.as_bytes())),
        }
    }

    pub fn from_key(key: u64) -> Self {
        RngStream { key }
    }

    /// The `i`-th word of the stream. Pure in `i`.
    #[inline]
    pub fn at(&self, i: u64) -> u64 {
        splitmix(
            self.key
                .wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    /// Child stream for an integer tag (domain-separated from `at`).
    pub fn derive_u64(&self, tag: u64) -> RngStream {
        RngStream {
            key: splitmix(self.key ^ 0x5851_f42d_4c95_7f2d ^ tag.wrapping_mul(GOLDEN)),
        }
    }

    /// Child stream for a label.
    pub fn derive(&self, label: &str) -> RngStream {
        RngStream {
            key: splitmix(self.key ^ fnv1a64(label.as_bytes())),
        }
    }
}

/// Stateful cursor over a stream.
#[derive(Clone, Debug)]
pub struct Rng {
    stream: RngStream,
    ctr: u64,
}

impl Rng {
    pub fn from_stream(stream: RngStream) -> Self {
        Rng { stream, ctr: 0 }
    }

    pub fn new(seed: u64, label: &str) -> Self {
        Self::from_stream(RngStream::new(seed, label))
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.stream.at(self.ctr);
        self.ctr += 1;
        v
    }

    /// Uniform-ish value in `[0, n)` by modular reduction.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }

    pub fn bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    pub fn bits(&mut self, len: usize) -> Bitstring {
        let mut s = Bitstring::zeros(len);
        for i in 0..len {
            s.set(i, self.bit());
        }
        s
    }
}
