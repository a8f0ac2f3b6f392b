//! Combinatorial designs and the Nisan-Wigderson generator.
//!
//! A design is a family of equal-size subsets of a seed index universe with
//! bounded pairwise intersections. The generator applies a hard truth table
//! to the seed restricted to each design set, one output bit per set. XOR
//! amplification stands in for the worst-case-to-average-case hardness step
//! at this scale.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::bits::Bitstring;
use crate::rng::{Rng, RngStream};

/// Fixed candidate-order seed for the greedy design construction, so every
/// build of the same parameters produces the identical design.
pub const DESIGN_CANDIDATE_SEED: u64 = 0x6e77_6473_6e31_7631;

/// Attempted pseudorandom candidates per set before falling back.
const CANDIDATES_PER_SET: u64 = 50_000;

/// Exhaustive fallback is used when `C(l, k)` is at most this.
const EXHAUSTIVE_SUBSET_CAP: u128 = 1_000_000;

/// Default cap on the seed length for full-seed-space enumeration.
pub const DEFAULT_SEED_CAP: u32 = 20;

#[derive(Debug, Error)]
pub enum NwError {
    #[error("invalid design parameters: {0}")]
    BadParams(String),
    #[error("design construction infeasible: found only {found} of {wanted} sets within the candidate budget")]
    Infeasible { found: usize, wanted: usize },
    #[error("design invariant violated: {0}")]
    InvalidDesign(String),
    #[error("seed length {got} does not match the design universe {want}")]
    SeedLength { got: usize, want: usize },
    #[error("arity mismatch: truth table has arity {table}, design sets have size {set}")]
    ArityMismatch { table: u32, set: usize },
    #[error("seed length {0} exceeds the enumeration cap {1}")]
    CapExceeded(u32, u32),
    #[error("amplified arity {0} exceeds the table cap {1}")]
    ArityBudget(u32, u32),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A family of `k`-element subsets of `{0..l-1}` with pairwise intersections
/// of size at most `a`. Sets are stored in increasing index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub universe: usize,
    pub set_size: usize,
    pub intersection_bound: usize,
    pub sets: Vec<Vec<usize>>,
}

impl Design {
    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn validate(&self) -> Result<(), NwError> {
        if self.universe > 128 {
            return Err(NwError::InvalidDesign("universe larger than 128".into()));
        }
        let mut masks = Vec::with_capacity(self.sets.len());
        for (i, s) in self.sets.iter().enumerate() {
            if s.len() != self.set_size {
                return Err(NwError::InvalidDesign(format!(
                    "set {i} has {} elements, expected {}",
                    s.len(),
                    self.set_size
                )));
            }
            if !s.windows(2).all(|w| w[0] < w[1]) {
                return Err(NwError::InvalidDesign(format!(
                    "set {i} is not strictly increasing"
                )));
            }
            if s.iter().any(|&e| e >= self.universe) {
                return Err(NwError::InvalidDesign(format!(
                    "set {i} has an element outside the universe"
                )));
            }
            masks.push(mask_of(s));
        }
        for i in 0..masks.len() {
            for j in 0..i {
                let inter = (masks[i] & masks[j]).count_ones() as usize;
                if inter > self.intersection_bound {
                    return Err(NwError::InvalidDesign(format!(
                        "sets {j} and {i} share {inter} elements, bound is {}",
                        self.intersection_bound
                    )));
                }
            }
        }
        Ok(())
    }

    /// Text form: a header line `l k a m`, then one line of indices per set.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.universe,
            self.set_size,
            self.intersection_bound,
            self.sets.len()
        );
        for s in &self.sets {
            let line: Vec<String> = s.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Design, NwError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| NwError::Parse("empty".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| NwError::Parse(format!("bad header token {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        let [l, k, a, m] = nums[..] else {
            return Err(NwError::Parse("header must be `l k a m`".into()));
        };
        let mut sets = Vec::with_capacity(m);
        for line in lines {
            let set: Vec<usize> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| NwError::Parse(format!("bad index {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            sets.push(set);
        }
        if sets.len() != m {
            return Err(NwError::Parse(format!(
                "expected {m} sets, found {}",
                sets.len()
            )));
        }
        let d = Design {
            universe: l,
            set_size: k,
            intersection_bound: a,
            sets,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NwError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Design, NwError> {
        Design::from_text(&fs::read_to_string(path)?)
    }
}

fn mask_of(set: &[usize]) -> u128 {
    set.iter().fold(0u128, |m, &e| m | (1u128 << e))
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// Sample a k-subset of `{0..l-1}` without replacement (Floyd's algorithm).
fn sample_subset(rng: &mut Rng, l: usize, k: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for j in (l - k)..l {
        let t = rng.below(j as u64 + 1) as usize;
        if picked.contains(&t) {
            picked.push(j);
        } else {
            picked.push(t);
        }
    }
    picked.sort_unstable();
    picked
}

/// Advance to the next k-subset in lexicographic order; false after the last.
fn next_subset(set: &mut [usize], l: usize) -> bool {
    let k = set.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if set[i] < l - k + i {
            set[i] += 1;
            for j in i + 1..k {
                set[j] = set[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Greedy deterministic design construction. Candidate sets are tried in the
/// fixed pseudorandom order derived from [`DESIGN_CANDIDATE_SEED`]; when the
/// budget runs out and the subset space is small enough, every k-subset is
/// tried in lexicographic order before giving up.
pub fn greedy_design(m: usize, k: usize, a: usize, l: usize) -> Result<Design, NwError> {
    if k > l {
        return Err(NwError::BadParams(format!("k = {k} exceeds l = {l}")));
    }
    if l > 128 {
        return Err(NwError::BadParams(format!("l = {l} exceeds 128")));
    }
    if m == 0 {
        return Err(NwError::BadParams("m must be positive".into()));
    }
    let mut rng = Rng::from_stream(RngStream::from_key(DESIGN_CANDIDATE_SEED));
    let mut masks: Vec<u128> = Vec::with_capacity(m);
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(m);

    let compatible = |cand: u128, masks: &[u128]| {
        masks
            .iter()
            .all(|&ms| (ms & cand).count_ones() as usize <= a)
    };

    'outer: while sets.len() < m {
        for _ in 0..CANDIDATES_PER_SET {
            let cand = sample_subset(&mut rng, l, k);
            let cm = mask_of(&cand);
            if compatible(cm, &masks) {
                masks.push(cm);
                sets.push(cand);
                continue 'outer;
            }
        }
        // Exhaustive fallback in lexicographic subset order.
        if binomial(l as u128, k as u128).is_some_and(|c| c <= EXHAUSTIVE_SUBSET_CAP) {
            let mut cand: Vec<usize> = (0..k).collect();
            loop {
                let cm = mask_of(&cand);
                if compatible(cm, &masks) {
                    masks.push(cm);
                    sets.push(cand);
                    continue 'outer;
                }
                if !next_subset(&mut cand, l) {
                    break;
                }
            }
        }
        return Err(NwError::Infeasible {
            found: sets.len(),
            wanted: m,
        });
    }

    let d = Design {
        universe: l,
        set_size: k,
        intersection_bound: a,
        sets,
    };
    debug_assert!(d.validate().is_ok());
    Ok(d)
}

/// Textbook parameter rule: for hard arity `k` and `m` requested output bits,
/// intersection bound `ceil(log2 m)` and universe `k^2` clamped to the seed cap.
pub fn default_params(hard_arity: u32, m: usize, seed_cap: u32) -> (usize, usize) {
    let a = (m.max(2) as f64).log2().ceil() as usize;
    let l = ((hard_arity as usize) * (hard_arity as usize)).min(seed_cap as usize);
    (a, l)
}

/// A boolean function on `arity`-bit inputs, bit `v` giving the value on the
/// input with numeric value `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: u32,
    bits: Bitstring,
}

impl TruthTable {
    pub fn from_bits(arity: u32, bits: Bitstring) -> Result<Self, NwError> {
        if bits.len() != 1usize << arity {
            return Err(NwError::BadParams(format!(
                "truth table of arity {arity} needs {} bits, got {}",
                1usize << arity,
                bits.len()
            )));
        }
        Ok(TruthTable { arity, bits })
    }

    pub fn constant(arity: u32, value: bool) -> Self {
        let mut bits = Bitstring::zeros(1 << arity);
        if value {
            for i in 0..bits.len() {
                bits.set(i, true);
            }
        }
        TruthTable { arity, bits }
    }

    /// Parity of the input bits; a handy nondegenerate test function.
    pub fn parity(arity: u32) -> Self {
        let mut bits = Bitstring::zeros(1 << arity);
        for v in 0..(1u64 << arity) {
            bits.set(v as usize, v.count_ones() % 2 == 1);
        }
        TruthTable { arity, bits }
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn bits(&self) -> &Bitstring {
        &self.bits
    }

    #[inline]
    pub fn eval_value(&self, v: u64) -> bool {
        self.bits.get(v as usize)
    }

    pub fn ones_fraction(&self) -> f64 {
        self.bits.count_ones() as f64 / self.bits.len() as f64
    }

    /// Binary form: an 8-byte LE bit-count header, then the bits packed
    /// LSB-first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.bits.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.bits.pack_lsb_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NwError> {
        if bytes.len() < 8 {
            return Err(NwError::Parse("truncated truth table header".into()));
        }
        let len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        if len == 0 || !len.is_power_of_two() {
            return Err(NwError::Parse(format!(
                "truth table length {len} is not a power of two"
            )));
        }
        let bits = Bitstring::from_lsb_bytes(len, &bytes[8..])
            .ok_or_else(|| NwError::Parse("truth table body length mismatch".into()))?;
        TruthTable::from_bits(len.ilog2(), bits)
    }
}

/// XOR of `copies` independent evaluations of `f`, one per consecutive
/// arity-sized block of the input.
pub fn xor_amplify(f: &TruthTable, copies: u32) -> Result<TruthTable, NwError> {
    const ARITY_CAP: u32 = 24;
    if copies == 0 {
        return Err(NwError::BadParams("copies must be positive".into()));
    }
    let k = f.arity();
    let arity = k * copies;
    if arity > ARITY_CAP {
        return Err(NwError::ArityBudget(arity, ARITY_CAP));
    }
    let mut bits = Bitstring::zeros(1 << arity);
    let block_mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    for v in 0..(1u64 << arity) {
        let mut acc = false;
        for c in 0..copies {
            let block = (v >> (k * (copies - 1 - c))) & block_mask;
            acc ^= f.eval_value(block);
        }
        bits.set(v as usize, acc);
    }
    TruthTable::from_bits(arity, bits)
}

/// A design plus a hard truth table whose arity equals the design set size.
#[derive(Debug, Clone)]
pub struct NwGenerator {
    design: Design,
    table: TruthTable,
}

impl NwGenerator {
    pub fn new(design: Design, table: TruthTable) -> Result<Self, NwError> {
        design.validate()?;
        if table.arity() as usize != design.set_size {
            return Err(NwError::ArityMismatch {
                table: table.arity(),
                set: design.set_size,
            });
        }
        Ok(NwGenerator { design, table })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn table(&self) -> &TruthTable {
        &self.table
    }

    pub fn seed_len(&self) -> usize {
        self.design.universe
    }

    pub fn output_len(&self) -> usize {
        self.design.num_sets()
    }

    /// Output bit `i` is the table evaluated on the seed bits selected by set
    /// `i`, in increasing index order.
    pub fn output(&self, seed: &Bitstring) -> Result<Bitstring, NwError> {
        if seed.len() != self.design.universe {
            return Err(NwError::SeedLength {
                got: seed.len(),
                want: self.design.universe,
            });
        }
        let mut out = Bitstring::zeros(self.output_len());
        for (i, set) in self.design.sets.iter().enumerate() {
            let mut v = 0u64;
            for &idx in set {
                v = (v << 1) | seed.get(idx) as u64;
            }
            out.set(i, self.table.eval_value(v));
        }
        Ok(out)
    }

    /// Output for the seed with numeric value `s`, as a packed word
    /// (output bit `i` at word bit `i`). Requires at most 64 sets.
    pub fn output_word(&self, s: u64) -> u64 {
        debug_assert!(self.output_len() <= 64 && self.design.universe <= 64);
        let l = self.design.universe;
        let mut out = 0u64;
        for (i, set) in self.design.sets.iter().enumerate() {
            let mut v = 0u64;
            for &idx in set {
                v = (v << 1) | ((s >> (l - 1 - idx)) & 1);
            }
            if self.table.eval_value(v) {
                out |= 1 << i;
            }
        }
        out
    }

    /// All `2^l` outputs in seed order. Restartable: each call returns a
    /// fresh iterator.
    pub fn enumerate_outputs(&self) -> Result<impl Iterator<Item = Bitstring> + '_, NwError> {
        self.enumerate_outputs_with_cap(DEFAULT_SEED_CAP)
    }

    pub fn enumerate_outputs_with_cap(
        &self,
        cap: u32,
    ) -> Result<impl Iterator<Item = Bitstring> + '_, NwError> {
        let l = self.design.universe as u32;
        if l > cap {
            return Err(NwError::CapExceeded(l, cap));
        }
        Ok((0..(1u64 << l)).map(move |s| {
            let seed = Bitstring::from_value(self.design.universe, s);
            self.output(&seed).expect("seed length is correct")
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singleton_design_is_the_identity_family() {
        let d = greedy_design(5, 1, 0, 5).unwrap();
        d.validate().unwrap();
        let mut seen: Vec<usize> = d.sets.iter().map(|s| s[0]).collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn one_set_is_always_feasible() {
        let d = greedy_design(1, 3, 0, 5).unwrap();
        d.validate().unwrap();
        assert_eq!(d.num_sets(), 1);
    }

    #[test]
    fn sixteen_sets_of_four_in_sixteen() {
        let d = greedy_design(16, 4, 2, 16).unwrap();
        d.validate().unwrap();
        assert_eq!(d.num_sets(), 16);
    }

    #[test]
    fn construction_is_deterministic() {
        let d1 = greedy_design(8, 3, 1, 12).unwrap();
        let d2 = greedy_design(8, 3, 1, 12).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn infeasible_when_universe_is_exhausted() {
        // Only two disjoint 2-sets fit in a 4-element universe.
        let err = greedy_design(3, 2, 0, 4);
        assert!(matches!(err, Err(NwError::Infeasible { found: 2, .. })));
    }

    #[test]
    fn design_text_roundtrip() {
        let d = greedy_design(6, 3, 2, 9).unwrap();
        let text = d.to_text();
        assert_eq!(Design::from_text(&text).unwrap(), d);
    }

    #[test]
    fn constant_table_gives_constant_output() {
        let d = greedy_design(7, 2, 1, 6).unwrap();
        let g = NwGenerator::new(d, TruthTable::constant(2, false)).unwrap();
        for out in g.enumerate_outputs().unwrap() {
            assert_eq!(out, Bitstring::zeros(7));
        }
    }

    #[test]
    fn singleton_identity_design_copies_seed_bits() {
        let d = Design {
            universe: 4,
            set_size: 1,
            intersection_bound: 0,
            sets: vec![vec![0], vec![1], vec![2], vec![3]],
        };
        // Identity on one bit: f(0) = 0, f(1) = 1.
        let f = TruthTable::from_bits(1, "01".parse().unwrap()).unwrap();
        let g = NwGenerator::new(d, f).unwrap();
        let seed: Bitstring = "1010".parse().unwrap();
        assert_eq!(g.output(&seed).unwrap(), seed);
    }

    #[test]
    fn parity_design_output_hand_computed() {
        let d = Design {
            universe: 8,
            set_size: 4,
            intersection_bound: 2,
            sets: vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![0, 2, 4, 6]],
        };
        let g = NwGenerator::new(d, TruthTable::parity(4)).unwrap();
        let seed: Bitstring = "11010010".parse().unwrap();
        // Restrictions: 1101 (parity 1), 0010 (parity 1), 1001 (parity 0).
        assert_eq!(g.output(&seed).unwrap().to_string(), "110");
    }

    #[test]
    fn xor_amplify_identity_at_one_copy() {
        let f = TruthTable::parity(3);
        assert_eq!(xor_amplify(&f, 1).unwrap(), f);
    }

    #[test]
    fn xor_amplify_constant_zero_stays_zero() {
        let f = TruthTable::constant(2, false);
        let amp = xor_amplify(&f, 3).unwrap();
        assert_eq!(amp, TruthTable::constant(6, false));
    }

    #[test]
    fn xor_amplify_two_bit_and_enumerated() {
        // f = AND of the two input bits.
        let f = TruthTable::from_bits(2, "0001".parse().unwrap()).unwrap();
        let amp = xor_amplify(&f, 2).unwrap();
        assert_eq!(amp.arity(), 4);
        for v in 0..16u64 {
            let hi = (v >> 2) & 3;
            let lo = v & 3;
            let expect = (hi == 3) ^ (lo == 3);
            assert_eq!(amp.eval_value(v), expect, "input {v:04b}");
        }
    }

    #[test]
    fn truth_table_bytes_roundtrip() {
        let f = TruthTable::parity(5);
        assert_eq!(TruthTable::from_bytes(&f.to_bytes()).unwrap(), f);
    }

    #[test]
    fn enumerate_outputs_counts_and_restartability() {
        let d = Design {
            universe: 1,
            set_size: 1,
            intersection_bound: 0,
            sets: vec![vec![0]],
        };
        let f = TruthTable::from_bits(1, "01".parse().unwrap()).unwrap();
        let g = NwGenerator::new(d, f).unwrap();
        assert_eq!(g.enumerate_outputs().unwrap().count(), 2);
        // A second call starts over.
        assert_eq!(g.enumerate_outputs().unwrap().count(), 2);
    }

    #[test]
    fn enumeration_matches_per_seed_calls() {
        let d = greedy_design(5, 3, 2, 8).unwrap();
        let g = NwGenerator::new(d, TruthTable::parity(3)).unwrap();
        let streamed: Vec<Bitstring> = g.enumerate_outputs().unwrap().collect();
        for (s, out) in streamed.iter().enumerate() {
            let seed = Bitstring::from_value(8, s as u64);
            assert_eq!(&g.output(&seed).unwrap(), out);
            assert_eq!(g.output_word(s as u64), out_word(out));
        }
    }

    fn out_word(out: &Bitstring) -> u64 {
        out.iter()
            .enumerate()
            .fold(0u64, |acc, (i, b)| acc | ((b as u64) << i))
    }

    #[test]
    fn seed_cap_is_enforced() {
        let d = greedy_design(2, 2, 1, 24).unwrap();
        let g = NwGenerator::new(d, TruthTable::parity(2)).unwrap();
        assert!(matches!(
            g.enumerate_outputs().map(|it| it.count()),
            Err(NwError::CapExceeded(24, 20))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Changing a seed bit outside the union of design sets never
        /// changes the output.
        #[test]
        fn output_ignores_unused_seed_bits(seed_val in 0u64..256) {
            let d = Design {
                universe: 8,
                set_size: 2,
                intersection_bound: 1,
                sets: vec![vec![0, 1], vec![1, 2]],
            };
            let g = NwGenerator::new(d, TruthTable::parity(2)).unwrap();
            let base = Bitstring::from_value(8, seed_val);
            let out = g.output(&base).unwrap();
            for unused in 3..8usize {
                let mut flipped = base.clone();
                flipped.set(unused, !flipped.get(unused));
                prop_assert_eq!(g.output(&flipped).unwrap(), out.clone());
            }
        }

        /// XOR algebra: the two-copy amplification vanishes on doubled inputs.
        #[test]
        fn doubled_inputs_cancel(x in 0u64..16) {
            let f = TruthTable::parity(4);
            let amp = xor_amplify(&f, 2).unwrap();
            prop_assert!(!amp.eval_value((x << 4) | x));
        }
    }
}
