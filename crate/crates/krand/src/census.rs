//! The incompressible-string census: materializing the set of strings whose
//! minimal description length is at least their own length, measuring its
//! density, the conditional complexity of the complement's characteristic
//! prefix, and the constructive hitting-sequence search.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

use crate::bits::Bitstring;
use crate::kvm::KTable;
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("length {n} outside table range {max}")]
    OutOfRange { n: u32, max: u32 },
    #[error("empty length range")]
    EmptyRange,
    #[error("invalid instance: {0}")]
    BadInstance(String),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("table mismatch: {0}")]
    TableMismatch(String),
}

/// Membership bit vector of the incompressible strings of one length.
/// Bit `v` is set iff the `n`-bit string with value `v` has no description
/// shorter than `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSet {
    pub n: u32,
    pub membership: Bitstring,
}

impl RandomSet {
    pub fn contains_value(&self, v: u64) -> bool {
        self.membership.get(v as usize)
    }

    pub fn count(&self) -> u64 {
        self.membership.count_ones()
    }
}

pub fn random_set(table: &KTable, n: u32) -> Result<RandomSet, CensusError> {
    if n > table.max_len {
        return Err(CensusError::OutOfRange {
            n,
            max: table.max_len,
        });
    }
    let mut membership = Bitstring::zeros(1 << n);
    for v in 0..(1u64 << n) {
        let x = Bitstring::from_value(n as usize, v);
        let incompressible = match table.entry(&x) {
            None => true,
            Some(e) => e as u32 >= n,
        };
        membership.set(v as usize, incompressible);
    }
    Ok(RandomSet { n, membership })
}

/// Characteristic sequence of the incompressible strings of length `m`, over
/// the `2^m` strings of that length in value order. Doubles as the truth
/// table of a hard function on `m`-bit inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSeq {
    pub m: u32,
    pub bits: Bitstring,
}

pub fn char_seq(table: &KTable, m: u32) -> Result<CharSeq, CensusError> {
    let set = random_set(table, m)?;
    Ok(CharSeq {
        m,
        bits: set.membership,
    })
}

/// Minimal big-endian binary representation of `n` (no leading zeros;
/// `0` encodes as "0").
pub fn binary_of(n: u64) -> Bitstring {
    if n == 0 {
        return Bitstring::from_value(1, 0);
    }
    let len = 64 - n.leading_zeros() as usize;
    Bitstring::from_value(len, n)
}

/// First `n` bits of the characteristic sequence of the *compressible*
/// strings, over all strings in (length, value) order starting from the
/// empty string.
pub fn complement_prefix(table: &KTable, n: u32) -> Result<Bitstring, CensusError> {
    let mut bits = Bitstring::zeros(n as usize);
    for i in 0..n as u64 {
        let x = Bitstring::from_lex_index(i);
        if x.len() > table.max_len as usize {
            return Err(CensusError::OutOfRange {
                n: x.len() as u32,
                max: table.max_len,
            });
        }
        let compressible = match table.entry(&x) {
            None => false,
            Some(e) => (e as usize) < x.len(),
        };
        bits.set(i as usize, compressible);
    }
    Ok(bits)
}

/// Exact conditional complexity of the length-`n` complement prefix, looked
/// up in a table built with condition `binary_of(n)`.
pub fn complement_prefix_complexity(
    base: &KTable,
    cond: &KTable,
    n: u32,
) -> Result<u32, CensusError> {
    if cond.condition.as_ref() != Some(&binary_of(n as u64)) {
        return Err(CensusError::TableMismatch(format!(
            "conditioned table was not built with condition binary({n})"
        )));
    }
    if n > cond.max_len {
        return Err(CensusError::OutOfRange {
            n,
            max: cond.max_len,
        });
    }
    let prefix = complement_prefix(base, n)?;
    cond.entry(&prefix).map(u32::from).ok_or_else(|| {
        CensusError::TableMismatch(format!(
            "no program found for the {n}-bit prefix, which the literal branch rules out"
        ))
    })
}

/// One row of the census report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub n: u32,
    pub count: u64,
    /// Minimal integer d with `count >= 2^n / d` at this length.
    pub d_min: u32,
    /// Conditional complexity of the length-n complement prefix, when measured.
    pub cond_complexity: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub rows: Vec<CensusRow>,
    /// Minimal integer d that works across the whole range.
    pub measured_d: u32,
    /// Minimal integer c with `cond_complexity >= n / c` across the range,
    /// when conditional complexities were measured.
    pub measured_c: Option<u32>,
}

fn div_ceil_u64(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Census counts and density over an inclusive length range.
pub fn density_report(table: &KTable, lo: u32, hi: u32) -> Result<CensusReport, CensusError> {
    if lo > hi {
        return Err(CensusError::EmptyRange);
    }
    let mut rows = Vec::new();
    let mut measured_d = 1u32;
    for n in lo..=hi {
        let count = random_set(table, n)?.count();
        let d_min = if count == 0 {
            return Err(CensusError::BadInstance(format!(
                "no incompressible strings of length {n}; no finite density bound"
            )));
        } else {
            div_ceil_u64(1 << n, count) as u32
        };
        measured_d = measured_d.max(d_min);
        rows.push(CensusRow {
            n,
            count,
            d_min,
            cond_complexity: None,
        });
    }
    Ok(CensusReport {
        rows,
        measured_d,
        measured_c: None,
    })
}

/// Attach conditional prefix complexities to a density report and compute the
/// measured c. `cond_tables` supplies, for each row length n, the table built
/// with condition `binary_of(n)`.
pub fn attach_cond_complexities(
    report: &mut CensusReport,
    base: &KTable,
    cond_tables: &[(u32, &KTable)],
) -> Result<(), CensusError> {
    let mut measured_c = 1u32;
    for row in report.rows.iter_mut() {
        let Some((_, cond)) = cond_tables.iter().find(|(n, _)| *n == row.n) else {
            return Err(CensusError::TableMismatch(format!(
                "no conditioned table supplied for n = {}",
                row.n
            )));
        };
        let c = complement_prefix_complexity(base, cond, row.n)?;
        row.cond_complexity = Some(c);
        if row.n > 0 {
            // Minimal integer c with complexity >= n / c, i.e. c*complexity >= n.
            let need = div_ceil_u64(row.n as u64, c.max(1) as u64) as u32;
            measured_c = measured_c.max(need);
        }
    }
    report.measured_c = Some(measured_c);
    Ok(())
}

/// A family of candidate sets indexed by advice strings, the input to the
/// constructive hitting-sequence search.
#[derive(Debug, Clone)]
pub struct HittingInstance {
    /// Bit length of the candidate strings.
    pub n: u32,
    /// Advice length; the family has `2^k` members.
    pub k: u32,
    /// Density denominator: an advice string is "good" when its set holds at
    /// least `ceil(2^n / d)` strings.
    pub d: u32,
    /// Tuple length searched for.
    pub m: u32,
    /// One membership bit vector of length `2^n` per advice value.
    pub family: Vec<Bitstring>,
}

impl HittingInstance {
    pub fn validate(&self) -> Result<(), CensusError> {
        if self.n > 16 || self.k > 16 {
            return Err(CensusError::BadInstance(
                "n and k must be at most 16".into(),
            ));
        }
        if self.d == 0 || self.m == 0 {
            return Err(CensusError::BadInstance("d and m must be positive".into()));
        }
        if self.family.len() != 1 << self.k {
            return Err(CensusError::BadInstance(format!(
                "family must have 2^k = {} members, got {}",
                1u64 << self.k,
                self.family.len()
            )));
        }
        if self.family.iter().any(|f| f.len() != 1 << self.n) {
            return Err(CensusError::BadInstance(
                "every family member must cover all 2^n strings".into(),
            ));
        }
        Ok(())
    }

    /// Threshold for a set to be good: `ceil(2^n / d)`.
    pub fn good_threshold(&self) -> u64 {
        div_ceil_u64(1 << self.n, self.d as u64)
    }

    /// Indices of the good advice values.
    pub fn good_indices(&self) -> Vec<usize> {
        let thr = self.good_threshold();
        self.family
            .iter()
            .enumerate()
            .filter(|(_, f)| f.count_ones() >= thr)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Whether the counting argument already guarantees a hitting tuple exists:
/// the union bound closes exactly when `m >= d * k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HittingMargin {
    Guaranteed,
    NotGuaranteed,
}

pub fn hitting_existence_margin(k: u32, d: u32, m: u32) -> HittingMargin {
    if m as u64 >= d as u64 * k as u64 {
        HittingMargin::Guaranteed
    } else {
        HittingMargin::NotGuaranteed
    }
}

const TUPLE_BUDGET: u128 = 200_000_000;

/// Lexicographically least `m`-tuple of `n`-bit strings hitting every good
/// set, or `None` when no tuple does. Tuples are searched in lexicographic
/// tuple order with memoized dead states, which returns exactly the tuple the
/// plain first-to-last scan would.
pub fn find_hitting_sequence(
    inst: &HittingInstance,
) -> Result<Option<Vec<Bitstring>>, CensusError> {
    inst.validate()?;
    let space = (1u128 << inst.n).pow(inst.m);
    if space > TUPLE_BUDGET {
        return Err(CensusError::BudgetExceeded(format!(
            "(2^n)^m = {space} tuples exceeds the cap of {TUPLE_BUDGET}"
        )));
    }
    let good = inst.good_indices();
    let n_good = good.len();
    let words = n_good.div_ceil(64).max(1);

    // hit_mask[x] = bitset over good indices containing x.
    let n_vals = 1usize << inst.n;
    let mut hit_mask = vec![vec![0u64; words]; n_vals];
    for (gi, &fi) in good.iter().enumerate() {
        let f = &inst.family[fi];
        for (x, mask) in hit_mask.iter_mut().enumerate() {
            if f.get(x) {
                mask[gi / 64] |= 1 << (gi % 64);
            }
        }
    }
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let bits_here = n_good.saturating_sub(w * 64).min(64);
            if bits_here == 64 {
                u64::MAX
            } else {
                (1u64 << bits_here) - 1
            }
        })
        .collect();

    // Depth-first search in lexicographic order; (depth, coverage) states
    // that cannot be completed are memoized.
    let mut dead: HashSet<(u32, Vec<u64>)> = HashSet::new();
    let mut prefix: Vec<usize> = Vec::new();

    fn covered(cov: &[u64], full: &[u64]) -> bool {
        cov == full
    }

    fn dfs(
        depth: u32,
        cov: Vec<u64>,
        inst: &HittingInstance,
        hit_mask: &[Vec<u64>],
        full: &[u64],
        dead: &mut HashSet<(u32, Vec<u64>)>,
        prefix: &mut Vec<usize>,
    ) -> bool {
        if covered(&cov, full) {
            // Remaining coordinates take the least value.
            while prefix.len() < inst.m as usize {
                prefix.push(0);
            }
            return true;
        }
        if depth == inst.m {
            return false;
        }
        if dead.contains(&(depth, cov.clone())) {
            return false;
        }
        for x in 0..hit_mask.len() {
            let mut next = cov.clone();
            for (w, m) in next.iter_mut().zip(&hit_mask[x]) {
                *w |= m;
            }
            prefix.push(x);
            if dfs(depth + 1, next, inst, hit_mask, full, dead, prefix) {
                return true;
            }
            prefix.pop();
        }
        dead.insert((depth, cov));
        false
    }

    let start = vec![0u64; words];
    if covered(&start, &full) {
        // No good sets at all: the least tuple vacuously hits everything.
        return Ok(Some(vec![
            Bitstring::from_value(inst.n as usize, 0);
            inst.m as usize
        ]));
    }
    let found = dfs(0, start, inst, &hit_mask, &full, &mut dead, &mut prefix);
    if !found {
        return Ok(None);
    }
    Ok(Some(
        prefix
            .into_iter()
            .map(|x| Bitstring::from_value(inst.n as usize, x as u64))
            .collect(),
    ))
}

/// Seeded random instance with `m = d * k`, the guaranteed regime.
pub fn random_hitting_instance(n: u32, k: u32, d: u32, stream: RngStream) -> HittingInstance {
    let m = d * k;
    let n_vals = 1usize << n;
    let family = (0..(1u64 << k))
        .map(|beta| {
            let sub = stream.derive_u64(beta);
            let mut f = Bitstring::zeros(n_vals);
            for x in 0..n_vals {
                f.set(x, sub.at(x as u64) & 1 == 1);
            }
            f
        })
        .collect();
    HittingInstance { n, k, d, m, family }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kvm::{build_ktable, BuildParams, TimeBound};

    fn table(n: u32, p: u32) -> KTable {
        build_ktable(&BuildParams::new(n, p, TimeBound::new(8, 8))).unwrap()
    }

    #[test]
    fn all_literal_table_gives_all_ones_membership() {
        let t = table(4, 6);
        // Every entry of this table is |x| + 1 except the empty string.
        let set = random_set(&t, 3).unwrap();
        assert_eq!(set.count(), 8);
    }

    #[test]
    fn length_zero_set_is_always_full() {
        let t = table(2, 4);
        let set = random_set(&t, 0).unwrap();
        assert_eq!(set.membership.len(), 1);
        assert!(set.contains_value(0));
    }

    #[test]
    fn char_seq_matches_membership() {
        let t = table(5, 7);
        let cs = char_seq(&t, 5).unwrap();
        let set = random_set(&t, 5).unwrap();
        assert_eq!(cs.bits, set.membership);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let t = table(2, 4);
        assert!(matches!(
            random_set(&t, 3),
            Err(CensusError::OutOfRange { .. })
        ));
    }

    #[test]
    fn density_d_is_at_most_two() {
        let t = table(6, 8);
        let rep = density_report(&t, 0, 6).unwrap();
        assert!(rep.measured_d <= 2, "measured d = {}", rep.measured_d);
        assert_eq!(rep.rows[0].d_min, 1);
    }

    /// Counting bound: only programs with the leading opcode flag and code
    /// shorter than n - 1 bits can compress an n-bit string, so at most
    /// 2^(n-1) - 1 strings of length n are compressible.
    #[test]
    fn compressible_count_respects_the_program_bound() {
        let t = table(6, 10);
        for n in 1..=6u32 {
            let compressible = (1u64 << n) - random_set(&t, n).unwrap().count();
            assert!(
                compressible <= (1u64 << (n - 1)) - 1,
                "n = {n}: {compressible} compressible strings"
            );
        }
    }

    #[test]
    fn binary_encoding_is_minimal_msb_first() {
        assert_eq!(binary_of(0).to_string(), "0");
        assert_eq!(binary_of(1).to_string(), "1");
        assert_eq!(binary_of(6).to_string(), "110");
        assert_eq!(binary_of(12).to_string(), "1100");
    }

    #[test]
    fn complement_prefix_is_zero_when_nothing_compresses() {
        let t = table(4, 6);
        let prefix = complement_prefix(&t, 12).unwrap();
        assert_eq!(prefix, Bitstring::zeros(12));
    }

    #[test]
    fn single_bit_prefix_complexity_is_at_most_two() {
        let base = table(3, 6);
        let cond = build_ktable(
            &BuildParams::new(1, 6, TimeBound::new(8, 8)).with_condition(binary_of(1)),
        )
        .unwrap();
        let c = complement_prefix_complexity(&base, &cond, 1).unwrap();
        assert!(c <= 2, "complexity {c}");
    }

    #[test]
    fn margin_boundary() {
        assert_eq!(hitting_existence_margin(4, 2, 8), HittingMargin::Guaranteed);
        assert_eq!(
            hitting_existence_margin(4, 2, 7),
            HittingMargin::NotGuaranteed
        );
    }

    fn full_family(n: u32, k: u32) -> Vec<Bitstring> {
        let mut f = Bitstring::zeros(1 << n);
        for i in 0..1usize << n {
            f.set(i, true);
        }
        vec![f; 1 << k]
    }

    #[test]
    fn full_sets_are_hit_by_the_least_singleton() {
        let inst = HittingInstance {
            n: 2,
            k: 2,
            d: 2,
            m: 1,
            family: full_family(2, 2),
        };
        let seq = find_hitting_sequence(&inst).unwrap().unwrap();
        assert_eq!(seq, vec![Bitstring::from_value(2, 0)]);
    }

    #[test]
    fn no_good_sets_returns_the_least_tuple() {
        let inst = HittingInstance {
            n: 2,
            k: 1,
            d: 1,
            m: 3,
            family: vec![Bitstring::zeros(4), Bitstring::zeros(4)],
        };
        let seq = find_hitting_sequence(&inst).unwrap().unwrap();
        assert_eq!(seq, vec![Bitstring::from_value(2, 0); 3]);
    }

    /// Plain first-to-last odometer scan: the independent oracle.
    fn brute_force_least(inst: &HittingInstance) -> Option<Vec<u64>> {
        let good = inst.good_indices();
        let n_vals = 1u64 << inst.n;
        let m = inst.m as usize;
        let mut tuple = vec![0u64; m];
        loop {
            let hits_all = good
                .iter()
                .all(|&g| tuple.iter().any(|&x| inst.family[g].get(x as usize)));
            if hits_all {
                return Some(tuple);
            }
            // Increment the odometer from the least significant coordinate.
            let mut i = m;
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < n_vals {
                    break;
                }
                tuple[i] = 0;
            }
        }
    }

    #[test]
    fn search_matches_brute_force_on_explicit_family() {
        let stream = RngStream::new(11, "hitting-test");
        let mut inst = random_hitting_instance(2, 2, 2, stream);
        inst.m = 3;
        let got = find_hitting_sequence(&inst)
            .unwrap()
            .map(|seq| seq.iter().map(|s| s.value_u64()).collect::<Vec<_>>());
        assert_eq!(got, brute_force_least(&inst));
    }

    #[test]
    fn guaranteed_regime_never_returns_none() {
        for seed in 0..20 {
            let inst = random_hitting_instance(2, 3, 2, RngStream::new(seed, "hitting-regime"));
            assert_eq!(
                hitting_existence_margin(inst.k, inst.d, inst.m),
                HittingMargin::Guaranteed
            );
            let seq = find_hitting_sequence(&inst).unwrap();
            let seq = seq.expect("guaranteed regime produced no tuple");
            for &g in &inst.good_indices() {
                assert!(
                    seq.iter()
                        .any(|x| inst.family[g].get(x.value_u64() as usize)),
                    "good set {g} not hit"
                );
            }
        }
    }
}
