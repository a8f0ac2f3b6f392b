//! Advice-replacement simulations: good-advice sets, adversarial pruning,
//! bounded sampling, and lazy materialization of very long advice strings.
//!
//! A scenario fixes a target truth table `A` over n-bit inputs, an evaluator
//! `M(x, r)` reading an L-bit advice string, and a density exponent `cd`
//! promising that the set `G` of advice strings on which `M` computes `A`
//! everywhere holds at least a `1/n^cd` fraction of the advice space. The
//! operations here replace trusted advice by pruning pairs plus uniformly
//! sampled advice, with exact rational success probabilities.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bitstring;
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum AdviceError {
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error("density promise violated: {0}")]
    DensityViolated(String),
    #[error("exhaustive regime exceeded: {0}")]
    RegimeExceeded(String),
    #[error("advice index {idx} was not declared for this decision")]
    UndeclaredIndex { idx: u64 },
    #[error("advice index {idx} is out of range (nominal length {len})")]
    IndexOutOfRange { idx: u64, len: u128 },
}

/// Largest advice length for which sets over the advice space are
/// enumerated explicitly.
pub const EXHAUSTIVE_ADVICE_BITS: u64 = 24;

/// Named built-in evaluators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum Evaluator {
    /// `M(x, r) = A(x)`: the advice is ignored.
    #[serde(rename = "ignore-advice")]
    IgnoreAdvice,
    /// `M(x, r) = A(x)` when the first `key_len` advice bits are all zero,
    /// `!A(x)` otherwise.
    #[serde(rename = "prefix-key")]
    PrefixKey { key_len: u64 },
    /// The first `2^n` advice bits are read as a claimed truth table:
    /// `M(x, r) = r[value(x)]`.
    #[serde(rename = "table-decode")]
    TableDecode,
}

/// A source of advice bits; eager strings and lazily materialized strings
/// both implement it.
pub trait AdviceSource {
    fn bit(&mut self, idx: u64) -> Result<bool, AdviceError>;
}

/// A fully materialized advice string.
pub struct EagerAdvice<'a>(pub &'a Bitstring);

impl AdviceSource for EagerAdvice<'_> {
    fn bit(&mut self, idx: u64) -> Result<bool, AdviceError> {
        if idx >= self.0.len() as u64 {
            return Err(AdviceError::IndexOutOfRange {
                idx,
                len: self.0.len() as u128,
            });
        }
        Ok(self.0.get(idx as usize))
    }
}

/// Advice materialized one index at a time from an addressable stream.
/// Each index is sampled at most once; re-reads return the memoized bit.
/// Reads outside the declared set are contract violations.
#[derive(Debug, Clone)]
pub struct LazyAdvice {
    nominal_len: u128,
    stream: RngStream,
    sample: u64,
    declared: Option<BTreeSet<u64>>,
    materialized: BTreeMap<u64, bool>,
}

impl LazyAdvice {
    pub fn new(nominal_len: u128, stream: RngStream, sample: u64) -> Self {
        LazyAdvice {
            nominal_len,
            stream,
            sample,
            declared: None,
            materialized: BTreeMap::new(),
        }
    }

    pub fn with_declared(mut self, declared: BTreeSet<u64>) -> Self {
        self.declared = Some(declared);
        self
    }

    pub fn materialized_count(&self) -> u64 {
        self.materialized.len() as u64
    }
}

impl AdviceSource for LazyAdvice {
    fn bit(&mut self, idx: u64) -> Result<bool, AdviceError> {
        if (idx as u128) >= self.nominal_len {
            return Err(AdviceError::IndexOutOfRange {
                idx,
                len: self.nominal_len,
            });
        }
        if let Some(declared) = &self.declared {
            if !declared.contains(&idx) {
                return Err(AdviceError::UndeclaredIndex { idx });
            }
        }
        if let Some(&b) = self.materialized.get(&idx) {
            return Ok(b);
        }
        let b = advice_bit(&self.stream, self.sample, idx);
        self.materialized.insert(idx, b);
        Ok(b)
    }
}

/// Bit `idx` of the `sample`-th advice string drawn from `stream`. Eager and
/// lazy draws both go through this, which is what makes them agree
/// bit-for-bit.
#[inline]
pub fn advice_bit(stream: &RngStream, sample: u64, idx: u64) -> bool {
    stream.derive_u64(sample).at(idx) & 1 == 1
}

/// Materialize the full `len`-bit advice string for one sample.
pub fn draw_advice(stream: &RngStream, sample: u64, len: u64) -> Bitstring {
    let sub = stream.derive_u64(sample);
    let mut s = Bitstring::zeros(len as usize);
    for i in 0..len {
        s.set(i as usize, sub.at(i) & 1 == 1);
    }
    s
}

/// A target table, an advice evaluator, and a verified density promise.
#[derive(Debug, Clone)]
pub struct AdviceScenario {
    n: u32,
    advice_len: u64,
    cd: u32,
    truth: Bitstring,
    evaluator: Evaluator,
}

impl AdviceScenario {
    /// Build and validate a scenario. When the advice space is small enough
    /// the good set is enumerated outright and the density promise
    /// `|G| >= 2^L / n^cd` is checked exactly; nonempty `G` is always
    /// required.
    pub fn new(
        n: u32,
        advice_len: u64,
        cd: u32,
        truth: Bitstring,
        evaluator: Evaluator,
    ) -> Result<Self, AdviceError> {
        if n > 28 {
            return Err(AdviceError::BadScenario(format!("n = {n} too large")));
        }
        if truth.len() != 1usize << n {
            return Err(AdviceError::BadScenario(format!(
                "truth table must have 2^{n} bits, got {}",
                truth.len()
            )));
        }
        match evaluator {
            Evaluator::PrefixKey { key_len } if key_len > advice_len => {
                return Err(AdviceError::BadScenario(
                    "prefix key longer than the advice".into(),
                ));
            }
            Evaluator::TableDecode if (1u128 << n) > advice_len as u128 => {
                return Err(AdviceError::BadScenario(format!(
                    "table-decode needs advice length at least 2^{n}"
                )));
            }
            _ => {}
        }
        let s = AdviceScenario {
            n,
            advice_len,
            cd,
            truth,
            evaluator,
        };
        // |G| * n^cd >= 2^L and G nonempty, in exact integer arithmetic.
        let denom = BigInt::from(s.n.max(1)).pow(s.cd);
        let holds = if s.advice_len <= EXHAUSTIVE_ADVICE_BITS && s.enumeration_cost() <= 1u128 << 28
        {
            let good = good_set(&s)?.count_ones();
            debug_assert_eq!(good as u128, s.good_count_structural());
            good > 0 && BigInt::from(good) * &denom >= BigInt::one() << s.advice_len
        } else {
            // |G| = 2^(L - deficit) for the built-in evaluators, so the
            // promise reduces to n^cd >= 2^deficit.
            s.good_deficit_bits()
                .is_some_and(|k| denom >= BigInt::one() << k)
        };
        if !holds {
            return Err(AdviceError::DensityViolated(format!(
                "|G| falls below 2^{} / {}^{}",
                s.advice_len, s.n, s.cd
            )));
        }
        Ok(s)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn advice_len(&self) -> u64 {
        self.advice_len
    }

    pub fn cd(&self) -> u32 {
        self.cd
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn truth(&self, x: u64) -> bool {
        self.truth.get(x as usize)
    }

    pub fn truth_table(&self) -> &Bitstring {
        &self.truth
    }

    /// `n^cd`, the denominator of the density promise.
    pub fn promise_denominator(&self) -> u128 {
        (self.n.max(1) as u128).saturating_pow(self.cd)
    }

    /// Sampling budget `2 * n^cd` shared by every decision loop.
    pub fn sample_budget(&self) -> Result<u64, AdviceError> {
        let b = 2u128 * self.promise_denominator();
        u64::try_from(b)
            .ok()
            .filter(|&b| b <= 1 << 32)
            .ok_or_else(|| AdviceError::RegimeExceeded(format!("sampling budget {b} too large")))
    }

    /// Evaluate `M(x, source)`.
    pub fn eval(&self, x: u64, source: &mut dyn AdviceSource) -> Result<bool, AdviceError> {
        debug_assert!(x < (1u64 << self.n));
        match self.evaluator {
            Evaluator::IgnoreAdvice => Ok(self.truth(x)),
            Evaluator::PrefixKey { key_len } => {
                let mut zero = true;
                for i in 0..key_len {
                    if source.bit(i)? {
                        zero = false;
                    }
                }
                Ok(if zero { self.truth(x) } else { !self.truth(x) })
            }
            Evaluator::TableDecode => source.bit(x),
        }
    }

    /// Evaluate against a fully materialized advice string.
    pub fn eval_eager(&self, x: u64, advice: &Bitstring) -> bool {
        self.eval(x, &mut EagerAdvice(advice))
            .expect("eager advice covers the whole string")
    }

    /// Advice indices `M` reads on input `x`.
    pub fn reads(&self, x: u64) -> Vec<u64> {
        match self.evaluator {
            Evaluator::IgnoreAdvice => Vec::new(),
            Evaluator::PrefixKey { key_len } => (0..key_len).collect(),
            Evaluator::TableDecode => vec![x],
        }
    }

    fn enumeration_cost(&self) -> u128 {
        (1u128 << self.advice_len.min(127)) << self.n.min(64)
    }

    /// Exact size of the good set, computed per evaluator. Saturates at
    /// u128; prefer [`good_deficit_bits`](Self::good_deficit_bits) for
    /// conceptually long advice.
    pub fn good_count_structural(&self) -> u128 {
        match self.good_deficit_bits() {
            Some(k) => 1u128 << (self.advice_len - k).min(127),
            None => 0,
        }
    }

    /// `L - log2 |G|` per evaluator: the good set always has size exactly
    /// `2^(L - deficit)`, or is empty (`None`).
    pub fn good_deficit_bits(&self) -> Option<u64> {
        match self.evaluator {
            Evaluator::IgnoreAdvice => Some(0),
            Evaluator::PrefixKey { key_len } => Some(key_len),
            Evaluator::TableDecode => {
                let table_bits = 1u64 << self.n;
                (self.advice_len >= table_bits).then_some(table_bits)
            }
        }
    }
}

/// Exact enumeration of the good set as a membership mask over all `2^L`
/// advice strings. Only available in the exhaustive regime.
pub fn good_set(s: &AdviceScenario) -> Result<Bitstring, AdviceError> {
    if s.advice_len > EXHAUSTIVE_ADVICE_BITS {
        return Err(AdviceError::RegimeExceeded(format!(
            "advice length {} exceeds {EXHAUSTIVE_ADVICE_BITS}",
            s.advice_len
        )));
    }
    if s.enumeration_cost() > 1u128 << 30 {
        return Err(AdviceError::RegimeExceeded(
            "2^(L+n) enumeration too large".into(),
        ));
    }
    let total = 1u64 << s.advice_len;
    let mut mask = Bitstring::zeros(total as usize);
    for r in 0..total {
        let advice = Bitstring::from_value(s.advice_len as usize, r);
        let good = (0..(1u64 << s.n)).all(|x| s.eval_eager(x, &advice) == s.truth(x));
        mask.set(r as usize, good);
    }
    Ok(mask)
}

/// Input/label pairs recorded by the pruning loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdvicePair {
    pub x: u64,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AdvicePairs(pub Vec<AdvicePair>);

impl AdvicePairs {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Advice bits needed to transmit the pairs: n + 1 bits each.
    pub fn advice_bits(&self, n: u32) -> u64 {
        self.0.len() as u64 * (n as u64 + 1)
    }
}

/// Iteration-by-iteration record of the pruning loop.
#[derive(Debug, Clone)]
pub struct PruneTrace {
    /// `|B_0|, |B_1|, ...` including the final surviving size.
    pub bad_sizes: Vec<u64>,
    /// True when the loop stopped because no input crossed the 1/6 filter.
    pub early_exit: bool,
    pub iteration_cap: u64,
}

/// Iteration cap `ceil(2 * cd * log_{6/5} n)`.
pub fn prune_iteration_cap(n: u32, cd: u32) -> u64 {
    if n <= 1 {
        return 0;
    }
    let log = (n as f64).ln() / (6f64 / 5f64).ln();
    (2.0 * cd as f64 * log).ceil() as u64
}

/// The adversarial pruning loop: while some input `x` disagrees with the
/// target on at least 1/6 of the surviving bad advice strings, record the
/// lexicographically least such `x` with its label and drop the disagreeing
/// strings. Runs in the exhaustive regime.
pub fn prune_advice(s: &AdviceScenario) -> Result<AdvicePairs, AdviceError> {
    prune_advice_trace(s).map(|(pairs, _)| pairs)
}

pub fn prune_advice_trace(s: &AdviceScenario) -> Result<(AdvicePairs, PruneTrace), AdviceError> {
    let good = good_set(s)?;
    let total = 1u64 << s.advice_len;
    // B_0: everything outside the good set.
    let mut bad: Vec<u64> = (0..total).filter(|&r| !good.get(r as usize)).collect();
    let cap = prune_iteration_cap(s.n, s.cd);
    let mut pairs = Vec::new();
    let mut trace = PruneTrace {
        bad_sizes: vec![bad.len() as u64],
        early_exit: false,
        iteration_cap: cap,
    };

    let wrong_on = |x: u64, r: u64| {
        let advice = Bitstring::from_value(s.advice_len as usize, r);
        s.eval_eager(x, &advice) != s.truth(x)
    };

    for _ in 0..cap {
        if bad.is_empty() {
            trace.early_exit = true;
            break;
        }
        let mut fired = false;
        for x in 0..(1u64 << s.n) {
            let wrong = bad.iter().filter(|&&r| wrong_on(x, r)).count() as u64;
            // "at least 1/6" with exact integers: 6 * wrong >= |B|.
            if wrong > 0 && 6 * wrong >= bad.len() as u64 {
                pairs.push(AdvicePair {
                    x,
                    label: s.truth(x),
                });
                bad.retain(|&r| !wrong_on(x, r));
                trace.bad_sizes.push(bad.len() as u64);
                fired = true;
                break;
            }
        }
        if !fired {
            trace.early_exit = true;
            break;
        }
    }
    if bad.is_empty() {
        trace.early_exit = true;
    }
    Ok((AdvicePairs(pairs), trace))
}

fn consistent_with_pairs(s: &AdviceScenario, pairs: &AdvicePairs, advice: &Bitstring) -> bool {
    pairs.0.iter().all(|p| s.eval_eager(p.x, advice) == p.label)
}

/// Sample up to `2 n^cd` advice strings; the first one consistent with the
/// pairs decides via `M(x, r)`; if none is found the output is 0.
pub fn sample_and_decide(
    s: &AdviceScenario,
    pairs: &AdvicePairs,
    x: u64,
    stream: RngStream,
) -> Result<bool, AdviceError> {
    if s.advice_len > EXHAUSTIVE_ADVICE_BITS {
        return Err(AdviceError::RegimeExceeded(
            "eager sampling requires a materializable advice length; use lazy_advice_decide".into(),
        ));
    }
    let budget = s.sample_budget()?;
    for j in 0..budget {
        let advice = draw_advice(&stream, j, s.advice_len);
        if consistent_with_pairs(s, pairs, &advice) {
            return Ok(s.eval_eager(x, &advice));
        }
    }
    Ok(false)
}

/// Exact probability that [`sample_and_decide`] outputs the target value
/// `A(x)`, in rational arithmetic: with `t = 2^L` advice strings, `c` of
/// them consistent with the pairs and `w` of those also correct on `x`, the
/// first consistent draw among `T` tries is correct with probability
/// `(w/c) * (1 - ((t-c)/t)^T)`, plus `((t-c)/t)^T` when the fallback output
/// 0 happens to equal `A(x)`.
pub fn success_probability_exact(
    s: &AdviceScenario,
    pairs: &AdvicePairs,
    x: u64,
) -> Result<BigRational, AdviceError> {
    if s.advice_len > EXHAUSTIVE_ADVICE_BITS {
        return Err(AdviceError::RegimeExceeded(format!(
            "advice length {} exceeds {EXHAUSTIVE_ADVICE_BITS}",
            s.advice_len
        )));
    }
    let budget = s.sample_budget()?;
    let budget32 = u32::try_from(budget)
        .map_err(|_| AdviceError::RegimeExceeded("budget exponent too large".into()))?;
    if budget as u128 * s.advice_len as u128 > 1 << 26 {
        return Err(AdviceError::RegimeExceeded(
            "exact power too large to expand".into(),
        ));
    }

    let total = 1u64 << s.advice_len;
    let mut consistent = 0u64;
    let mut correct = 0u64;
    for r in 0..total {
        let advice = Bitstring::from_value(s.advice_len as usize, r);
        if consistent_with_pairs(s, pairs, &advice) {
            consistent += 1;
            if s.eval_eager(x, &advice) == s.truth(x) {
                correct += 1;
            }
        }
    }

    let target_is_zero = !s.truth(x);
    if consistent == 0 {
        return Ok(if target_is_zero {
            BigRational::one()
        } else {
            BigRational::zero()
        });
    }
    let t = BigInt::from(total);
    let c = BigInt::from(consistent);
    let w = BigInt::from(correct);
    let miss = BigRational::new((&t - &c).pow(budget32), t.pow(budget32));
    let hit_correct = BigRational::new(w, c) * (BigRational::one() - miss.clone());
    Ok(if target_is_zero {
        hit_correct + miss
    } else {
        hit_correct
    })
}

/// Decision plus materialization accounting from a lazy run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LazyDecision {
    pub decision: bool,
    pub samples_used: u64,
    pub bits_materialized: u64,
}

/// [`sample_and_decide`] over lazily materialized advice: each sampled
/// string materializes only the indices `M` declares for the pairs and for
/// `x`, with per-sample memoization. Identical streams give decisions
/// identical to the eager run.
pub fn lazy_advice_decide(
    s: &AdviceScenario,
    pairs: &AdvicePairs,
    x: u64,
    stream: RngStream,
) -> Result<LazyDecision, AdviceError> {
    let budget = s.sample_budget()?;
    let mut declared: BTreeSet<u64> = s.reads(x).into_iter().collect();
    for p in &pairs.0 {
        declared.extend(s.reads(p.x));
    }
    let mut bits_materialized = 0u64;
    for j in 0..budget {
        let mut advice =
            LazyAdvice::new(s.advice_len as u128, stream, j).with_declared(declared.clone());
        let mut consistent = true;
        for p in &pairs.0 {
            if s.eval(p.x, &mut advice)? != p.label {
                consistent = false;
                break;
            }
        }
        if consistent {
            let decision = s.eval(x, &mut advice)?;
            bits_materialized += advice.materialized_count();
            return Ok(LazyDecision {
                decision,
                samples_used: j + 1,
                bits_materialized,
            });
        }
        bits_materialized += advice.materialized_count();
    }
    Ok(LazyDecision {
        decision: false,
        samples_used: budget,
        bits_materialized,
    })
}

/// Serialized scenario file: the truth table is hex of the bits packed
/// LSB-first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub n: u32,
    pub advice_len: u64,
    pub cd: u32,
    pub truth_table: String,
    pub evaluator: Evaluator,
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<AdviceScenario, AdviceError> {
        let bytes = hex_decode(&self.truth_table)
            .ok_or_else(|| AdviceError::BadScenario("bad truth_table hex".into()))?;
        let bits = Bitstring::from_lsb_bytes(1 << self.n, &bytes)
            .ok_or_else(|| AdviceError::BadScenario("truth_table length mismatch".into()))?;
        AdviceScenario::new(
            self.n,
            self.advice_len,
            self.cd,
            bits,
            self.evaluator.clone(),
        )
    }

    pub fn from_scenario(s: &AdviceScenario) -> Self {
        ScenarioFile {
            n: s.n,
            advice_len: s.advice_len,
            cd: s.cd,
            truth_table: hex_encode(&s.truth.pack_lsb_bytes()),
            evaluator: s.evaluator.clone(),
        }
    }
}

fn hex_encode(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn hex_decode(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len() / 2)
        .map(|i| u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok())
        .collect()
}

/// One row of the exact-vs-sampled report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdviceReportRow {
    pub x: String,
    pub exact_prob: String,
    pub mc_prob: f64,
    pub trials: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    fn table_decode_2x8() -> AdviceScenario {
        // n = 2, L = 8, cd = 4: |G| = 2^(8-4) = 16 = 2^8 / 2^4.
        AdviceScenario::new(2, 8, 4, bs("0110"), Evaluator::TableDecode).unwrap()
    }

    #[test]
    fn good_set_sizes_per_evaluator() {
        let all = AdviceScenario::new(2, 6, 1, bs("0110"), Evaluator::IgnoreAdvice).unwrap();
        assert_eq!(good_set(&all).unwrap().count_ones(), 64);

        let half =
            AdviceScenario::new(2, 6, 2, bs("0110"), Evaluator::PrefixKey { key_len: 1 }).unwrap();
        assert_eq!(good_set(&half).unwrap().count_ones(), 32);

        let table = table_decode_2x8();
        assert_eq!(good_set(&table).unwrap().count_ones(), 16);
        assert_eq!(table.good_count_structural(), 16);
    }

    #[test]
    fn density_promise_is_checked() {
        // table-decode at n = 2 needs n^cd >= 2^(2^n) = 16, so cd = 3 fails.
        let err = AdviceScenario::new(2, 8, 3, bs("0110"), Evaluator::TableDecode);
        assert!(matches!(err, Err(AdviceError::DensityViolated { .. })));
    }

    #[test]
    fn structural_counts_match_enumeration() {
        for (cd, ev) in [
            (1, Evaluator::IgnoreAdvice),
            (2, Evaluator::PrefixKey { key_len: 2 }),
            (4, Evaluator::TableDecode),
        ] {
            let s = AdviceScenario::new(2, 8, cd, bs("1001"), ev).unwrap();
            assert_eq!(
                good_set(&s).unwrap().count_ones() as u128,
                s.good_count_structural()
            );
        }
    }

    #[test]
    fn pruning_with_empty_bad_set_records_nothing() {
        let s = AdviceScenario::new(2, 6, 1, bs("0110"), Evaluator::IgnoreAdvice).unwrap();
        let (pairs, trace) = prune_advice_trace(&s).unwrap();
        assert!(pairs.is_empty());
        assert!(trace.early_exit);
        assert_eq!(trace.bad_sizes, vec![0]);
    }

    #[test]
    fn prefix_key_prunes_in_one_iteration() {
        // Every bad string is wrong on every input, so the least input fires
        // once and empties the bad set.
        let s =
            AdviceScenario::new(2, 6, 2, bs("0110"), Evaluator::PrefixKey { key_len: 1 }).unwrap();
        let (pairs, trace) = prune_advice_trace(&s).unwrap();
        assert_eq!(pairs, AdvicePairs(vec![AdvicePair { x: 0, label: false }]));
        assert_eq!(trace.bad_sizes, vec![32, 0]);
        assert!(trace.early_exit);
    }

    #[test]
    fn table_decode_pruning_trace_is_exact() {
        let s = table_decode_2x8();
        let (pairs, trace) = prune_advice_trace(&s).unwrap();
        // Each fired input keeps only the survivors that agree there:
        // 240 -> 112 -> 48 -> 16 -> 0.
        assert_eq!(trace.bad_sizes, vec![240, 112, 48, 16, 0]);
        assert_eq!(pairs.len(), 4);
        assert!(trace.early_exit);
        // Shrink factor at most 5/6 per firing iteration, exactly.
        for w in trace.bad_sizes.windows(2) {
            assert!(6 * w[1] <= 5 * w[0], "shrinkage violated: {w:?}");
        }
        // Labels match the target.
        for p in &pairs.0 {
            assert_eq!(p.label, s.truth(p.x));
        }
        // Pair inputs are distinct.
        let mut xs: Vec<u64> = pairs.0.iter().map(|p| p.x).collect();
        xs.dedup();
        assert_eq!(xs.len(), pairs.len());
    }

    #[test]
    fn iteration_count_respects_the_cap() {
        let s = table_decode_2x8();
        let (pairs, trace) = prune_advice_trace(&s).unwrap();
        assert!((pairs.len() as u64) <= trace.iteration_cap);
        assert_eq!(trace.iteration_cap, prune_iteration_cap(2, 4));
        // ceil(2 * 4 * log_{6/5} 2) = ceil(30.41...) = 31.
        assert_eq!(trace.iteration_cap, 31);
        // Late-termination bound, implied by the per-iteration shrinkage:
        // 6^i * |B_i| <= 5^i * |B_0|.
        let b0 = trace.bad_sizes[0] as u128;
        for (i, &b) in trace.bad_sizes.iter().enumerate() {
            assert!(6u128.pow(i as u32) * b as u128 <= 5u128.pow(i as u32) * b0);
        }
    }

    #[test]
    fn sampling_with_no_pairs_and_ignoring_advice_answers_immediately() {
        let s = AdviceScenario::new(2, 6, 1, bs("0110"), Evaluator::IgnoreAdvice).unwrap();
        let stream = RngStream::new(3, "advice-test");
        for x in 0..4 {
            assert_eq!(
                sample_and_decide(&s, &AdvicePairs::default(), x, stream).unwrap(),
                s.truth(x)
            );
        }
    }

    #[test]
    fn impossible_pairs_fall_back_to_zero() {
        let s = table_decode_2x8();
        // Contradictory pairs: no advice answers 1 and 0 on the same input.
        let pairs = AdvicePairs(vec![
            AdvicePair { x: 0, label: false },
            AdvicePair { x: 0, label: true },
        ]);
        let stream = RngStream::new(9, "advice-test");
        assert!(!sample_and_decide(&s, &pairs, 1, stream).unwrap());
        let p = success_probability_exact(&s, &pairs, 1).unwrap();
        // Target bit at x=1 is 1; the fallback 0 never matches it.
        assert_eq!(p, BigRational::zero());
    }

    #[test]
    fn exact_probability_is_one_when_all_advice_is_good() {
        let s = AdviceScenario::new(2, 6, 1, bs("0110"), Evaluator::IgnoreAdvice).unwrap();
        for x in 0..4 {
            let p = success_probability_exact(&s, &AdvicePairs::default(), x).unwrap();
            assert_eq!(p, BigRational::one());
        }
    }

    #[test]
    fn exact_probability_after_pruning_clears_two_thirds() {
        let s = table_decode_2x8();
        let pairs = prune_advice(&s).unwrap();
        let threshold = BigRational::new(BigInt::from(2), BigInt::from(3));
        for x in 0..4 {
            let p = success_probability_exact(&s, &pairs, x).unwrap();
            assert!(p >= threshold, "x = {x}: p = {p}");
        }
    }

    #[test]
    fn exact_matches_monte_carlo() {
        let s = table_decode_2x8();
        let pairs = prune_advice(&s).unwrap();
        let trials = 20_000u64;
        for x in 0..4 {
            let exact = success_probability_exact(&s, &pairs, x)
                .unwrap()
                .to_f64()
                .unwrap();
            let master = RngStream::new(42, "advice-mc");
            let mut hits = 0u64;
            for trial in 0..trials {
                let stream = master.derive_u64(8 * trial + x);
                if sample_and_decide(&s, &pairs, x, stream).unwrap() == s.truth(x) {
                    hits += 1;
                }
            }
            let mc = hits as f64 / trials as f64;
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            assert!(
                (mc - exact).abs() <= 3.0 * sigma.max(1e-4),
                "x = {x}: exact {exact}, mc {mc}"
            );
        }
    }

    #[test]
    fn sampling_miss_bound_holds_for_all_small_denominators() {
        // (1 - 1/N)^(2N) < 1/6 for every integer N >= 2; spot-check the
        // exact rational form for small N before the acceptance suite sweeps
        // the full range in floating point.
        for n in 2u32..50 {
            let num = BigInt::from(n - 1).pow(2 * n);
            let den = BigInt::from(n).pow(2 * n);
            let miss = BigRational::new(num, den);
            assert!(
                miss < BigRational::new(BigInt::from(1), BigInt::from(6)),
                "N = {n}"
            );
        }
    }

    #[test]
    fn lazy_reads_one_bit_per_sample_for_table_decode() {
        let s = table_decode_2x8();
        let stream = RngStream::new(5, "lazy-test");
        let d = lazy_advice_decide(&s, &AdvicePairs::default(), 2, stream).unwrap();
        // No pairs: the first sample is consistent and reads exactly index 2.
        assert_eq!(d.samples_used, 1);
        assert_eq!(d.bits_materialized, 1);
    }

    #[test]
    fn lazy_matches_eager_on_identical_streams() {
        let s = table_decode_2x8();
        let pairs = prune_advice(&s).unwrap();
        for seed in 0..100 {
            let stream = RngStream::new(seed, "lazy-eq");
            for x in 0..4 {
                let eager = sample_and_decide(&s, &pairs, x, stream).unwrap();
                let lazy = lazy_advice_decide(&s, &pairs, x, stream).unwrap();
                assert_eq!(lazy.decision, eager, "seed {seed}, x {x}");
            }
        }
    }

    #[test]
    fn lazy_handles_conceptually_huge_advice() {
        // 2^16 nominal bits; only the read indices materialize.
        let s = AdviceScenario::new(
            2,
            1 << 16,
            4,
            bs("0110"),
            Evaluator::PrefixKey { key_len: 2 },
        )
        .unwrap();
        let stream = RngStream::new(17, "lazy-huge");
        let d = lazy_advice_decide(&s, &AdvicePairs::default(), 1, stream).unwrap();
        // Reads at most key_len = 2 indices per sample.
        assert!(d.bits_materialized <= 2 * d.samples_used);
    }

    #[test]
    fn undeclared_reads_are_contract_violations() {
        let stream = RngStream::new(1, "lazy-contract");
        let mut advice =
            LazyAdvice::new(1 << 20, stream, 0).with_declared([3u64, 7].into_iter().collect());
        assert!(advice.bit(3).is_ok());
        assert!(matches!(
            advice.bit(5),
            Err(AdviceError::UndeclaredIndex { idx: 5 })
        ));
    }

    #[test]
    fn memoized_rereads_are_consistent() {
        let stream = RngStream::new(2, "lazy-memo");
        let mut advice = LazyAdvice::new(1 << 20, stream, 7);
        let first = advice.bit(12345).unwrap();
        assert_eq!(advice.bit(12345).unwrap(), first);
        assert_eq!(advice.materialized_count(), 1);
        assert_eq!(first, advice_bit(&stream, 7, 12345));
    }

    #[test]
    fn scenario_file_roundtrip() {
        let s = table_decode_2x8();
        let file = ScenarioFile::from_scenario(&s);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: ScenarioFile = serde_json::from_str(&json).unwrap();
        let back = parsed.to_scenario().unwrap();
        assert_eq!(back.truth_table(), s.truth_table());
        assert_eq!(back.evaluator(), s.evaluator());
        assert_eq!(back.advice_len(), s.advice_len());
    }
}
