//! The non-adaptive reduction harness: building the advice string from
//! census membership bits and replacing a bounded-error algorithm's
//! randomness by majority vote over every generator seed.

pub mod pit;

use rayon::prelude::*;
use thiserror::Error;

use crate::bits::Bitstring;
use crate::census::{char_seq, CensusError};
use crate::kvm::KTable;
use crate::nwprg::{NwError, NwGenerator, DEFAULT_SEED_CAP};

pub use pit::{parse_instances, PitError, PitInstance};

#[derive(Debug, Error)]
pub enum DerandError {
    #[error("n must be at least 2 and d at least 1")]
    BadParams,
    #[error("n^d overflows the supported range")]
    Overflow,
    #[error("query length {need} exceeds the table range {max}")]
    TableRange { need: u32, max: u32 },
    #[error("generator output length {m} is shorter than the {need} random bits required")]
    OutputTooShort { m: usize, need: usize },
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Nw(#[from] NwError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// A two-sided bounded-error randomized decision procedure: `eval` must be
/// deterministic in `(input, randomness)` and consume exactly `rand_len`
/// bits.
pub trait RandomizedAlgorithm {
    type Input;

    fn name(&self) -> &str;
    fn rand_len(&self, input: &Self::Input) -> usize;
    fn eval(&self, input: &Self::Input, randomness: &Bitstring) -> Decision;
}

/// The Schwartz-Zippel identity test as a [`RandomizedAlgorithm`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SchwartzZippel;

impl RandomizedAlgorithm for SchwartzZippel {
    type Input = PitInstance;

    fn name(&self) -> &str {
        "schwartz-zippel"
    }

    fn rand_len(&self, input: &PitInstance) -> usize {
        input.rand_len()
    }

    fn eval(&self, input: &PitInstance, randomness: &Bitstring) -> Decision {
        if input.eval_trial(randomness) {
            Decision::Accept
        } else {
            Decision::Reject
        }
    }
}

/// Floor of log2(n^d).
fn query_bits(n: u64, d: u32) -> Result<u32, DerandError> {
    if n < 2 || d < 1 {
        return Err(DerandError::BadParams);
    }
    let target = (n as u128).checked_pow(d).ok_or(DerandError::Overflow)?;
    if target > u64::MAX as u128 {
        return Err(DerandError::Overflow);
    }
    Ok((target as u64).ilog2())
}

/// The full non-adaptive query set: every string of length `floor(log2 n^d)`
/// in value order. The set depends only on `(n, d)`; it is produced before
/// any membership lookup.
pub fn tt_reduce_queries(n: u64, d: u32) -> Result<Vec<Bitstring>, DerandError> {
    let q = query_bits(n, d)?;
    Ok((0..(1u64 << q))
        .map(|v| Bitstring::from_value(q as usize, v))
        .collect())
}

/// Advice of length `n^d`: query answers first, zero padding after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alpha {
    pub target_len: u64,
    pub bits: Bitstring,
}

/// Answer the non-adaptive query set against the table-derived membership
/// bits, then pad with zeros to length `n^d`.
pub fn build_alpha(table: &KTable, n: u64, d: u32) -> Result<Alpha, DerandError> {
    let q = query_bits(n, d)?;
    if q > table.max_len {
        return Err(DerandError::TableRange {
            need: q,
            max: table.max_len,
        });
    }
    let queries = tt_reduce_queries(n, d)?;
    let membership = char_seq(table, q)?;
    let target_len = (n as u128).pow(d) as u64;
    let mut bits = Bitstring::zeros(target_len as usize);
    for (i, query) in queries.iter().enumerate() {
        bits.set(i, membership.bits.get(query.value_u64() as usize));
    }
    Ok(Alpha { target_len, bits })
}

/// Evaluate the algorithm on the generator output of every seed and return
/// the majority decision; ties reject. The vote is a commutative count, so
/// the result is independent of evaluation order and parallelism.
pub fn derandomize<A>(alg: &A, input: &A::Input, g: &NwGenerator) -> Result<Decision, DerandError>
where
    A: RandomizedAlgorithm + Sync,
    A::Input: Sync,
{
    derandomize_with_cap(alg, input, g, DEFAULT_SEED_CAP)
}

pub fn derandomize_with_cap<A>(
    alg: &A,
    input: &A::Input,
    g: &NwGenerator,
    cap: u32,
) -> Result<Decision, DerandError>
where
    A: RandomizedAlgorithm + Sync,
    A::Input: Sync,
{
    let need = alg.rand_len(input);
    if g.output_len() < need {
        return Err(DerandError::OutputTooShort {
            m: g.output_len(),
            need,
        });
    }
    let l = g.seed_len() as u32;
    if l > cap {
        return Err(NwError::CapExceeded(l, cap).into());
    }
    let total = 1u64 << l;
    let accepts: u64 = (0..total)
        .into_par_iter()
        .map(|s| {
            let seed = Bitstring::from_value(l as usize, s);
            let out = g.output(&seed).expect("seed length matches");
            let randomness = out.slice(0, need);
            (alg.eval(input, &randomness) == Decision::Accept) as u64
        })
        .sum();
    if accepts * 2 > total {
        Ok(Decision::Accept)
    } else {
        Ok(Decision::Reject)
    }
}
