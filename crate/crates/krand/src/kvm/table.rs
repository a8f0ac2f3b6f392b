//! Exact minimal-description-length tables by exhaustive program enumeration.

use rayon::prelude::*;
use thiserror::Error;

use super::machine::{run_program, VmOutcome, MACHINE_VERSION};
use crate::bits::Bitstring;

/// Affine step budget `t(n) = a*n + b`, applied to the output length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeBound {
    /// Steps per output bit.
    pub a: u32,
    /// Constant steps.
    pub b: u32,
}

impl TimeBound {
    pub fn new(a: u32, b: u32) -> Self {
        TimeBound { a, b }
    }

    pub fn eval(&self, n: usize) -> u64 {
        self.a as u64 * n as u64 + self.b as u64
    }

    /// `t(n) >= n + 1` must hold for every n up to `max_len`, so the literal
    /// branch always fits its budget. The bound is affine, so checking the
    /// endpoints suffices.
    pub fn admits_literals(&self, max_len: u32) -> bool {
        self.eval(0) >= 1 && self.eval(max_len as usize) > max_len as u64
    }

    /// Pointwise comparison over `0..=max_len`.
    pub fn dominates(&self, other: &TimeBound, max_len: u32) -> bool {
        self.eval(0) >= other.eval(0) && self.eval(max_len as usize) >= other.eval(max_len as usize)
    }
}

#[derive(Debug, Error)]
pub enum KvmError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("estimated work {estimate} steps exceeds the budget of {budget}")]
    WorkBudgetExceeded { estimate: u128, budget: u64 },
}

/// Default cap on `t(N) * 2^(P+1)`, the step estimate for a full build.
pub const DEFAULT_WORK_BUDGET: u64 = 1 << 33;

/// Entry value marking "no program of length <= P produces this string".
pub const NO_PROGRAM: u8 = 0xff;

/// Parameters for [`build_ktable`].
#[derive(Debug, Clone)]
pub struct BuildParams {
    /// Longest output length covered by the table.
    pub max_len: u32,
    /// Longest program length enumerated.
    pub prog_bits: u32,
    pub time_bound: TimeBound,
    pub condition: Option<Bitstring>,
    /// Number of enumeration partitions; the result is independent of it.
    pub partitions: u32,
    pub work_budget: u64,
}

impl BuildParams {
    pub fn new(max_len: u32, prog_bits: u32, time_bound: TimeBound) -> Self {
        BuildParams {
            max_len,
            prog_bits,
            time_bound,
            condition: None,
            partitions: 1,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }

    pub fn with_condition(mut self, condition: Bitstring) -> Self {
        self.condition = Some(condition);
        self
    }

    pub fn with_partitions(mut self, partitions: u32) -> Self {
        self.partitions = partitions;
        self
    }

    fn validate(&self) -> Result<(), KvmError> {
        if self.prog_bits < self.max_len + 1 {
            return Err(KvmError::BadParams(format!(
                "prog_bits {} must be at least max_len + 1 = {} so literal descriptions are enumerated",
                self.prog_bits,
                self.max_len + 1
            )));
        }
        if self.prog_bits > 62 || self.prog_bits as usize >= NO_PROGRAM as usize {
            return Err(KvmError::BadParams(format!(
                "prog_bits {} out of range",
                self.prog_bits
            )));
        }
        if self.max_len > 30 {
            return Err(KvmError::BadParams(format!(
                "max_len {} out of range",
                self.max_len
            )));
        }
        if !self.time_bound.admits_literals(self.max_len) {
            return Err(KvmError::BadParams(format!(
                "time bound t(n) = {}n + {} dips below n + 1 on 0..={}",
                self.time_bound.a, self.time_bound.b, self.max_len
            )));
        }
        if self.partitions == 0 {
            return Err(KvmError::BadParams("partitions must be positive".into()));
        }
        let estimate = self.work_estimate();
        if estimate > self.work_budget as u128 {
            return Err(KvmError::WorkBudgetExceeded {
                estimate,
                budget: self.work_budget,
            });
        }
        Ok(())
    }

    /// `t(N) * 2^(P+1)`: budget times program count, the enumeration cost cap.
    pub fn work_estimate(&self) -> u128 {
        self.time_bound.eval(self.max_len as usize) as u128 * (1u128 << (self.prog_bits + 1))
    }
}

/// Exact minimal description lengths for every string of length `<= max_len`,
/// in (length, value) order. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTable {
    pub machine_version: u32,
    pub time_bound: TimeBound,
    pub max_len: u32,
    pub prog_bits: u32,
    pub condition: Option<Bitstring>,
    pub(crate) entries: Vec<u8>,
}

impl KTable {
    pub fn num_entries(max_len: u32) -> usize {
        (1usize << (max_len + 1)) - 1
    }

    /// Minimal description length of `x`, or `None` when no enumerated
    /// program produces it. Panics when `|x| > max_len`.
    pub fn entry(&self, x: &Bitstring) -> Option<u8> {
        assert!(
            x.len() <= self.max_len as usize,
            "string of length {} outside table range {}",
            x.len(),
            self.max_len
        );
        let v = self.entries[x.lex_index() as usize];
        (v != NO_PROGRAM).then_some(v)
    }

    pub fn raw_entries(&self) -> &[u8] {
        &self.entries
    }
}

/// Merge partial tables by pointwise minimum.
fn merge_min(mut a: Vec<u8>, b: Vec<u8>) -> Vec<u8> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = (*x).min(y);
    }
    a
}

/// Run every program of length `len` with value in `lo..hi` and credit halts.
fn scan_range(params: &BuildParams, len: u32, lo: u64, hi: u64, entries: &mut [u8]) {
    let budget = params.time_bound.eval(params.max_len as usize);
    for value in lo..hi {
        let p = Bitstring::from_value(len as usize, value);
        let out = run_program(&p, budget, params.condition.as_ref());
        if let VmOutcome::Halted { output, steps, .. } = out {
            if output.len() <= params.max_len as usize
                && steps <= params.time_bound.eval(output.len())
            {
                let idx = output.lex_index() as usize;
                entries[idx] = entries[idx].min(len as u8);
            }
        }
    }
}

/// Build the full table by enumerating every program of length `0..=prog_bits`.
///
/// The enumeration is split into `partitions` value ranges per length and the
/// partial tables are merged by pointwise minimum, so the result is identical
/// for every partition count and thread schedule.
pub fn build_ktable(params: &BuildParams) -> Result<KTable, KvmError> {
    params.validate()?;
    let n_entries = KTable::num_entries(params.max_len);

    let mut jobs: Vec<(u32, u64, u64)> = Vec::new();
    for len in 0..=params.prog_bits {
        let total = 1u64 << len;
        let parts = (params.partitions as u64).min(total);
        let chunk = total.div_ceil(parts);
        let mut lo = 0;
        while lo < total {
            let hi = (lo + chunk).min(total);
            jobs.push((len, lo, hi));
            lo = hi;
        }
    }

    let entries = jobs
        .into_par_iter()
        .map(|(len, lo, hi)| {
            let mut local = vec![NO_PROGRAM; n_entries];
            scan_range(params, len, lo, hi, &mut local);
            local
        })
        .reduce(|| vec![NO_PROGRAM; n_entries], merge_min);

    Ok(KTable {
        machine_version: MACHINE_VERSION,
        time_bound: params.time_bound,
        max_len: params.max_len,
        prog_bits: params.prog_bits,
        condition: params.condition.clone(),
        entries,
    })
}

/// Exact minimal description length of a single string, by direct
/// enumeration in (length, value) order. This is the independent oracle the
/// table builder is checked against.
pub fn kt_exact(
    x: &Bitstring,
    tb: TimeBound,
    prog_bits: u32,
    condition: Option<&Bitstring>,
) -> Result<Option<u32>, KvmError> {
    if prog_bits > 62 || prog_bits as usize >= NO_PROGRAM as usize {
        return Err(KvmError::BadParams(format!(
            "prog_bits {prog_bits} out of range"
        )));
    }
    let budget = tb.eval(x.len());
    if budget == 0 {
        return Err(KvmError::BadParams(
            "time bound evaluates to zero steps".into(),
        ));
    }
    let estimate = budget as u128 * (1u128 << (prog_bits + 1));
    if estimate > DEFAULT_WORK_BUDGET as u128 {
        return Err(KvmError::WorkBudgetExceeded {
            estimate,
            budget: DEFAULT_WORK_BUDGET,
        });
    }
    for len in 0..=prog_bits {
        for value in 0..(1u64 << len) {
            let p = Bitstring::from_value(len as usize, value);
            let out = run_program(&p, budget, condition);
            if out.halted_with(x) {
                return Ok(Some(len));
            }
        }
    }
    Ok(None)
}
