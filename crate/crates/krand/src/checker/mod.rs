//! Instance checkers: randomized oracle procedures that never err against
//! the true oracle and give a wrong non-fail answer with probability at most
//! 1/4 against any oracle, plus majority amplification and the
//! checker-driven advice-sampling decision loop.

pub mod perm;
pub mod sat;

use thiserror::Error;

use crate::advice::{draw_advice, AdviceError, AdviceScenario};
use crate::bits::{fnv1a64, Bitstring};
use crate::rng::{Rng, RngStream};

#[derive(Debug, Error)]
pub enum CheckerError {
    #[error("checker bug: oracle query of length {got}, declared query length {want}")]
    QueryLengthViolation { got: usize, want: usize },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("scenario answers {have}-bit queries but the checker asks {need}-bit ones")]
    QueryLengthMismatch { have: u32, need: usize },
    #[error(transparent)]
    Advice(#[from] AdviceError),
}

/// Outcome of one checker call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Value(bool),
    Fail,
}

impl Verdict {
    pub fn value(self) -> Option<bool> {
        match self {
            Verdict::Value(v) => Some(v),
            Verdict::Fail => None,
        }
    }
}

/// A membership oracle over bit strings; total on every query length.
pub trait Oracle {
    fn answer(&mut self, query: &Bitstring) -> bool;
}

/// Source of the checker's random choices.
pub trait CheckerRandom {
    fn below(&mut self, n: u64) -> u64;
}

impl CheckerRandom for Rng {
    fn below(&mut self, n: u64) -> u64 {
        Rng::below(self, n)
    }
}

/// A fixed tape of choices, for exhaustive enumeration of a checker's
/// randomness in tests and measurements.
#[derive(Debug, Clone)]
pub struct ChoiceTape {
    choices: Vec<u64>,
    pos: usize,
}

impl ChoiceTape {
    pub fn new(choices: Vec<u64>) -> Self {
        ChoiceTape { choices, pos: 0 }
    }
}

impl CheckerRandom for ChoiceTape {
    fn below(&mut self, n: u64) -> u64 {
        let v = self.choices[self.pos];
        self.pos += 1;
        assert!(v < n, "tape choice {v} out of range {n}");
        v
    }
}

/// An instance checker with a declared per-input-length query length.
pub trait InstanceChecker {
    fn query_len(&self, input_len: usize) -> usize;

    fn decide(
        &self,
        x: &Bitstring,
        oracle: &mut dyn Oracle,
        rand: &mut dyn CheckerRandom,
    ) -> Verdict;
}

struct LengthGuard<'a> {
    inner: &'a mut dyn Oracle,
    expect: usize,
    violation: Option<usize>,
    queries: u64,
}

impl Oracle for LengthGuard<'_> {
    fn answer(&mut self, query: &Bitstring) -> bool {
        if query.len() != self.expect {
            self.violation.get_or_insert(query.len());
        }
        self.queries += 1;
        self.inner.answer(query)
    }
}

/// Execute one checker call, enforcing the query-length discipline: every
/// oracle query on an input of length n must have length exactly
/// `query_len(n)`. A violation is a checker bug and a hard error.
pub fn run_checker<C: InstanceChecker + ?Sized>(
    checker: &C,
    oracle: &mut dyn Oracle,
    x: &Bitstring,
    rand: &mut dyn CheckerRandom,
) -> Result<Verdict, CheckerError> {
    let want = checker.query_len(x.len());
    let mut guard = LengthGuard {
        inner: oracle,
        expect: want,
        violation: None,
        queries: 0,
    };
    let verdict = checker.decide(x, &mut guard, rand);
    if let Some(got) = guard.violation {
        return Err(CheckerError::QueryLengthViolation { got, want });
    }
    Ok(verdict)
}

/// Majority amplification: run the checker `reps` times and output the value
/// carrying a strict absolute majority of all repetitions (fails count
/// against both values), else fail. Counting fails in the denominator is
/// what makes the per-call 1/4 bound amplify: an oracle that mostly fails
/// and occasionally lies would win a majority among non-fail outcomes alone.
/// Never outputs a value the base checker did not output on one of the runs.
#[derive(Debug, Clone)]
pub struct Amplified<C> {
    inner: C,
    reps: u32,
}

impl<C: InstanceChecker> Amplified<C> {
    pub fn new(inner: C, reps: u32) -> Result<Self, CheckerError> {
        if reps == 0 {
            return Err(CheckerError::BadParams("reps must be positive".into()));
        }
        Ok(Amplified { inner, reps })
    }

    pub fn reps(&self) -> u32 {
        self.reps
    }
}

impl<C: InstanceChecker> InstanceChecker for Amplified<C> {
    fn query_len(&self, input_len: usize) -> usize {
        self.inner.query_len(input_len)
    }

    fn decide(
        &self,
        x: &Bitstring,
        oracle: &mut dyn Oracle,
        rand: &mut dyn CheckerRandom,
    ) -> Verdict {
        let mut count = [0u32; 2];
        for _ in 0..self.reps {
            if let Verdict::Value(v) = self.inner.decide(x, oracle, rand) {
                count[v as usize] += 1;
            }
        }
        if 2 * count[1] > self.reps {
            Verdict::Value(true)
        } else if 2 * count[0] > self.reps {
            Verdict::Value(false)
        } else {
            Verdict::Fail
        }
    }
}

/// Answer oracle queries by `M(query, r)` for one fixed advice string.
pub struct ScenarioOracle<'a> {
    scenario: &'a AdviceScenario,
    advice: Bitstring,
}

impl Oracle for ScenarioOracle<'_> {
    fn answer(&mut self, query: &Bitstring) -> bool {
        debug_assert_eq!(query.len(), self.scenario.n() as usize);
        self.scenario.eval_eager(query.value_u64(), &self.advice)
    }
}

/// The checker-driven decision loop: sample up to `2 n^cd` advice strings,
/// answer every checker query through `M(., r)`, and return the first
/// non-fail verdict; 0 after the budget.
pub fn checked_decide<C: InstanceChecker>(
    scenario: &AdviceScenario,
    checker: &C,
    x: &Bitstring,
    stream: RngStream,
) -> Result<bool, CheckerError> {
    let need = checker.query_len(x.len());
    if scenario.n() as usize != need {
        return Err(CheckerError::QueryLengthMismatch {
            have: scenario.n(),
            need,
        });
    }
    let budget = scenario.sample_budget().map_err(CheckerError::Advice)?;
    let rand_stream = stream.derive("checker-rand");
    for j in 0..budget {
        let advice = draw_advice(&stream, j, scenario.advice_len());
        let mut oracle = ScenarioOracle { scenario, advice };
        let mut rng = Rng::from_stream(rand_stream.derive_u64(j));
        match run_checker(checker, &mut oracle, x, &mut rng)? {
            Verdict::Value(v) => return Ok(v),
            Verdict::Fail => {}
        }
    }
    Ok(false)
}

/// Oracle adversaries for soundness measurements.
pub mod oracles {
    use super::*;

    /// The always-lying oracle.
    pub struct FlipAll<O>(pub O);

    impl<O: Oracle> Oracle for FlipAll<O> {
        fn answer(&mut self, query: &Bitstring) -> bool {
            !self.0.answer(query)
        }
    }

    /// Flips the answers on a fixed pseudorandom fraction of the query
    /// space: query q is corrupted iff `hash(q) mod 100 < percent`. The
    /// corrupted set depends only on the stream, not on query order.
    pub struct FlipFraction<O> {
        pub inner: O,
        pub stream: RngStream,
        pub percent: u64,
    }

    impl<O: Oracle> Oracle for FlipFraction<O> {
        fn answer(&mut self, query: &Bitstring) -> bool {
            let mut bytes = query.pack_lsb_bytes();
            bytes.extend_from_slice(&(query.len() as u64).to_le_bytes());
            let flip = self.stream.at(fnv1a64(&bytes)) % 100 < self.percent;
            self.inner.answer(query) ^ flip
        }
    }

    /// Answers a constant regardless of the query.
    pub struct Constant(pub bool);

    impl Oracle for Constant {
        fn answer(&mut self, _query: &Bitstring) -> bool {
            self.0
        }
    }
}
