//! SAT via self-reducibility: turning an untrusted satisfiability oracle
//! into verified satisfying assignments, and the sampling decision loop
//! that never accepts an unsatisfiable formula.

use thiserror::Error;

use crate::advice::{draw_advice, AdviceError, AdviceScenario, Evaluator};
use crate::bits::Bitstring;
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum SatError {
    #[error("dimacs parse error: {0}")]
    Dimacs(String),
    #[error("formula has {0} variables, supported maximum is {1}")]
    TooManyVariables(usize, usize),
    #[error(transparent)]
    Advice(#[from] AdviceError),
}

/// CNF over variables `1..=num_vars`. A clause is a list of DIMACS literals;
/// an empty clause is unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Self {
        CnfFormula { num_vars, clauses }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        debug_assert_eq!(assignment.len(), self.num_vars);
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let var = lit.unsigned_abs() as usize;
                assignment[var - 1] == (lit > 0)
            })
        })
    }

    /// Fix one variable and simplify: satisfied clauses disappear,
    /// falsified literals are dropped (possibly leaving an empty clause).
    /// The variable numbering is unchanged, so the restriction stays in the
    /// same size class.
    pub fn restrict(&self, var: usize, value: bool) -> CnfFormula {
        let mut clauses = Vec::new();
        for clause in &self.clauses {
            let mut kept = Vec::new();
            let mut satisfied = false;
            for &lit in clause {
                if lit.unsigned_abs() as usize == var {
                    if (lit > 0) == value {
                        satisfied = true;
                        break;
                    }
                } else {
                    kept.push(lit);
                }
            }
            if !satisfied {
                clauses.push(kept);
            }
        }
        CnfFormula {
            num_vars: self.num_vars,
            clauses,
        }
    }

    /// Exhaustive ground truth; formulas are capped at 20 variables.
    pub fn satisfiable_exhaustive(&self) -> Result<bool, SatError> {
        Ok(self.count_satisfying()? > 0)
    }

    pub fn count_satisfying(&self) -> Result<u64, SatError> {
        if self.num_vars > 20 {
            return Err(SatError::TooManyVariables(self.num_vars, 20));
        }
        let mut count = 0u64;
        let mut assignment = vec![false; self.num_vars];
        for v in 0..(1u64 << self.num_vars) {
            for (i, slot) in assignment.iter_mut().enumerate() {
                *slot = (v >> (self.num_vars - 1 - i)) & 1 == 1;
            }
            if self.eval(&assignment) {
                count += 1;
            }
        }
        Ok(count)
    }

    pub fn parse_dimacs(text: &str) -> Result<CnfFormula, SatError> {
        let mut num_vars = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let nums: Vec<&str> = rest.split_whitespace().collect();
                if nums.len() != 2 {
                    return Err(SatError::Dimacs("bad problem line".into()));
                }
                num_vars = Some(
                    nums[0]
                        .parse()
                        .map_err(|_| SatError::Dimacs("bad variable count".into()))?,
                );
                continue;
            }
            for tok in line.split_whitespace() {
                let lit: i32 = tok
                    .parse()
                    .map_err(|_| SatError::Dimacs(format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            return Err(SatError::Dimacs("unterminated clause".into()));
        }
        let num_vars = num_vars.ok_or_else(|| SatError::Dimacs("missing problem line".into()))?;
        for clause in &clauses {
            if clause
                .iter()
                .any(|&l| l == 0 || l.unsigned_abs() as usize > num_vars)
            {
                return Err(SatError::Dimacs("literal out of range".into()));
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Decision-to-search: query the (untrusted) decider on the formula, then on
/// one-variable restrictions in ascending variable order, trying 0 first.
/// Returns `None` when the decider rejects the formula outright; the caller
/// must verify any returned assignment against the formula.
pub fn sat_self_reduce<M>(formula: &CnfFormula, mut decider: M) -> Option<Vec<bool>>
where
    M: FnMut(&CnfFormula, &[bool]) -> bool,
{
    if !decider(formula, &[]) {
        return None;
    }
    let mut prefix: Vec<bool> = Vec::with_capacity(formula.num_vars);
    let mut current = formula.clone();
    for var in 1..=formula.num_vars {
        let zero_branch = current.restrict(var, false);
        let mut probe = prefix.clone();
        probe.push(false);
        if decider(&zero_branch, &probe) {
            current = zero_branch;
            prefix.push(false);
        } else {
            current = current.restrict(var, true);
            prefix.push(true);
        }
    }
    Some(prefix)
}

/// Index of a prefix assignment in the restriction lattice: depth-d prefixes
/// occupy positions `2^d - 1 .. 2^(d+1) - 1`, ordered by value.
pub fn lattice_index(prefix: &[bool]) -> u64 {
    let d = prefix.len();
    let value = prefix.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    (1u64 << d) - 1 + value
}

/// A formula together with a table-decode advice scenario over its
/// restriction lattice: the advice claims the satisfiability bit of every
/// restriction the self-reduction can reach.
#[derive(Debug, Clone)]
pub struct SatScenario {
    pub formula: CnfFormula,
    pub scenario: AdviceScenario,
}

/// Build the per-formula scenario: n = num_vars + 1 index bits, advice
/// length `2^n`, and the least density exponent making the table-decode
/// promise hold.
pub fn sat_scenario(formula: &CnfFormula) -> Result<SatScenario, SatError> {
    let v = formula.num_vars;
    if v == 0 || v > 3 {
        return Err(SatError::TooManyVariables(v, 3));
    }
    let n = (v + 1) as u32;
    let advice_len = 1u64 << n;
    // Truth bits over the lattice: positions past the lattice stay 0.
    let mut truth = Bitstring::zeros(1 << n);
    fill_lattice(formula, &[], &mut truth)?;
    // Least cd with n^cd >= 2^L, the table-decode good-set ratio.
    let mut cd = 0u32;
    while (n as u128).pow(cd) < (1u128 << advice_len) {
        cd += 1;
    }
    let scenario = AdviceScenario::new(n, advice_len, cd, truth, Evaluator::TableDecode)?;
    Ok(SatScenario {
        formula: formula.clone(),
        scenario,
    })
}

fn fill_lattice(
    formula: &CnfFormula,
    prefix: &[bool],
    truth: &mut Bitstring,
) -> Result<(), SatError> {
    let mut restricted = formula.clone();
    for (i, &b) in prefix.iter().enumerate() {
        restricted = restricted.restrict(i + 1, b);
    }
    truth.set(
        lattice_index(prefix) as usize,
        restricted.satisfiable_exhaustive()?,
    );
    if prefix.len() < formula.num_vars {
        let mut next = prefix.to_vec();
        next.push(false);
        fill_lattice(formula, &next, truth)?;
        *next.last_mut().unwrap() = true;
        fill_lattice(formula, &next, truth)?;
    }
    Ok(())
}

/// Result of one sampling decision run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatDecision {
    pub accepted: bool,
    pub iterations_used: u64,
    /// The verified assignment, present exactly when accepted.
    pub assignment: Option<Vec<bool>>,
}

/// Sample up to `2 n^cd` advice strings; whenever the advice claims the
/// formula satisfiable, self-reduce to an assignment and verify it against
/// the formula. Accepts only on a verified assignment, so an unsatisfiable
/// formula is never accepted.
pub fn sat_decide(ss: &SatScenario, stream: RngStream) -> Result<SatDecision, SatError> {
    let s = &ss.scenario;
    let budget = s.sample_budget()?;
    for j in 0..budget {
        let advice = draw_advice(&stream, j, s.advice_len());
        let decider =
            |_query: &CnfFormula, prefix: &[bool]| s.eval_eager(lattice_index(prefix), &advice);
        if let Some(assignment) = sat_self_reduce(&ss.formula, decider) {
            if ss.formula.eval(&assignment) {
                return Ok(SatDecision {
                    accepted: true,
                    iterations_used: j + 1,
                    assignment: Some(assignment),
                });
            }
        }
    }
    Ok(SatDecision {
        accepted: false,
        iterations_used: budget,
        assignment: None,
    })
}
