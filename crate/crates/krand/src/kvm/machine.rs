//! KVM-1: the fixed two-branch universal machine.
//!
//! A program is an arbitrary bit string. A program starting with `1` is a
//! literal: the machine halts immediately with the remainder as output,
//! charging `|p|` steps. A program starting with `0` runs the remainder as a
//! stream of 3-bit opcodes (MSB-first) on a right-infinite, zero-initialized
//! binary work tape:
//!
//! | bits | op         | effect |
//! |------|------------|--------|
//! | 000  | LEFT       | move head left; no-op at the left edge |
//! | 001  | RIGHT      | move head right |
//! | 010  | FLIP       | invert the bit under the head |
//! | 011  | OUT        | append the bit under the head to the output |
//! | 100  | LOOP-OPEN  | if the bit under the head is 0, jump past the matching LOOP-CLOSE |
//! | 101  | LOOP-CLOSE | if the bit under the head is 1, jump back to the matching LOOP-OPEN |
//! | 110  | READ       | write the next condition bit to the cell under the head, consuming it; 0 when absent or exhausted |
//! | 111  | HALT       | halt |
//!
//! Every executed opcode costs one step. Running off the end of the code
//! halts with the bits emitted so far; a trailing incomplete opcode (1-2
//! bits) is ignored. A program whose decoded code contains an unmatched
//! LOOP-OPEN or LOOP-CLOSE anywhere is invalid and produces no output.
//! Identical bit strings always produce identical outcomes.

use crate::bits::Bitstring;

/// Version tag of these semantics, stored in serialized tables.
pub const MACHINE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opcode {
    Left,
    Right,
    Flip,
    Out,
    LoopOpen,
    LoopClose,
    Read,
    Halt,
}

impl Opcode {
    fn from_bits(v: u8) -> Opcode {
        match v {
            0 => Opcode::Left,
            1 => Opcode::Right,
            2 => Opcode::Flip,
            3 => Opcode::Out,
            4 => Opcode::LoopOpen,
            5 => Opcode::LoopClose,
            6 => Opcode::Read,
            7 => Opcode::Halt,
            _ => unreachable!(),
        }
    }
}

/// Result of running one program under a step budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VmOutcome {
    Halted {
        output: Bitstring,
        steps: u64,
        /// Step count at which each output bit was emitted; nondecreasing,
        /// one entry per output bit.
        emit_steps: Vec<u64>,
    },
    /// The budget ran out before the program halted.
    OutOfBudget { steps: u64 },
    /// Unmatched loop brackets in the decoded code.
    Invalid,
}

impl VmOutcome {
    pub fn output(&self) -> Option<&Bitstring> {
        match self {
            VmOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn halted_with(&self, x: &Bitstring) -> bool {
        self.output() == Some(x)
    }
}

/// Decode the code stream into opcodes plus a bracket-match table.
/// Returns `None` when any loop bracket is unmatched.
fn decode(code: &Bitstring) -> Option<(Vec<Opcode>, Vec<usize>)> {
    let n_ops = code.len() / 3;
    let mut ops = Vec::with_capacity(n_ops);
    for i in 0..n_ops {
        let v = (code.get(3 * i) as u8) << 2
            | (code.get(3 * i + 1) as u8) << 1
            | code.get(3 * i + 2) as u8;
        ops.push(Opcode::from_bits(v));
    }
    let mut mate = vec![usize::MAX; n_ops];
    let mut stack = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        match op {
            Opcode::LoopOpen => stack.push(i),
            Opcode::LoopClose => {
                let open = stack.pop()?;
                mate[open] = i;
                mate[i] = open;
            }
            _ => {}
        }
    }
    if stack.is_empty() {
        Some((ops, mate))
    } else {
        None
    }
}

/// Run program `p` for at most `budget` steps.
pub fn run_program(p: &Bitstring, budget: u64, condition: Option<&Bitstring>) -> VmOutcome {
    if p.is_empty() {
        return VmOutcome::Halted {
            output: Bitstring::new(),
            steps: 0,
            emit_steps: Vec::new(),
        };
    }
    if p.get(0) {
        // Literal branch: output the remainder, charging |p| steps.
        let steps = p.len() as u64;
        if steps > budget {
            return VmOutcome::OutOfBudget { steps: budget };
        }
        let output = p.slice(1, p.len());
        let emit_steps = vec![steps; output.len()];
        return VmOutcome::Halted {
            output,
            steps,
            emit_steps,
        };
    }

    let code = p.slice(1, p.len());
    let Some((ops, mate)) = decode(&code) else {
        return VmOutcome::Invalid;
    };

    let mut tape: Vec<bool> = vec![false];
    let mut head = 0usize;
    let mut out = Bitstring::new();
    let mut emit_steps = Vec::new();
    let mut cond_pos = 0usize;
    let mut steps = 0u64;
    let mut pc = 0usize;

    while pc < ops.len() {
        if steps == budget {
            return VmOutcome::OutOfBudget { steps };
        }
        steps += 1;
        match ops[pc] {
            Opcode::Left => {
                head = head.saturating_sub(1);
                pc += 1;
            }
            Opcode::Right => {
                head += 1;
                if head == tape.len() {
                    tape.push(false);
                }
                pc += 1;
            }
            Opcode::Flip => {
                tape[head] = !tape[head];
                pc += 1;
            }
            Opcode::Out => {
                out.push(tape[head]);
                emit_steps.push(steps);
                pc += 1;
            }
            Opcode::LoopOpen => {
                if tape[head] {
                    pc += 1;
                } else {
                    pc = mate[pc] + 1;
                }
            }
            Opcode::LoopClose => {
                if tape[head] {
                    pc = mate[pc];
                } else {
                    pc += 1;
                }
            }
            Opcode::Read => {
                let bit = match condition {
                    Some(c) if cond_pos < c.len() => {
                        let b = c.get(cond_pos);
                        cond_pos += 1;
                        b
                    }
                    _ => false,
                };
                tape[head] = bit;
                pc += 1;
            }
            Opcode::Halt => {
                return VmOutcome::Halted {
                    output: out,
                    steps,
                    emit_steps,
                };
            }
        }
    }
    VmOutcome::Halted {
        output: out,
        steps,
        emit_steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn empty_program_halts_immediately() {
        let out = run_program(&Bitstring::new(), 10, None);
        assert_eq!(
            out,
            VmOutcome::Halted {
                output: Bitstring::new(),
                steps: 0,
                emit_steps: vec![],
            }
        );
    }

    #[test]
    fn literal_branch_emits_remainder() {
        let out = run_program(&bs("10110"), 10, None);
        assert_eq!(
            out,
            VmOutcome::Halted {
                output: bs("0110"),
                steps: 5,
                emit_steps: vec![5; 4],
            }
        );
        assert_eq!(
            run_program(&bs("10110"), 4, None),
            VmOutcome::OutOfBudget { steps: 4 }
        );
    }

    #[test]
    fn out_then_halt_emits_a_zero() {
        // VM branch, opcodes OUT (011), HALT (111): the tape starts all-zero.
        let out = run_program(&bs("0011111"), 10, None);
        assert_eq!(
            out,
            VmOutcome::Halted {
                output: bs("0"),
                steps: 2,
                emit_steps: vec![1],
            }
        );
    }

    #[test]
    fn code_exhaustion_halts_with_partial_output() {
        // OUT then a dangling 2-bit fragment, which is ignored.
        let out = run_program(&bs("001111"), 10, None);
        assert_eq!(out.output(), Some(&bs("0")));
    }

    #[test]
    fn unmatched_brackets_are_invalid() {
        // Single LOOP-OPEN (100).
        assert_eq!(run_program(&bs("0100"), 10, None), VmOutcome::Invalid);
        // Single LOOP-CLOSE (101), even though it would never fire.
        assert_eq!(run_program(&bs("0101"), 10, None), VmOutcome::Invalid);
    }

    #[test]
    fn read_copies_condition_bits_and_defaults_to_zero() {
        // READ OUT READ OUT READ OUT: copies two condition bits, then zero.
        let p = bs("0110011110011110011");
        let out = run_program(&p, 20, Some(&bs("11")));
        assert_eq!(out.output(), Some(&bs("110")));
        let out = run_program(&p, 20, None);
        assert_eq!(out.output(), Some(&bs("000")));
    }

    /// Hand-traced unary-countdown loop that emits `0^8`.
    ///
    /// Code: (FLIP RIGHT)x8, LEFT, LOOP-OPEN, RIGHT, OUT, LEFT, FLIP, LEFT,
    /// LOOP-CLOSE. The setup writes ones on cells 0..8 and parks the head on
    /// cell 7; each loop pass emits the zero to the right of the current one,
    /// clears the one, and moves left; the final pass bumps into the left
    /// edge and the LOOP-CLOSE falls through. 16 setup steps + 1 + 8 passes
    /// of 7 steps = 73 steps.
    #[test]
    fn hand_traced_loop_emits_eight_zeros() {
        let mut code = String::new();
        for _ in 0..8 {
            code.push_str("010001"); // FLIP RIGHT
        }
        code.push_str("000"); // LEFT
        code.push_str("100001011000010000101"); // LOOP-OPEN RIGHT OUT LEFT FLIP LEFT LOOP-CLOSE
        let p = bs(&format!("0{code}"));
        let out = run_program(&p, 200, None);
        match out {
            VmOutcome::Halted {
                output,
                steps,
                emit_steps,
            } => {
                assert_eq!(output, bs("00000000"));
                assert_eq!(steps, 73);
                // One bit per pass, 7 steps apart, first at step 20.
                assert_eq!(emit_steps, (0..8).map(|i| 20 + 7 * i).collect::<Vec<_>>());
            }
            other => panic!("expected halt, got {other:?}"),
        }
        assert_eq!(
            run_program(&p, 72, None),
            VmOutcome::OutOfBudget { steps: 72 }
        );
    }

    #[test]
    fn left_edge_is_a_noop() {
        // LEFT LEFT OUT still reads cell 0.
        let out = run_program(&bs("0000000011"), 10, None);
        assert_eq!(out.output(), Some(&bs("0")));
    }
}
