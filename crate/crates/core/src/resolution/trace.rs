//! Line-oriented proof traces. Step ids are 1-based line numbers and literals
//! use the DIMACS ids of the formula's [`VarMap`]:
//!
//! ```text
//! a 1 0
//! a -1 0
//! r 1 2 1 0
//! ```

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::formulas::dimacs::VarMap;
use crate::formulas::{Clause, Lit};

use super::{ResolutionProof, Step};

fn lits(c: &Clause, map: &VarMap) -> Result<String, ParseError> {
    let mut out = String::new();
    for &l in c.lits() {
        let x = map
            .encode_lit(l)
            .ok_or_else(|| ParseError::new(format!("variable {} has no DIMACS id", l.var)))?;
        write!(out, "{x} ").unwrap();
    }
    out.push('0');
    Ok(out)
}

pub fn write_trace(proof: &ResolutionProof, map: &VarMap) -> Result<String, ParseError> {
    let mut out = String::new();
    for s in proof.steps() {
        match s {
            Step::Axiom(c) => writeln!(out, "a {}", lits(c, map)?),
            Step::Weaken { src, clause } => writeln!(out, "w {} {}", src + 1, lits(clause, map)?),
            Step::Resolve {
                left,
                right,
                pivot,
                clause,
            } => {
                let p = map
                    .id(*pivot)
                    .ok_or_else(|| ParseError::new(format!("pivot {pivot} has no DIMACS id")))?;
                writeln!(out, "r {} {} {p} {}", left + 1, right + 1, lits(clause, map)?)
            }
        }
        .unwrap();
    }
    Ok(out)
}

pub fn parse_trace(text: &str, map: &VarMap) -> Result<ResolutionProof, ParseError> {
    let mut steps = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| ParseError::new(format!("line {n}: {m}"));
        let mut toks = line.split_whitespace();
        let kind = toks.next().expect("nonempty line");
        let mut nums = Vec::new();
        for t in toks {
            nums.push(t.parse::<i64>().map_err(|_| err(&format!("bad number {t:?}")))?);
        }
        if nums.last() != Some(&0) {
            return Err(err("step is not terminated by 0"));
        }
        nums.pop();
        let step_ref = |x: i64| -> Result<usize, ParseError> {
            if x < 1 {
                return Err(err(&format!("bad step reference {x}")));
            }
            Ok(x as usize - 1)
        };
        let clause = |xs: &[i64]| -> Result<Clause, ParseError> {
            let mut out: Vec<Lit> = Vec::with_capacity(xs.len());
            for &x in xs {
                if x == 0 {
                    return Err(err("0 inside a clause"));
                }
                out.push(map.decode_lit(x).ok_or_else(|| err(&format!("unknown variable {x}")))?);
            }
            Clause::new(out).map_err(|e| err(&e.to_string()))
        };
        let step = match kind {
            "a" => Step::Axiom(clause(&nums)?),
            "w" => {
                let (&src, rest) = nums.split_first().ok_or_else(|| err("missing source"))?;
                Step::Weaken {
                    src: step_ref(src)?,
                    clause: clause(rest)?,
                }
            }
            "r" => {
                if nums.len() < 3 {
                    return Err(err("resolution needs two premises and a pivot"));
                }
                let pivot = map
                    .var(nums[2])
                    .ok_or_else(|| err(&format!("unknown pivot {}", nums[2])))?;
                Step::Resolve {
                    left: step_ref(nums[0])?,
                    right: step_ref(nums[1])?,
                    pivot,
                    clause: clause(&nums[3..])?,
                }
            }
            other => return Err(err(&format!("unknown step kind {other:?}"))),
        };
        steps.push(step);
    }
    Ok(ResolutionProof::from_steps(steps))
}
