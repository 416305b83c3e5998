//! Exhaustive 0/1 sweeps used to cross-check satisfiability at small scale.

use std::collections::BTreeSet;

use crate::algebra::{ConstraintSystem, PartialAssignment, Relation, VarId};
use crate::formulas::CnfFormula;

/// Largest variable count the sweeps accept.
pub const MAX_SWEEP: usize = 24;

fn assignment(vars: &[VarId], bits: u64) -> PartialAssignment {
    vars.iter()
        .enumerate()
        .map(|(i, &v)| (v, bits >> i & 1 == 1))
        .collect()
}

/// A satisfying assignment of `f`, or `None` if it is unsatisfiable.
/// Panics above [`MAX_SWEEP`] variables.
pub fn find_model(f: &CnfFormula) -> Option<PartialAssignment> {
    let vars: Vec<VarId> = f
        .clauses()
        .iter()
        .flat_map(|c| c.lits().iter().map(|l| l.var))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(vars.len() <= MAX_SWEEP, "{} variables is too many to sweep", vars.len());
    let index = |v: VarId| vars.binary_search(&v).expect("collected");
    // Clauses as (positive mask, negative mask).
    let masks: Vec<(u64, u64)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.lits().iter().fold((0, 0), |(p, n), l| {
                let bit = 1u64 << index(l.var);
                if l.positive {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect();
    (0..1u64 << vars.len())
        .find(|&a| masks.iter().all(|&(p, n)| a & p != 0 || !a & n != 0))
        .map(|a| assignment(&vars, a))
}

pub fn is_satisfiable(f: &CnfFormula) -> bool {
    find_model(f).is_some()
}

/// A 0/1 point satisfying every constraint, or `None`.
pub fn find_feasible_point(sys: &ConstraintSystem) -> Option<PartialAssignment> {
    let vars: Vec<VarId> = sys.vars().into_iter().collect();
    assert!(vars.len() <= MAX_SWEEP, "{} variables is too many to sweep", vars.len());
    (0..1u64 << vars.len()).map(|a| assignment(&vars, a)).find(|alpha| {
        sys.iter().all(|c| {
            let v = c.poly.eval_map(alpha).expect("total assignment");
            match c.relation {
                Relation::EqZero => num_traits::Zero::is_zero(&v),
                Relation::GeqZero => !num_traits::Signed::is_negative(&v),
            }
        })
    })
}

pub fn is_feasible(sys: &ConstraintSystem) -> bool {
    find_feasible_point(sys).is_some()
}
