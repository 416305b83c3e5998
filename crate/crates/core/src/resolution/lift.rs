use std::collections::HashMap;

use crate::algebra::PartialAssignment;
use crate::formulas::{Clause, CnfFormula, Lit};

use super::{check_proof, ResolutionError, ResolutionProof, Step};

/// The unique clause over the assigned variables that `rho` falsifies.
pub fn falsified_clause(rho: &PartialAssignment) -> Clause {
    Clause::new(rho.iter().map(|(&v, &b)| Lit::new(v, !b))).expect("one literal per variable")
}

/// Turns a proof of `C` from `F|ρ` into a proof of `A ∨ C` from `F`, where
/// `A` is the clause falsified by `ρ`. Each line `D` becomes `D ∨ A'` for the
/// part `A' ⊆ A` its axioms brought in; a final weakening adds the rest.
pub fn lift_proof(
    f: &CnfFormula,
    rho: &PartialAssignment,
    proof: &ResolutionProof,
) -> Result<ResolutionProof, ResolutionError> {
    let restricted = f.restrict(rho);
    check_proof(&restricted, proof)?;

    // First original clause (in canonical order) restricting to each clause.
    let mut origin: HashMap<Clause, &Clause> = HashMap::new();
    for c in f.clauses() {
        if let Some(r) = c.restrict(rho) {
            origin.entry(r).or_insert(c);
        }
    }
    let a = falsified_clause(rho);
    let lift_err = |i: usize, reason: String| ResolutionError::Lift { step: i + 1, reason };

    let mut out = ResolutionProof::new();
    for (i, s) in proof.steps().iter().enumerate() {
        let lifted = match s {
            Step::Axiom(c) => Step::Axiom(origin[c].clone()),
            Step::Weaken { src, clause } => {
                let extra = out.steps()[*src].clause().without_all(clause);
                let target = clause
                    .union(&extra)
                    .map_err(|e| lift_err(i, e.to_string()))?;
                Step::Weaken {
                    src: *src,
                    clause: target,
                }
            }
            Step::Resolve {
                left, right, pivot, ..
            } => {
                if rho.contains_key(pivot) {
                    return Err(lift_err(i, format!("pivot {pivot} is assigned")));
                }
                let l = out.steps()[*left].clause();
                let r = out.steps()[*right].clause();
                let clause = super::resolvent(l, r, *pivot)
                    .ok_or_else(|| lift_err(i, "lifted resolvent is tautological".into()))?;
                Step::Resolve {
                    left: *left,
                    right: *right,
                    pivot: *pivot,
                    clause,
                }
            }
        };
        out.push(lifted);
    }
    let last = out.len() - 1;
    let conclusion = out.steps()[last].clause().clone();
    let full = proof
        .conclusion()
        .expect("checked nonempty")
        .union(&a)
        .map_err(|e| lift_err(last, e.to_string()))?;
    if conclusion != full {
        out.weaken(last, full);
    }
    Ok(out)
}

/// Restricts every line of a proof of `F` by `ρ`, giving a proof of a
/// subclause of `C|ρ` from `F|ρ`. Lines satisfied by `ρ` are dropped.
pub fn restrict_proof(
    proof: &ResolutionProof,
    rho: &PartialAssignment,
) -> Option<ResolutionProof> {
    let mut out = ResolutionProof::new();
    // For each original step: the new step deriving a subclause of its
    // restriction, or None when the restriction is satisfied.
    let mut image: Vec<Option<usize>> = Vec::with_capacity(proof.len());
    for s in proof.steps() {
        let img = match s.clause().restrict(rho) {
            None => None,
            Some(target) => match s {
                Step::Axiom(_) => Some(out.axiom(target)),
                Step::Weaken { src, .. } => image[*src],
                Step::Resolve {
                    left, right, pivot, ..
                } => match rho.get(pivot) {
                    // The premise whose pivot literal is falsified already
                    // derives a subclause of the target.
                    Some(true) => image[*right],
                    Some(false) => image[*left],
                    None => {
                        let (l, r) = (image[*left]?, image[*right]?);
                        let has_l = out.steps()[l].clause().contains(Lit::pos(*pivot));
                        let has_r = out.steps()[r].clause().contains(Lit::neg(*pivot));
                        match (has_l, has_r) {
                            (true, true) => Some(out.resolve(l, r, *pivot)),
                            (false, _) => Some(l),
                            (true, false) => Some(r),
                        }
                    }
                },
            },
        };
        image.push(img);
    }
    let root = (*image.last()?)?;
    if root != out.len() - 1 {
        let c = out.steps()[root].clause().clone();
        out.weaken(root, c);
    }
    Some(out)
}
