//! Resolution proofs with explicit weakening, a strict checker and the
//! refutation builders.

mod builders;
mod lift;
mod trace;

use std::fmt;

use thiserror::Error;

use crate::algebra::VarId;
use crate::formulas::{Clause, CnfFormula, FormulaError, Lit};

pub use builders::{
    build_bruteforce_refutation, build_clique_refutation, build_relativized_refutation,
    build_threshold_refutation, find_clique,
};
pub use lift::{falsified_clause, lift_proof, restrict_proof};
pub use trace::{parse_trace, write_trace};

/// One line of a proof. Premises refer to earlier steps by 0-based index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Axiom(Clause),
    Weaken {
        src: usize,
        clause: Clause,
    },
    /// `left` contains `pivot` positively, `right` negatively.
    Resolve {
        left: usize,
        right: usize,
        pivot: VarId,
        clause: Clause,
    },
}

impl Step {
    pub fn clause(&self) -> &Clause {
        match self {
            Step::Axiom(c) => c,
            Step::Weaken { clause, .. } | Step::Resolve { clause, .. } => clause,
        }
    }

    pub fn premises(&self) -> Vec<usize> {
        match *self {
            Step::Axiom(_) => vec![],
            Step::Weaken { src, .. } => vec![src],
            Step::Resolve { left, right, .. } => vec![left, right],
        }
    }
}

/// A proof stored as a DAG: the last step is the derived clause.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResolutionProof {
    steps: Vec<Step>,
}

impl ResolutionProof {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<Step>) -> Self {
        ResolutionProof { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn conclusion(&self) -> Option<&Clause> {
        self.steps.last().map(Step::clause)
    }

    pub fn push(&mut self, s: Step) -> usize {
        self.steps.push(s);
        self.steps.len() - 1
    }

    pub fn axiom(&mut self, c: Clause) -> usize {
        self.push(Step::Axiom(c))
    }

    pub fn weaken(&mut self, src: usize, clause: Clause) -> usize {
        self.push(Step::Weaken { src, clause })
    }

    /// Resolves two earlier steps on `pivot`, in whichever order puts the
    /// positive occurrence on the left. The conclusion is computed.
    pub fn resolve(&mut self, a: usize, b: usize, pivot: VarId) -> usize {
        let (left, right) = if self.steps[a].clause().contains(Lit::pos(pivot)) {
            (a, b)
        } else {
            (b, a)
        };
        let clause = resolvent(
            self.steps[left].clause(),
            self.steps[right].clause(),
            pivot,
        )
        .expect("builder resolves on a clashing pivot");
        self.push(Step::Resolve {
            left,
            right,
            pivot,
            clause,
        })
    }

    /// Appends all steps of `other`, shifting its references. Returns the
    /// index of `other`'s last step.
    pub fn append(&mut self, other: &ResolutionProof) -> usize {
        let off = self.steps.len();
        for s in &other.steps {
            self.steps.push(match s.clone() {
                Step::Axiom(c) => Step::Axiom(c),
                Step::Weaken { src, clause } => Step::Weaken {
                    src: src + off,
                    clause,
                },
                Step::Resolve {
                    left,
                    right,
                    pivot,
                    clause,
                } => Step::Resolve {
                    left: left + off,
                    right: right + off,
                    pivot,
                    clause,
                },
            });
        }
        self.steps.len() - 1
    }

    /// Applies a variable renaming to every clause.
    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> ResolutionProof {
        let steps = self
            .steps
            .iter()
            .map(|s| match s {
                Step::Axiom(c) => Step::Axiom(c.rename(&f)),
                Step::Weaken { src, clause } => Step::Weaken {
                    src: *src,
                    clause: clause.rename(&f),
                },
                Step::Resolve {
                    left,
                    right,
                    pivot,
                    clause,
                } => Step::Resolve {
                    left: *left,
                    right: *right,
                    pivot: f(*pivot),
                    clause: clause.rename(&f),
                },
            })
            .collect();
        ResolutionProof { steps }
    }
}

/// `(A ∨ x, B ∨ ¬x) ↦ A ∨ B`, or `None` if the pivot does not clash or the
/// result would be tautological.
pub fn resolvent(left: &Clause, right: &Clause, pivot: VarId) -> Option<Clause> {
    if !left.contains(Lit::pos(pivot)) || !right.contains(Lit::neg(pivot)) {
        return None;
    }
    left.without(Lit::pos(pivot))
        .union(&right.without(Lit::neg(pivot)))
        .ok()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofMeasures {
    /// Number of steps, counting repeated clauses.
    pub size: usize,
    pub width: usize,
    pub domain_width: usize,
    /// Every step is a premise of at most one later step.
    pub tree_like: bool,
    /// The last clause is empty.
    pub refutation: bool,
}

impl fmt::Display for ProofMeasures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "size={} width={} domain_width={} tree_like={} refutation={}",
            self.size, self.width, self.domain_width, self.tree_like, self.refutation
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("axiom {0} is not a clause of the formula")]
    UnknownAxiom(Clause),
    #[error("premise {premise} is not an earlier step")]
    BadReference { premise: usize },
    #[error("weakening target {target} does not contain source {from}")]
    BadWeakening { from: Clause, target: Clause },
    #[error("pivot {pivot} does not occur positively in {left} and negatively in {right}")]
    BadPivot {
        pivot: VarId,
        left: Clause,
        right: Clause,
    },
    #[error("resolvent should be {expected}, found {found}")]
    BadConclusion { expected: Clause, found: Clause },
}

/// A rejected step (1-based, matching trace line numbers).
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("proof has no steps")]
    Empty,
    #[error("step {step}: {error}")]
    Step { step: usize, error: StepError },
    #[error("proof derives {0}, not the empty clause")]
    NotARefutation(Clause),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ResolutionError {
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("graph has a {} -clique: {}", .0.len(), .0.join(", "))]
    HasClique(Vec<String>),
    #[error("lifting failed at step {step}: {reason}")]
    Lift { step: usize, reason: String },
}

/// Validates every step against `f` and returns the proof's measures.
pub fn check_proof(f: &CnfFormula, proof: &ResolutionProof) -> Result<ProofMeasures, ProofError> {
    if proof.is_empty() {
        return Err(ProofError::Empty);
    }
    let mut uses = vec![0usize; proof.len()];
    let fail = |i: usize, error| ProofError::Step { step: i + 1, error };
    for (i, s) in proof.steps.iter().enumerate() {
        for p in s.premises() {
            if p >= i {
                return Err(fail(i, StepError::BadReference { premise: p + 1 }));
            }
            uses[p] += 1;
        }
        match s {
            Step::Axiom(c) => {
                if !f.contains(c) {
                    return Err(fail(i, StepError::UnknownAxiom(c.clone())));
                }
            }
            Step::Weaken { src, clause } => {
                let source = proof.steps[*src].clause();
                if !source.is_subset_of(clause) {
                    return Err(fail(
                        i,
                        StepError::BadWeakening {
                            from: source.clone(),
                            target: clause.clone(),
                        },
                    ));
                }
            }
            Step::Resolve {
                left,
                right,
                pivot,
                clause,
            } => {
                let (l, r) = (proof.steps[*left].clause(), proof.steps[*right].clause());
                if !l.contains(Lit::pos(*pivot)) || !r.contains(Lit::neg(*pivot)) {
                    return Err(fail(
                        i,
                        StepError::BadPivot {
                            pivot: *pivot,
                            left: l.clone(),
                            right: r.clone(),
                        },
                    ));
                }
                let expected = l
                    .without(Lit::pos(*pivot))
                    .lits()
                    .iter()
                    .chain(r.without(Lit::neg(*pivot)).lits())
                    .copied()
                    .collect::<std::collections::BTreeSet<Lit>>();
                if !expected.iter().copied().eq(clause.lits().iter().copied()) {
                    // A tautological union has no clause form; report it as
                    // the literal set anyway.
                    let expected = Clause::new(expected.iter().copied())
                        .unwrap_or_else(|_| Clause::new([]).expect("empty"));
                    return Err(fail(
                        i,
                        StepError::BadConclusion {
                            expected,
                            found: clause.clone(),
                        },
                    ));
                }
            }
        }
    }
    let conclusion = proof.conclusion().expect("nonempty");
    Ok(ProofMeasures {
        size: proof.len(),
        width: proof.steps.iter().map(|s| s.clause().width()).max().unwrap_or(0),
        domain_width: proof
            .steps
            .iter()
            .map(|s| s.clause().domain_width())
            .max()
            .unwrap_or(0),
        tree_like: uses.iter().all(|&u| u <= 1),
        refutation: conclusion.is_empty(),
    })
}

/// [`check_proof`] that additionally requires the empty clause at the end.
pub fn check_refutation(
    f: &CnfFormula,
    proof: &ResolutionProof,
) -> Result<ProofMeasures, ProofError> {
    let m = check_proof(f, proof)?;
    if !m.refutation {
        return Err(ProofError::NotARefutation(
            proof.conclusion().expect("nonempty").clone(),
        ));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::vars::xor_var;

    fn unit(v: VarId, positive: bool) -> Clause {
        Clause::new([Lit::new(v, positive)]).unwrap()
    }

    #[test]
    fn two_unit_refutation() {
        let x = xor_var(1);
        let f: CnfFormula = [unit(x, true), unit(x, false)].into_iter().collect();
        let mut p = ResolutionProof::new();
        let a = p.axiom(unit(x, false));
        let b = p.axiom(unit(x, true));
        p.resolve(a, b, x);
        let m = check_refutation(&f, &p).unwrap();
        assert_eq!((m.size, m.width, m.tree_like), (3, 1, true));
        assert!(matches!(p.steps()[2], Step::Resolve { left: 1, right: 0, .. }));
    }

    #[test]
    fn rejections() {
        let (x, y) = (xor_var(1), xor_var(2));
        let xy = Clause::new([Lit::pos(x), Lit::pos(y)]).unwrap();
        let f: CnfFormula = [xy.clone(), unit(x, false)].into_iter().collect();

        let shrink = ResolutionProof::from_steps(vec![
            Step::Axiom(xy.clone()),
            Step::Weaken {
                src: 0,
                clause: unit(x, true),
            },
        ]);
        assert!(matches!(
            check_proof(&f, &shrink),
            Err(ProofError::Step {
                step: 2,
                error: StepError::BadWeakening { .. }
            })
        ));

        let unknown = ResolutionProof::from_steps(vec![Step::Axiom(unit(y, true))]);
        assert!(matches!(
            check_proof(&f, &unknown),
            Err(ProofError::Step {
                step: 1,
                error: StepError::UnknownAxiom(_)
            })
        ));

        let pivot = ResolutionProof::from_steps(vec![
            Step::Axiom(xy.clone()),
            Step::Axiom(unit(x, false)),
            Step::Resolve {
                left: 0,
                right: 1,
                pivot: y,
                clause: unit(x, true),
            },
        ]);
        assert!(matches!(
            check_proof(&f, &pivot),
            Err(ProofError::Step {
                step: 3,
                error: StepError::BadPivot { .. }
            })
        ));

        let wrong = ResolutionProof::from_steps(vec![
            Step::Axiom(xy.clone()),
            Step::Axiom(unit(x, false)),
            Step::Resolve {
                left: 0,
                right: 1,
                pivot: x,
                clause: Clause::empty(),
            },
        ]);
        assert!(matches!(
            check_proof(&f, &wrong),
            Err(ProofError::Step {
                step: 3,
                error: StepError::BadConclusion { .. }
            })
        ));

        let forward = ResolutionProof::from_steps(vec![Step::Weaken {
            src: 0,
            clause: xy.clone(),
        }]);
        assert!(matches!(
            check_proof(&f, &forward),
            Err(ProofError::Step { step: 1, .. })
        ));
        assert_eq!(check_proof(&f, &ResolutionProof::new()), Err(ProofError::Empty));

        let partial = ResolutionProof::from_steps(vec![Step::Axiom(xy)]);
        assert!(matches!(
            check_refutation(&f, &partial),
            Err(ProofError::NotARefutation(_))
        ));
    }

    #[test]
    fn reuse_breaks_tree_likeness() {
        let x = xor_var(1);
        let f: CnfFormula = [unit(x, true), unit(x, false)].into_iter().collect();
        let mut p = ResolutionProof::new();
        let a = p.axiom(unit(x, true));
        let b = p.axiom(unit(x, false));
        let e = p.resolve(a, b, x);
        p.weaken(e, Clause::empty());
        p.resolve(a, b, x);
        assert!(!check_refutation(&f, &p).unwrap().tree_like);
    }
}
