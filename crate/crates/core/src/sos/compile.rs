use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{encode_clause, falsifying_indicator, ConstraintSystem, Poly, Rational};
use crate::formulas::CnfFormula;
use crate::resolution::{check_refutation, ResolutionProof, Step};

use super::{InequalityTerm, SosCertificate, SosError, SquareSum};

/// The clause encodings of `f` in canonical clause order.
pub fn cnf_system(f: &CnfFormula) -> ConstraintSystem {
    f.clauses().iter().map(encode_clause).collect()
}

/// Simulates a resolution refutation by a certificate over [`cnf_system`].
///
/// Every line `D` stands for `−T_D ≥ 0`, `T_D` the indicator of the
/// assignments falsifying `D`, and is expanded in terms of its premises:
///
/// - axiom `C`: `−T_C = T_C² · encode(C)`;
/// - weakening `C ⊆ D`: `−T_D = −T_C + (T_C − T_D)²`;
/// - resolution of `P = A∨x`, `N = B∨¬x` into `R`:
///   `−T_R = −T_P − T_N + (T_P − T_R(1−x))² + (T_N − T_R·x)²`.
///
/// The squared differences are 0/1-valued, so each equals its own square.
/// Unrolling from the root, each line is used with weight equal to its
/// number of paths to the root. Degree at most `w+1`.
pub fn compile_resolution(
    f: &CnfFormula,
    proof: &ResolutionProof,
) -> Result<SosCertificate, SosError> {
    check_refutation(f, proof)?;
    let sys = cnf_system(f);
    let index: std::collections::HashMap<_, usize> = f
        .clauses()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();

    let steps = proof.steps();
    let mut weight = vec![BigInt::zero(); steps.len()];
    *weight.last_mut().expect("checked nonempty") = BigInt::one();
    for i in (0..steps.len()).rev() {
        if weight[i].is_zero() {
            continue;
        }
        for p in steps[i].premises() {
            let w = weight[i].clone();
            weight[p] += w;
        }
    }

    let mut cert = SosCertificate::refutation();
    for (i, s) in steps.iter().enumerate() {
        if weight[i].is_zero() {
            continue;
        }
        let w = Rational::from_integer(weight[i].clone());
        match s {
            Step::Axiom(c) => {
                let t = falsifying_indicator(c);
                cert.inequality.push(InequalityTerm {
                    u: SquareSum {
                        q: vec![t],
                        w: vec![w],
                    },
                    h: index[c],
                });
            }
            Step::Weaken { src, clause } => {
                let q = &falsifying_indicator(steps[*src].clause()) - &falsifying_indicator(clause);
                if !q.is_zero() {
                    cert.free.push(q, w);
                }
            }
            Step::Resolve {
                left,
                right,
                pivot,
                clause,
            } => {
                let tr = falsifying_indicator(clause);
                let x = Poly::var(*pivot);
                let q1 = &falsifying_indicator(steps[*left].clause()) - &(&tr * &Poly::not_var(*pivot));
                let q2 = &falsifying_indicator(steps[*right].clause()) - &(&tr * &x);
                for q in [q1, q2] {
                    if !q.is_zero() {
                        cert.free.push(q, w.clone());
                    }
                }
            }
        }
    }
    debug_assert_eq!(sys.len(), f.len());
    Ok(cert)
}
