//! Exact multilinear polynomial arithmetic over the rationals.

mod poly;
mod system;
mod var;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use poly::{
    indicator_poly, multilinear_reduce, ratio, rational, Monomial, MultilinearPolynomial,
    PartialAssignment, Poly, Rational,
};
pub use system::ConstraintSystem;
pub use var::{vars, VarId, VarKind};

use crate::formulas::Clause;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("indicator needs one bit per variable ({vars} variables, {bits} bits)")]
    LengthMismatch { vars: usize, bits: usize },
    #[error("assignment does not cover variable {0}")]
    UncoveredVariable(VarId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "eq0")]
    EqZero,
    #[serde(rename = "ge0")]
    GeqZero,
}

/// `poly = 0` or `poly ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolynomialConstraint {
    pub poly: Poly,
    pub relation: Relation,
}

impl PolynomialConstraint {
    pub fn eq_zero(poly: Poly) -> Self {
        PolynomialConstraint {
            poly,
            relation: Relation::EqZero,
        }
    }

    pub fn geq_zero(poly: Poly) -> Self {
        PolynomialConstraint {
            poly,
            relation: Relation::GeqZero,
        }
    }

    /// `−1 ≥ 0`, the target of every refutation.
    pub fn contradiction() -> Self {
        Self::geq_zero(Poly::int(-1))
    }

    /// Whether a total assignment satisfies the constraint.
    pub fn holds(&self, value: impl Fn(VarId) -> Option<bool>) -> Result<bool, AlgebraError> {
        let v = self.poly.eval(value)?;
        Ok(match self.relation {
            Relation::EqZero => num_traits::Zero::is_zero(&v),
            Relation::GeqZero => !num_traits::Signed::is_negative(&v),
        })
    }
}

impl fmt::Display for PolynomialConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.relation {
            Relation::EqZero => write!(f, "{} = 0", self.poly),
            Relation::GeqZero => write!(f, "{} >= 0", self.poly),
        }
    }
}

/// Clause `C` as `Σ_{x∈C⁺} x + Σ_{¬x∈C⁻} (1 − x) − 1 ≥ 0`.
pub fn encode_clause(c: &Clause) -> PolynomialConstraint {
    let mut p = Poly::int(-1);
    for lit in c.lits() {
        let term = if lit.positive {
            Poly::var(lit.var)
        } else {
            Poly::not_var(lit.var)
        };
        p = &p + &term;
    }
    PolynomialConstraint::geq_zero(p)
}

/// Indicator of the assignments falsifying `c`: `Π_{x∈C⁺}(1−x) · Π_{¬x∈C⁻} x`.
pub fn falsifying_indicator(c: &Clause) -> Poly {
    let vars: Vec<VarId> = c.lits().iter().map(|l| l.var).collect();
    let bits: Vec<bool> = c.lits().iter().map(|l| !l.positive).collect();
    indicator_poly(&vars, &bits).expect("one bit per literal")
}

pub fn restrict_poly(p: &Poly, rho: &PartialAssignment) -> Poly {
    p.restrict(rho)
}

pub fn eval_poly(p: &Poly, alpha: &PartialAssignment) -> Result<Rational, AlgebraError> {
    p.eval_map(alpha)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use num_traits::{One, Signed, Zero};
    use proptest::prelude::*;

    use super::*;
    use crate::formulas::Lit;

    fn x(i: u32) -> VarId {
        vars::xor_var(i)
    }

    fn assignment(vs: &[VarId], bits: u64) -> PartialAssignment {
        vs.iter()
            .enumerate()
            .map(|(i, &v)| (v, bits >> i & 1 == 1))
            .collect()
    }

    #[test]
    fn reduce_collapses_exponents() {
        let p = multilinear_reduce([(vec![x(1), x(1)], rational(1))]);
        assert_eq!(p, Poly::var(x(1)));

        // (1 - x)^2 expanded = 1 - 2x + x^2
        let p = multilinear_reduce([
            (vec![], rational(1)),
            (vec![x(1)], rational(-2)),
            (vec![x(1), x(1)], rational(1)),
        ]);
        assert_eq!(p, Poly::not_var(x(1)));

        let p = multilinear_reduce([(vec![x(1), x(2), x(2), x(3)], rational(1))]);
        assert_eq!(p, Poly::monomial(Monomial::from_vars([x(1), x(2), x(3)]), rational(1)));
        assert!(multilinear_reduce([(vec![x(1)], rational(0))]).is_zero());
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(indicator_poly(&[x(1)], &[true]).unwrap(), Poly::var(x(1)));
        let expected: Poly = "1 * x_2 + -1 * x_1*x_2".parse().unwrap();
        assert_eq!(indicator_poly(&[x(1), x(2)], &[false, true]).unwrap(), expected);
        assert!(matches!(
            indicator_poly(&[x(1)], &[true, false]),
            Err(AlgebraError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn indicator_completeness_up_to_twelve() {
        for w in 0..=12u32 {
            let vs: Vec<VarId> = (1..=w).map(x).collect();
            let total: Poly = (0..1u64 << w)
                .map(|b| {
                    let bits: Vec<bool> = (0..w).map(|i| b >> i & 1 == 1).collect();
                    indicator_poly(&vs, &bits).unwrap()
                })
                .sum();
            assert_eq!(total, Poly::one(), "width {w}");
        }
    }

    #[test]
    fn indicator_evaluates_to_point_mass() {
        let vs: Vec<VarId> = (1..=4).map(x).collect();
        for target in 0..16u64 {
            let bits: Vec<bool> = (0..4).map(|i| target >> i & 1 == 1).collect();
            let p = indicator_poly(&vs, &bits).unwrap();
            for a in 0..16u64 {
                let v = eval_poly(&p, &assignment(&vs, a)).unwrap();
                assert_eq!(v, if a == target { Rational::one() } else { Rational::zero() });
            }
        }
    }

    #[test]
    fn clause_encodings() {
        let c = Clause::new([Lit::pos(x(1)), Lit::neg(x(2))]).unwrap();
        let enc = encode_clause(&c);
        assert_eq!(enc.relation, Relation::GeqZero);
        assert_eq!(enc.poly, "1 * x_1 + -1 * x_2".parse().unwrap());

        assert_eq!(encode_clause(&Clause::empty()).poly, Poly::int(-1));
        let unit = Clause::new([Lit::pos(x(1))]).unwrap();
        assert_eq!(encode_clause(&unit).poly, "-1 + 1 * x_1".parse().unwrap());
    }

    #[test]
    fn clause_encoding_matches_satisfaction_exhaustively() {
        // Every clause over up to six variables with every sign pattern.
        for w in 0..=6u32 {
            let vs: Vec<VarId> = (1..=w).map(x).collect();
            for signs in 0..1u64 << w {
                let c = Clause::new(
                    vs.iter()
                        .enumerate()
                        .map(|(i, &v)| Lit::new(v, signs >> i & 1 == 1)),
                )
                .unwrap();
                let enc = encode_clause(&c);
                for a in 0..1u64 << w {
                    let alpha = assignment(&vs, a);
                    let sat = c.lits().iter().any(|l| alpha[&l.var] == l.positive);
                    assert_eq!(enc.holds(|v| alpha.get(&v).copied()).unwrap(), sat);
                }
            }
        }
    }

    #[test]
    fn restriction_examples() {
        let xy = &Poly::var(x(1)) * &Poly::var(x(2));
        let one: PartialAssignment = [(x(1), true)].into();
        let zero: PartialAssignment = [(x(1), false)].into();
        assert_eq!(restrict_poly(&xy, &one), Poly::var(x(2)));
        assert!(restrict_poly(&xy, &zero).is_zero());
        let sum = &Poly::var(x(1)) + &Poly::var(x(2));
        assert_eq!(restrict_poly(&sum, &one), &Poly::one() + &Poly::var(x(2)));
    }

    #[test]
    fn eval_reports_uncovered_variable() {
        let p = &Poly::var(x(1)) * &Poly::var(x(2));
        let alpha: PartialAssignment = [(x(1), true), (x(2), true)].into();
        assert_eq!(eval_poly(&p, &alpha).unwrap(), Rational::one());
        let partial: PartialAssignment = [(x(1), true)].into();
        assert_eq!(eval_poly(&p, &partial), Err(AlgebraError::UncoveredVariable(x(2))));
    }

    #[test]
    fn substitution_and_text() {
        let p: Poly = "2 + -1/3 * x_1*x_2 + 1 * x_d1_4".parse().unwrap();
        let back: Poly = p.to_string().parse().unwrap();
        assert_eq!(p, back);
        let images: BTreeMap<VarId, Poly> = [(x(1), Poly::not_var(x(2)))].into();
        // x1*x2 -> (1 - x2) x2 = 0
        let q = p.substitute(&images);
        assert_eq!(q, "2 + 1 * x_d1_4".parse().unwrap());
    }

    fn arb_poly(nvars: u32) -> impl Strategy<Value = Poly> {
        let term = (
            proptest::collection::vec(1..=nvars, 0..4),
            -5i64..=5,
            1i64..=4,
        );
        proptest::collection::vec(term, 0..6).prop_map(|ts| {
            multilinear_reduce(
                ts.into_iter()
                    .map(|(vs, n, d)| (vs.into_iter().map(x).collect::<Vec<_>>(), ratio(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn restrict_and_eval_commute(p in arb_poly(6), rho_mask in 0u64..64, rho_bits in 0u64..64, rest in 0u64..64) {
            let vs: Vec<VarId> = (1..=6).map(x).collect();
            let mut rho = PartialAssignment::new();
            let mut alpha = PartialAssignment::new();
            for (i, &v) in vs.iter().enumerate() {
                if rho_mask >> i & 1 == 1 {
                    rho.insert(v, rho_bits >> i & 1 == 1);
                } else {
                    alpha.insert(v, rest >> i & 1 == 1);
                }
            }
            let mut full = alpha.clone();
            full.extend(rho.iter().map(|(k, v)| (*k, *v)));
            prop_assert_eq!(
                eval_poly(&restrict_poly(&p, &rho), &alpha).unwrap(),
                eval_poly(&p, &full).unwrap()
            );
        }

        #[test]
        fn text_round_trip(p in arb_poly(5)) {
            let back: Poly = p.to_string().parse().unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn boolean_valued_polys_are_idempotent(table in 0u64..(1 << 16)) {
            // Build the unique multilinear form of a random 0/1 function on 4
            // variables as a sum of indicators, then square it.
            let vs: Vec<VarId> = (1..=4).map(x).collect();
            let p: Poly = (0..16u64)
                .filter(|b| table >> b & 1 == 1)
                .map(|b| {
                    let bits: Vec<bool> = (0..4).map(|i| b >> i & 1 == 1).collect();
                    indicator_poly(&vs, &bits).unwrap()
                })
                .sum();
            prop_assert_eq!(p.square(), p);
        }
    }

    #[test]
    fn boolean_valued_idempotence_on_twelve_variables() {
        // Products of literals and indicators of random subsets stay 0/1 valued.
        let vs: Vec<VarId> = (1..=12).map(x).collect();
        let a = indicator_poly(&vs[..6], &[true, false, true, true, false, false]).unwrap();
        let b = indicator_poly(&vs[6..], &[false; 6]).unwrap();
        let p = &(&Poly::one() - &a) * &b;
        assert_eq!(p.square(), p);
        for bits in (0..1u64 << 12).step_by(97) {
            let v = eval_poly(&p, &assignment(&vs, bits)).unwrap();
            assert!(v.is_zero() || v.is_one());
            assert!(!v.is_negative());
        }
    }
}
