//! Sums-of-squares certificates `p = Σ g_i f_i + Σ u_j h_j + u_0` with an
//! exact checker, measures, and certificate transformations.

mod bridges;
mod compile;
mod general;
mod json;
mod substitute;

use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::algebra::{ConstraintSystem, Poly, PolynomialConstraint, Rational, Relation};
use crate::formulas::FormulaError;
use crate::resolution::ProofError;

pub use bridges::{
    clique_to_block_bridges, derive_block_bridge, derive_functional_bridge, transform_block_to_xor,
    transform_clique_to_block, xor_bridges,
};
pub use compile::{cnf_system, compile_resolution};
pub use general::{multilinearize_certificate, GeneralCertificate, GeneralPoly, GeneralSquareSum};
pub use json::{certificate_from_json, certificate_to_json};
pub use substitute::substitute_certificate;

/// `Σ_i w_i q_i²` with nonnegative rational weights, stored by generators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SquareSum {
    pub q: Vec<Poly>,
    pub w: Vec<Rational>,
}

impl SquareSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unit weights.
    pub fn of(q: Vec<Poly>) -> Self {
        let w = vec![Rational::one(); q.len()];
        SquareSum { q, w }
    }

    pub fn push(&mut self, q: Poly, w: Rational) {
        self.q.push(q);
        self.w.push(w);
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Poly, &Rational)> {
        self.q.iter().zip(self.w.iter())
    }

    /// The expanded polynomial `Σ w q²`.
    pub fn value(&self) -> Poly {
        let mut out = Poly::zero();
        for (q, w) in self.iter() {
            out.add_scaled(&q.square(), w);
        }
        out
    }

    fn validate(&self) -> Result<(), SosError> {
        if self.q.len() != self.w.len() {
            return Err(SosError::WeightCount {
                generators: self.q.len(),
                weights: self.w.len(),
            });
        }
        if let Some(w) = self.w.iter().find(|w| w.is_negative()) {
            return Err(SosError::NegativeWeight(w.clone()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityTerm {
    pub g: Poly,
    pub f: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityTerm {
    pub u: SquareSum,
    pub h: usize,
}

/// Derivation of `target` from a constraint system. A target with relation
/// `EqZero` must be a pure equality combination (no square terms).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosCertificate {
    pub equality: Vec<EqualityTerm>,
    pub inequality: Vec<InequalityTerm>,
    pub free: SquareSum,
    pub target: PolynomialConstraint,
}

impl SosCertificate {
    pub fn new(target: PolynomialConstraint) -> Self {
        SosCertificate {
            equality: Vec::new(),
            inequality: Vec::new(),
            free: SquareSum::new(),
            target,
        }
    }

    /// A certificate whose target is `−1 ≥ 0`.
    pub fn refutation() -> Self {
        Self::new(PolynomialConstraint::contradiction())
    }

    pub fn is_refutation(&self) -> bool {
        self.target == PolynomialConstraint::contradiction()
    }

    /// Every product `g_i f_i`, `u_j h_j`, `u_0`, expanded.
    pub fn products(&self, sys: &ConstraintSystem) -> Result<Vec<Poly>, SosError> {
        self.validate_indices(sys)?;
        let mut out = Vec::with_capacity(self.equality.len() + self.inequality.len() + 1);
        for t in &self.equality {
            out.push(&t.g * &sys[t.f].poly);
        }
        for t in &self.inequality {
            out.push(&t.u.value() * &sys[t.h].poly);
        }
        if !self.free.is_empty() {
            out.push(self.free.value());
        }
        Ok(out)
    }

    fn validate_indices(&self, sys: &ConstraintSystem) -> Result<(), SosError> {
        for t in &self.equality {
            match sys.get(t.f) {
                None => return Err(SosError::IndexOutOfRange { index: t.f, len: sys.len() }),
                Some(c) if c.relation != Relation::EqZero => {
                    return Err(SosError::WrongRelation { index: t.f, expected: Relation::EqZero })
                }
                _ => {}
            }
        }
        for t in &self.inequality {
            match sys.get(t.h) {
                None => return Err(SosError::IndexOutOfRange { index: t.h, len: sys.len() }),
                Some(c) if c.relation != Relation::GeqZero => {
                    return Err(SosError::WrongRelation { index: t.h, expected: Relation::GeqZero })
                }
                _ => {}
            }
            t.u.validate()?;
        }
        self.free.validate()?;
        if self.target.relation == Relation::EqZero
            && (!self.inequality.is_empty() || !self.free.is_empty())
        {
            return Err(SosError::SquaresInEquality);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosMeasures {
    pub degree: usize,
    /// Monomials of the expanded products, counted with repetition.
    pub size: usize,
    pub domain_degree: usize,
}

impl fmt::Display for SosMeasures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "degree={} size={} domain_degree={}",
            self.degree, self.size, self.domain_degree
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SosError {
    #[error("constraint index {index} out of range (system has {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("constraint {index} is not of relation {expected:?}")]
    WrongRelation { index: usize, expected: Relation },
    #[error("{generators} generators but {weights} weights")]
    WeightCount { generators: usize, weights: usize },
    #[error("negative square weight {0}")]
    NegativeWeight(Rational),
    #[error("an equality target admits no square terms")]
    SquaresInEquality,
    #[error("identity fails; residual (certificate minus target) is {residual}")]
    Identity { residual: Poly },
    #[error("no bridge for constraint {0}")]
    MissingBridge(usize),
    #[error("bridge for constraint {index} is rejected: {error}")]
    BadBridge { index: usize, error: Box<SosError> },
    #[error("bridge for constraint {index} derives {found} instead of {expected}")]
    BridgeMismatch {
        index: usize,
        expected: PolynomialConstraint,
        found: PolynomialConstraint,
    },
    #[error("vertices {0} and {1} are adjacent")]
    Adjacent(usize, usize),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Degree, size and domain-degree of the expanded products.
pub fn measure_certificate(
    sys: &ConstraintSystem,
    cert: &SosCertificate,
) -> Result<SosMeasures, SosError> {
    Ok(measure_products(&cert.products(sys)?))
}

fn measure_products(products: &[Poly]) -> SosMeasures {
    SosMeasures {
        degree: products.iter().map(Poly::degree).max().unwrap_or(0),
        size: products.iter().map(Poly::num_terms).sum(),
        domain_degree: products.iter().map(Poly::domain_degree).max().unwrap_or(0),
    }
}

/// Accepts iff the certificate's products sum exactly to the target
/// polynomial.
pub fn check_certificate(
    sys: &ConstraintSystem,
    cert: &SosCertificate,
) -> Result<SosMeasures, SosError> {
    let products = cert.products(sys)?;
    let mut residual = -&cert.target.poly;
    for p in &products {
        residual += p;
    }
    if !residual.is_zero() {
        return Err(SosError::Identity { residual });
    }
    Ok(measure_products(&products))
}
