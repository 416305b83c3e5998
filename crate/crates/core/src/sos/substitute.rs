use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{ConstraintSystem, Poly, PolynomialConstraint, Relation, VarId};

use super::{check_certificate, EqualityTerm, InequalityTerm, SosCertificate, SosError, SquareSum};

/// Rewrites a certificate over `source` into one over `target` by applying
/// `sigma` to every polynomial and replacing each used axiom by its bridge,
/// a certificate over `target` deriving the substituted axiom.
///
/// Each image `sigma(v)` must be 0/1-valued (`σ(v)² = σ(v)` after
/// reduction) for the substituted identity to remain exact. Bridges are
/// checked; the output is not.
pub fn substitute_certificate(
    source: &ConstraintSystem,
    cert: &SosCertificate,
    sigma: &BTreeMap<VarId, Poly>,
    bridges: &BTreeMap<usize, SosCertificate>,
    target: &ConstraintSystem,
) -> Result<SosCertificate, SosError> {
    cert.products(source)?;
    let used: BTreeSet<usize> = cert
        .equality
        .iter()
        .map(|t| t.f)
        .chain(cert.inequality.iter().map(|t| t.h))
        .collect();
    for &i in &used {
        let b = bridges.get(&i).ok_or(SosError::MissingBridge(i))?;
        let expected = PolynomialConstraint {
            poly: source[i].poly.substitute(sigma),
            relation: source[i].relation,
        };
        if b.target != expected {
            return Err(SosError::BridgeMismatch {
                index: i,
                expected,
                found: b.target.clone(),
            });
        }
        check_certificate(target, b).map_err(|e| SosError::BadBridge {
            index: i,
            error: Box::new(e),
        })?;
    }

    let mut out = SosCertificate::new(PolynomialConstraint {
        poly: cert.target.poly.substitute(sigma),
        relation: cert.target.relation,
    });
    for t in &cert.equality {
        let g = t.g.substitute(sigma);
        if g.is_zero() {
            continue;
        }
        for e in &bridges[&t.f].equality {
            out.equality.push(EqualityTerm {
                g: &g * &e.g,
                f: e.f,
            });
        }
    }
    for t in &cert.inequality {
        let b = &bridges[&t.h];
        let qs: Vec<(Poly, _)> = t
            .u
            .iter()
            .map(|(q, w)| (q.substitute(sigma), w.clone()))
            .filter(|(q, _)| !q.is_zero())
            .collect();
        if qs.is_empty() {
            continue;
        }
        if !b.equality.is_empty() {
            let mut u = Poly::zero();
            for (q, w) in &qs {
                u.add_scaled(&q.square(), w);
            }
            for e in &b.equality {
                out.equality.push(EqualityTerm {
                    g: &u * &e.g,
                    f: e.f,
                });
            }
        }
        for bt in &b.inequality {
            out.inequality.push(InequalityTerm {
                u: products(&qs, &bt.u),
                h: bt.h,
            });
        }
        let free = products(&qs, &b.free);
        for (q, w) in free.q.into_iter().zip(free.w) {
            out.free.push(q, w);
        }
    }
    for (q, w) in cert.free.iter() {
        let q = q.substitute(sigma);
        if !q.is_zero() {
            out.free.push(q, w.clone());
        }
    }
    if out.target.relation == Relation::EqZero && !(out.inequality.is_empty() && out.free.is_empty()) {
        return Err(SosError::SquaresInEquality);
    }
    Ok(out)
}

/// `(Σ w q²)(Σ w' q'²) = Σ w w' (q q')²`.
fn products(qs: &[(Poly, crate::algebra::Rational)], b: &SquareSum) -> SquareSum {
    let mut out = SquareSum::new();
    for (q, w) in qs {
        for (q2, w2) in b.iter() {
            let p = q * q2;
            if !p.is_zero() {
                out.push(p, w * w2);
            }
        }
    }
    out
}

/// Bridge deriving `sys[i]` from itself.
#[cfg(test)]
pub(crate) fn identity_bridge(sys: &ConstraintSystem, i: usize) -> SosCertificate {
    let c = &sys[i];
    let mut b = SosCertificate::new(c.clone());
    match c.relation {
        Relation::EqZero => b.equality.push(EqualityTerm { g: Poly::one(), f: i }),
        Relation::GeqZero => b.inequality.push(InequalityTerm {
            u: SquareSum::of(vec![Poly::one()]),
            h: i,
        }),
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::vars::xor_var;
    use crate::sos::check_certificate;

    #[test]
    fn identity_substitution_keeps_certificate() {
        let x = xor_var(1);
        let sys = ConstraintSystem::new(vec![
            PolynomialConstraint::eq_zero(Poly::var(x)),
            PolynomialConstraint::geq_zero(&Poly::var(x) - &Poly::one()),
        ]);
        // −1 = −x + 1·(x − 1)
        let mut cert = SosCertificate::refutation();
        cert.equality.push(EqualityTerm { g: Poly::int(-1), f: 0 });
        cert.inequality.push(InequalityTerm { u: SquareSum::of(vec![Poly::one()]), h: 1 });
        check_certificate(&sys, &cert).unwrap();
        let bridges = (0..2).map(|i| (i, identity_bridge(&sys, i))).collect();
        let out = substitute_certificate(&sys, &cert, &BTreeMap::new(), &bridges, &sys).unwrap();
        assert_eq!(out, cert);
    }

    #[test]
    fn missing_and_wrong_bridges() {
        let (x, y) = (xor_var(1), xor_var(2));
        let sys = ConstraintSystem::new(vec![PolynomialConstraint::geq_zero(&Poly::var(x) - &Poly::one()), PolynomialConstraint::eq_zero(Poly::var(x))]);
        let mut cert = SosCertificate::refutation();
        cert.equality.push(EqualityTerm { g: Poly::int(-1), f: 1 });
        cert.inequality.push(InequalityTerm { u: SquareSum::of(vec![Poly::one()]), h: 0 });
        let sigma: BTreeMap<VarId, Poly> = [(x, Poly::var(y))].into();
        let bridges = BTreeMap::new();
        assert!(matches!(
            substitute_certificate(&sys, &cert, &sigma, &bridges, &sys),
            Err(SosError::MissingBridge(_))
        ));
        let bridges = (0..2).map(|i| (i, identity_bridge(&sys, i))).collect();
        assert!(matches!(
            substitute_certificate(&sys, &cert, &sigma, &bridges, &sys),
            Err(SosError::BridgeMismatch { .. })
        ));
        let renamed: ConstraintSystem = sys
            .iter()
            .map(|c| PolynomialConstraint { poly: c.poly.substitute(&sigma), relation: c.relation })
            .collect();
        let bridges = (0..2).map(|i| (i, identity_bridge(&renamed, i))).collect();
        let out = substitute_certificate(&sys, &cert, &sigma, &bridges, &renamed).unwrap();
        check_certificate(&renamed, &out).unwrap();
    }
}
