use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::algebra::{multilinear_reduce, ConstraintSystem, Poly, PolynomialConstraint, Rational, VarId};

use super::{EqualityTerm, InequalityTerm, SosCertificate, SosError, SosMeasures, SquareSum};

/// Power product, sorted by variable, exponents ≥ 1.
pub type PowerProduct = Vec<(VarId, u32)>;

/// Polynomial with arbitrary exponents. Only used as input to
/// [`multilinearize_certificate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneralPoly {
    terms: BTreeMap<PowerProduct, Rational>,
}

impl GeneralPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_terms([(Vec::new(), c)])
    }

    /// `x^e`.
    pub fn power(x: VarId, e: u32) -> Self {
        if e == 0 {
            return Self::constant(Rational::from_integer(1.into()));
        }
        Self::from_terms([(vec![(x, e)], Rational::from_integer(1.into()))])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PowerProduct, Rational)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(normalize(m), c);
        }
        p
    }

    fn add_term(&mut self, m: PowerProduct, c: Rational) {
        let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PowerProduct, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&(_, e)| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn domain_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.iter().filter_map(|(v, _)| v.domain_index()).collect::<BTreeSet<_>>().len())
            .max()
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &GeneralPoly) -> GeneralPoly {
        let mut out = GeneralPoly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut m = a.clone();
                m.extend(b.iter().copied());
                out.add_term(normalize(m), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> GeneralPoly {
        GeneralPoly::from_terms(self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn add(&self, other: &GeneralPoly) -> GeneralPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Replaces every `x^e` by `x`.
    pub fn multilinearize(&self) -> Poly {
        multilinear_reduce(
            self.terms
                .iter()
                .map(|(m, c)| (m.iter().map(|&(v, _)| v).collect::<Vec<_>>(), c.clone())),
        )
    }
}

impl From<&Poly> for GeneralPoly {
    fn from(p: &Poly) -> Self {
        GeneralPoly::from_terms(
            p.terms()
                .map(|(m, c)| (m.vars().iter().map(|&v| (v, 1)).collect(), c.clone())),
        )
    }
}

fn normalize(mut m: PowerProduct) -> PowerProduct {
    m.sort_by_key(|&(v, _)| v);
    let mut out: PowerProduct = Vec::with_capacity(m.len());
    for (v, e) in m {
        match out.last_mut() {
            Some((w, f)) if *w == v => *f += e,
            _ if e > 0 => out.push((v, e)),
            _ => {}
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneralSquareSum {
    pub q: Vec<GeneralPoly>,
    pub w: Vec<Rational>,
}

impl GeneralSquareSum {
    fn value(&self) -> GeneralPoly {
        self.q
            .iter()
            .zip(&self.w)
            .fold(GeneralPoly::zero(), |acc, (q, w)| acc.add(&q.mul(q).scale(w)))
    }

    fn multilinearize(&self) -> SquareSum {
        SquareSum {
            q: self.q.iter().map(GeneralPoly::multilinearize).collect(),
            w: self.w.clone(),
        }
    }
}

/// A certificate whose multipliers may carry exponents above one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralCertificate {
    pub equality: Vec<(GeneralPoly, usize)>,
    pub inequality: Vec<(GeneralSquareSum, usize)>,
    pub free: GeneralSquareSum,
    pub target: PolynomialConstraint,
}

impl GeneralCertificate {
    /// Measures of the expanded products, exponents counted in the degree.
    pub fn measures(&self, sys: &ConstraintSystem) -> Result<SosMeasures, SosError> {
        let mut products = Vec::new();
        for (g, f) in &self.equality {
            let c = sys.get(*f).ok_or(SosError::IndexOutOfRange { index: *f, len: sys.len() })?;
            products.push(g.mul(&GeneralPoly::from(&c.poly)));
        }
        for (u, h) in &self.inequality {
            let c = sys.get(*h).ok_or(SosError::IndexOutOfRange { index: *h, len: sys.len() })?;
            products.push(u.value().mul(&GeneralPoly::from(&c.poly)));
        }
        if !self.free.q.is_empty() {
            products.push(self.free.value());
        }
        Ok(SosMeasures {
            degree: products.iter().map(GeneralPoly::degree).max().unwrap_or(0),
            size: products.iter().map(GeneralPoly::num_terms).sum(),
            domain_degree: products.iter().map(GeneralPoly::domain_degree).max().unwrap_or(0),
        })
    }
}

/// Applies `x^e ↦ x` to every multiplier and generator. Since this is a ring
/// map modulo `x² = x`, an identity over the boolean cube is preserved and
/// neither size nor degree grows.
pub fn multilinearize_certificate(cert: &GeneralCertificate) -> SosCertificate {
    SosCertificate {
        equality: cert
            .equality
            .iter()
            .map(|(g, f)| EqualityTerm { g: g.multilinearize(), f: *f })
            .collect(),
        inequality: cert
            .inequality
            .iter()
            .map(|(u, h)| InequalityTerm { u: u.multilinearize(), h: *h })
            .collect(),
        free: cert.free.multilinearize(),
        target: cert.target.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::vars::xor_var;
    use crate::algebra::{rational, PolynomialConstraint};
    use crate::sos::{check_certificate, measure_certificate};
    use proptest::prelude::*;

    #[test]
    fn square_generator_collapses() {
        let x = xor_var(1);
        let g = GeneralPoly::power(x, 2);
        assert_eq!(g.multilinearize(), Poly::var(x));
        let p = Poly::var(x);
        assert_eq!(GeneralPoly::from(&p).multilinearize(), p);
    }

    #[test]
    fn multilinear_certificate_is_unchanged() {
        let x = xor_var(1);
        let c = GeneralCertificate {
            equality: vec![],
            inequality: vec![],
            free: GeneralSquareSum { q: vec![GeneralPoly::from(&Poly::not_var(x))], w: vec![rational(1)] },
            target: PolynomialConstraint::geq_zero(Poly::not_var(x)),
        };
        let m = multilinearize_certificate(&c);
        assert_eq!(m.free, SquareSum::of(vec![Poly::not_var(x)]));
        check_certificate(&ConstraintSystem::default(), &m).unwrap();
    }

    fn general_poly() -> impl Strategy<Value = GeneralPoly> {
        prop::collection::vec(
            (prop::collection::vec((1u32..5, 1u32..4), 0..3), -3i64..4),
            0..4,
        )
        .prop_map(|terms| {
            GeneralPoly::from_terms(
                terms
                    .into_iter()
                    .map(|(m, c)| (m.into_iter().map(|(v, e)| (xor_var(v), e)).collect(), rational(c))),
            )
        })
    }

    proptest! {
        #[test]
        fn multilinearizing_never_grows(
            gs in prop::collection::vec(general_poly(), 0..3),
            qs in prop::collection::vec(general_poly(), 0..3),
            free in prop::collection::vec(general_poly(), 0..3),
        ) {
            let x = |i| Poly::var(xor_var(i));
            let sys = ConstraintSystem::new(vec![
                PolynomialConstraint::eq_zero(&x(1) - &x(2)),
                PolynomialConstraint::geq_zero(&(&Poly::one() - &x(3)) - &x(4)),
            ]);
            let w = |n: usize| vec![rational(1); n];
            let cert = GeneralCertificate {
                equality: gs.into_iter().map(|g| (g, 0)).collect(),
                inequality: vec![(GeneralSquareSum { w: w(qs.len()), q: qs }, 1)],
                free: GeneralSquareSum { w: w(free.len()), q: free },
                target: PolynomialConstraint::contradiction(),
            };
            let before = cert.measures(&sys).unwrap();
            let after = measure_certificate(&sys, &multilinearize_certificate(&cert)).unwrap();
            prop_assert!(after.degree <= before.degree);
            prop_assert!(after.size <= before.size);
            prop_assert!(after.domain_degree <= before.domain_degree);
        }
    }
}
