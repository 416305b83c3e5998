use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::var::VarId;
use super::AlgebraError;
use crate::error::ParseError;

pub type Rational = BigRational;

/// Partial 0/1 assignment.
pub type PartialAssignment = BTreeMap<VarId, bool>;

pub fn rational(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Sorted set of distinct variables.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<VarId>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![v])
    }

    /// Collapses repeated variables (x·x = x).
    pub fn from_vars(vars: impl IntoIterator<Item = VarId>) -> Self {
        let mut v: Vec<VarId> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Monomial(v)
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain_degree(&self) -> usize {
        let mut seen: Vec<u32> = self.0.iter().filter_map(|v| v.domain_index()).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Product reduced modulo x² = x.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact multilinear polynomial: the ring of rational polynomials modulo the
/// ideal generated by `x² − x` for every variable.
///
/// Terms are kept in canonical (lexicographic monomial) order with no zero
/// coefficients, so structural equality is polynomial identity.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct MultilinearPolynomial {
    terms: BTreeMap<Monomial, Rational>,
}

pub type Poly = MultilinearPolynomial;

impl MultilinearPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rational(c))
    }

    pub fn var(v: VarId) -> Self {
        Self::monomial(Monomial::var(v), Rational::one())
    }

    /// `1 − v`.
    pub fn not_var(v: VarId) -> Self {
        &Self::one() - &Self::var(v)
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value, if the polynomial has no non-constant monomial.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn domain_degree(&self) -> usize {
        self.terms
            .keys()
            .map(Monomial::domain_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms
            .keys()
            .flat_map(|m| m.vars().iter().copied())
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultilinearPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Exact value under an assignment covering every variable.
    pub fn eval(&self, value: impl Fn(VarId) -> Option<bool>) -> Result<Rational, AlgebraError> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut on = true;
            for &v in m.vars() {
                match value(v) {
                    Some(true) => {}
                    Some(false) => {
                        on = false;
                        break;
                    }
                    None => return Err(AlgebraError::UncoveredVariable(v)),
                }
            }
            if on {
                total += c;
            }
        }
        Ok(total)
    }

    /// Same as [`eval`](Self::eval) with the assignment given as a map.
    pub fn eval_map(&self, alpha: &PartialAssignment) -> Result<Rational, AlgebraError> {
        self.eval(|v| alpha.get(&v).copied())
    }

    /// Substitutes assigned variables and drops monomials that vanish.
    pub fn restrict(&self, rho: &PartialAssignment) -> Self {
        let mut out = Self::zero();
        'terms: for (m, c) in &self.terms {
            let mut kept = Vec::with_capacity(m.degree());
            for &v in m.vars() {
                match rho.get(&v) {
                    Some(true) => {}
                    Some(false) => continue 'terms,
                    None => kept.push(v),
                }
            }
            out.add_term(Monomial(kept), c.clone());
        }
        out
    }

    /// Replaces each mapped variable by its image and reduces. Unmapped
    /// variables are left in place.
    pub fn substitute(&self, images: &BTreeMap<VarId, MultilinearPolynomial>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut prod = Self::constant(c.clone());
            let mut kept = Vec::new();
            for &v in m.vars() {
                match images.get(&v) {
                    Some(img) => {
                        prod = &prod * img;
                        if prod.is_zero() {
                            break;
                        }
                    }
                    None => kept.push(v),
                }
            }
            if !kept.is_empty() && !prod.is_zero() {
                prod = &prod * &Self::monomial(Monomial(kept), Rational::one());
            }
            out += &prod;
        }
        out
    }

    /// Renames variables through `f`; monomials are re-reduced.
    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(Monomial::from_vars(m.vars().iter().map(|&v| f(v))), c.clone());
        }
        out
    }
}

/// Collapses every exponent to one, merges equal monomials and drops zeros.
pub fn multilinear_reduce<I, V>(raw_terms: I) -> MultilinearPolynomial
where
    I: IntoIterator<Item = (V, Rational)>,
    V: IntoIterator<Item = VarId>,
{
    let mut p = MultilinearPolynomial::zero();
    for (vars, c) in raw_terms {
        p.add_term(Monomial::from_vars(vars), c);
    }
    p
}

/// Expanded product of `x` (bit 1) or `1 − x` (bit 0) factors: equals one on
/// exactly the assignment `bits` and zero elsewhere.
pub fn indicator_poly(vars: &[VarId], bits: &[bool]) -> Result<MultilinearPolynomial, AlgebraError> {
    if vars.len() != bits.len() {
        return Err(AlgebraError::LengthMismatch {
            vars: vars.len(),
            bits: bits.len(),
        });
    }
    let mut p = MultilinearPolynomial::one();
    for (&v, &b) in vars.iter().zip(bits) {
        let factor = if b {
            MultilinearPolynomial::var(v)
        } else {
            MultilinearPolynomial::not_var(v)
        };
        p = &p * &factor;
    }
    Ok(p)
}

impl Add for &MultilinearPolynomial {
    type Output = MultilinearPolynomial;

    fn add(self, rhs: Self) -> MultilinearPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::AddAssign<&MultilinearPolynomial> for MultilinearPolynomial {
    fn add_assign(&mut self, rhs: &MultilinearPolynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl MultilinearPolynomial {
    /// `self += c · p` without an intermediate polynomial.
    pub fn add_scaled(&mut self, p: &MultilinearPolynomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &p.terms {
            self.add_term(m.clone(), v * c);
        }
    }
}

impl Sub for &MultilinearPolynomial {
    type Output = MultilinearPolynomial;

    fn sub(self, rhs: Self) -> MultilinearPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &MultilinearPolynomial {
    type Output = MultilinearPolynomial;

    fn neg(self) -> MultilinearPolynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &MultilinearPolynomial {
    type Output = MultilinearPolynomial;

    fn mul(self, rhs: Self) -> MultilinearPolynomial {
        let mut out = MultilinearPolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl std::iter::Sum for MultilinearPolynomial {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut out = MultilinearPolynomial::zero();
        for p in iter {
            for (m, c) in p.terms {
                out.add_term(m, c);
            }
        }
        out
    }
}

/// Canonical text: `coef * v1*v2*...` terms joined by ` + `, the constant
/// term written as a bare coefficient, rationals as `p/q`, zero as `0`.
impl fmt::Display for MultilinearPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} * {m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultilinearPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for MultilinearPolynomial {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut p = MultilinearPolynomial::zero();
        if s == "0" {
            return Ok(p);
        }
        for term in s.split(" + ") {
            let term = term.trim();
            let (coef, mono) = match term.split_once(" * ") {
                Some((c, m)) => (c.trim(), Some(m.trim())),
                None => (term, None),
            };
            let c: Rational = coef
                .parse()
                .map_err(|_| ParseError::new(format!("bad coefficient `{coef}`")))?;
            let vars = match mono {
                None => Vec::new(),
                Some(m) => m
                    .split('*')
                    .map(|v| v.trim().parse::<VarId>())
                    .collect::<Result<Vec<_>, _>>()?,
            };
            p.add_term(Monomial::from_vars(vars), c);
        }
        Ok(p)
    }
}
