//! Degree-bounded search for sums-of-squares refutations.
//!
//! A degree-`d` refutation `−1 = Σ g_i f_i + Σ u_j h_j + u_0` is linear in
//! the coefficients of the `g_i` and in Gram matrices `Q` with
//! `u = vᵀ Q v`, `Q ⪰ 0`. [`build_coefficient_system`] assembles that
//! linear map exactly, [`solve_feasibility`] solves the resulting
//! semidefinite feasibility problem numerically, and [`extract_exact`]
//! turns a numeric solution into a certificate for the exact checker.

mod exact;
mod sdp;
mod search;

use std::collections::HashMap;

use num_traits::{One, Zero};
use sosforge_core::algebra::{ConstraintSystem, Monomial, Rational, Relation, VarId};
use thiserror::Error;

pub use exact::{extract_exact, extract_exact_with, ExtractError, DEFAULT_DENOMINATOR};
pub use sdp::{solve_feasibility, SdpOutcome, SolveOptions, Status};
pub use search::{min_degree, DegreeSearch, DegreeStep, MinDegree};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LasserreError {
    #[error("degree {d} is below the largest constraint degree {needed}")]
    DegreeTooSmall { d: usize, needed: usize },
}

/// Multiplier `g_i = Σ c_m m` of an equality, `m` ranging over `basis`.
#[derive(Clone, Debug)]
pub struct EqBlock {
    pub constraint: usize,
    pub basis: Vec<Monomial>,
}

/// Gram block of `u_j` (against inequality `constraint`) or of `u_0`.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub constraint: Option<usize>,
    pub basis: Vec<Monomial>,
    /// `(row, a, b, c)` with `a ≤ b`: the coefficient of `rows[row]` in
    /// `v_a v_b h` is `c`.
    entries: Vec<(usize, usize, usize, Rational)>,
}

impl GramBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn entries(&self) -> &[(usize, usize, usize, Rational)] {
        &self.entries
    }
}

/// The linear system of a degree-`d` refutation, indexed by the multilinear
/// monomials of degree at most `d` over the variables of the system.
#[derive(Clone, Debug)]
pub struct CoefficientSystem {
    pub degree: usize,
    pub system: ConstraintSystem,
    pub rows: Vec<Monomial>,
    pub eq_blocks: Vec<EqBlock>,
    pub gram_blocks: Vec<GramBlock>,
    /// Constraints left out because their degree exceeds `d`.
    pub dropped: Vec<usize>,
    /// Coefficients of the target `−1` per row.
    pub target: Vec<Rational>,
    /// Sparse columns of the `g` coefficients, in block order.
    eq_columns: Vec<Vec<(usize, Rational)>>,
}

impl CoefficientSystem {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_g(&self) -> usize {
        self.eq_columns.len()
    }

    pub(crate) fn eq_columns(&self) -> &[Vec<(usize, Rational)>] {
        &self.eq_columns
    }
}

/// `Σ_{i≤d} C(n, i)`.
pub fn basis_size(n: usize, d: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for i in 0..=d.min(n) {
        total += c;
        c = c * (n - i) / (i + 1);
    }
    total
}

/// Every multilinear monomial of degree at most `d` over `vars`, by degree.
pub fn monomials_up_to(vars: &[VarId], d: usize) -> Vec<Monomial> {
    fn extend(vars: &[VarId], start: usize, left: usize, cur: &mut Vec<VarId>, out: &mut Vec<Vec<VarId>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..vars.len() {
            cur.push(vars[i]);
            extend(vars, i + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=d.min(vars.len()) {
        let mut sets = Vec::new();
        extend(vars, 0, deg, &mut Vec::new(), &mut sets);
        out.extend(sets.into_iter().map(Monomial::from_vars));
    }
    out
}

/// Exact coefficient system for degree `d`. Every constraint must fit.
pub fn build_coefficient_system(
    sys: &ConstraintSystem,
    d: usize,
) -> Result<CoefficientSystem, LasserreError> {
    let needed = sys.max_degree();
    if d < needed {
        return Err(LasserreError::DegreeTooSmall { d, needed });
    }
    Ok(build_truncated_system(sys, d))
}

/// As [`build_coefficient_system`], leaving out constraints of degree above
/// `d`. Multiples of such a constraint are not searched.
pub fn build_truncated_system(sys: &ConstraintSystem, d: usize) -> CoefficientSystem {
    let vars: Vec<VarId> = sys.vars().into_iter().collect();
    let rows = monomials_up_to(&vars, d);
    let index: HashMap<Monomial, usize> = rows.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();

    let mut eq_blocks = Vec::new();
    let mut eq_columns = Vec::new();
    let mut gram_blocks = Vec::new();
    let mut dropped = Vec::new();
    for (ci, c) in sys.iter().enumerate() {
        let deg = c.poly.degree();
        if deg > d {
            dropped.push(ci);
            continue;
        }
        match c.relation {
            Relation::EqZero => {
                let basis = monomials_up_to(&vars, d - deg);
                for m in &basis {
                    let mut col: HashMap<usize, Rational> = HashMap::new();
                    for (fm, fc) in c.poly.terms() {
                        *col.entry(index[&m.mul(fm)]).or_insert_with(Rational::zero) += fc;
                    }
                    let mut col: Vec<(usize, Rational)> = col.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                    col.sort_by_key(|&(r, _)| r);
                    eq_columns.push(col);
                }
                eq_blocks.push(EqBlock { constraint: ci, basis });
            }
            Relation::GeqZero => {
                let basis = monomials_up_to(&vars, (d - deg) / 2);
                gram_blocks.push(gram_block(Some(ci), basis, &c.poly, &index));
            }
        }
    }
    let basis = monomials_up_to(&vars, d / 2);
    gram_blocks.push(gram_block(None, basis, &sosforge_core::algebra::Poly::one(), &index));

    let mut target = vec![Rational::zero(); rows.len()];
    target[0] = -Rational::one();
    CoefficientSystem {
        degree: d,
        system: sys.clone(),
        rows,
        eq_blocks,
        gram_blocks,
        dropped,
        target,
        eq_columns,
    }
}

fn gram_block(
    constraint: Option<usize>,
    basis: Vec<Monomial>,
    h: &sosforge_core::algebra::Poly,
    index: &HashMap<Monomial, usize>,
) -> GramBlock {
    let mut entries = Vec::new();
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let vv = basis[a].mul(&basis[b]);
            let mut acc: HashMap<usize, Rational> = HashMap::new();
            for (hm, hc) in h.terms() {
                *acc.entry(index[&vv.mul(hm)]).or_insert_with(Rational::zero) += hc;
            }
            let mut acc: Vec<_> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            acc.sort_by_key(|&(r, _)| r);
            entries.extend(acc.into_iter().map(|(r, c)| (r, a, b, c)));
        }
    }
    GramBlock { constraint, basis, entries }
}
