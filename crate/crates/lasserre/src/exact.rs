use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use sosforge_core::algebra::{Poly, Rational};
use sosforge_core::sos::{check_certificate, EqualityTerm, InequalityTerm, SosCertificate, SosError, SquareSum};
use thiserror::Error;

use crate::{CoefficientSystem, SdpOutcome, Status};

/// Denominator used by [`extract_exact`].
pub const DEFAULT_DENOMINATOR: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExtractError {
    #[error("outcome is {0:?}, not feasible")]
    NotFeasible(Status),
    #[error("outcome does not match the coefficient system")]
    Shape,
    #[error("rounded point cannot be projected onto the affine constraints")]
    Projection,
    #[error("Gram block {block} is not PSD after rounding to denominator {denominator}")]
    NotPsd { block: usize, denominator: u64 },
    #[error("exact checker rejected the certificate: {0}")]
    Checker(SosError),
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(a: &mut [Vec<Rational>], b: &mut [Rational]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r][c..].iter_mut() {
            *v *= &inv;
        }
        b[r] *= &inv;
        let (top, br) = (a[r].clone(), b[r].clone());
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for (dst, src) in a[i][c..].iter_mut().zip(&top[c..]) {
                if !src.is_zero() {
                    *dst -= &f * src;
                }
            }
            b[i] -= &f * &br;
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Some solution of `a z = b` over the rationals (free unknowns set to 0).
pub(crate) fn solve_rational(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let pivots = rref(&mut a, &mut b);
    if b[pivots.len()..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut z = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        z[c] = b[i].clone();
    }
    Some(z)
}

/// A basis of `{x : a x = 0}`, each vector scaled to integers.
pub(crate) fn nullspace(mut a: Vec<Vec<Rational>>, cols: usize) -> Vec<Vec<Rational>> {
    let mut b = vec![Rational::zero(); a.len()];
    let pivots = rref(&mut a, &mut b);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Rational::zero(); cols];
        x[free] = Rational::one();
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = -a[i][free].clone();
        }
        let lcm = x.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        let scale = Rational::from_integer(lcm);
        out.push(x.into_iter().map(|v| v * &scale).collect());
    }
    out
}

fn round_to(v: f64, denom: u64) -> Rational {
    let n = (v * denom as f64).round();
    Rational::new(BigInt::from(n as i128), BigInt::from(denom))
}

/// `Q = L D Lᵀ` over the rationals; `None` if `Q` is not PSD. Returns the
/// columns of `L` with their pivots `D`, zero pivots dropped.
pub(crate) fn ldl(q: &[Vec<Rational>]) -> Option<Vec<(Vec<Rational>, Rational)>> {
    let n = q.len();
    let mut l = vec![vec![Rational::zero(); n]; n];
    let mut d = vec![Rational::zero(); n];
    for j in 0..n {
        let mut dj = q[j][j].clone();
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        if dj.is_negative() {
            return None;
        }
        l[j][j] = Rational::one();
        for i in j + 1..n {
            let mut v = q[i][j].clone();
            for k in 0..j {
                v -= &l[i][k] * &l[j][k] * &d[k];
            }
            if dj.is_zero() {
                if !v.is_zero() {
                    return None;
                }
            } else {
                l[i][j] = v / &dj;
            }
        }
        d[j] = dj;
    }
    Some(
        (0..n)
            .filter(|&j| !d[j].is_zero())
            .map(|j| ((0..n).map(|i| l[i][j].clone()).collect(), d[j].clone()))
            .collect(),
    )
}

fn equality_terms(cs: &CoefficientSystem, g: &[Rational]) -> Vec<EqualityTerm> {
    let mut out = Vec::new();
    let mut at = 0;
    for blk in &cs.eq_blocks {
        let mut p = Poly::zero();
        for m in &blk.basis {
            p += &Poly::monomial(m.clone(), g[at].clone());
            at += 1;
        }
        if !p.is_zero() {
            out.push(EqualityTerm { g: p, f: blk.constraint });
        }
    }
    out
}

/// An exact refutation built from a feasible numeric outcome.
///
/// A certificate using equalities only is found by solving the linear
/// system exactly. Otherwise the Gram blocks are clipped to their PSD part,
/// every unknown is rounded to a multiple of `1/denominator`, the rounded
/// point is projected exactly onto the affine constraints (minimum-norm
/// correction), and each Gram block is factored as `L D Lᵀ` over the
/// rationals. The result always passes the exact checker.
pub fn extract_exact(outcome: &SdpOutcome, cs: &CoefficientSystem) -> Result<SosCertificate, ExtractError> {
    extract_exact_with(outcome, cs, DEFAULT_DENOMINATOR)
}

pub fn extract_exact_with(
    outcome: &SdpOutcome,
    cs: &CoefficientSystem,
    denominator: u64,
) -> Result<SosCertificate, ExtractError> {
    if outcome.status != Status::Feasible {
        return Err(ExtractError::NotFeasible(outcome.status));
    }
    let blocks = &cs.gram_blocks;
    if outcome.g.len() != cs.num_g()
        || outcome.gram.len() != blocks.len()
        || outcome.gram.iter().zip(blocks).any(|(q, b)| q.len() != b.dim())
    {
        return Err(ExtractError::Shape);
    }
    let p = cs.num_rows();
    let check = |cert: SosCertificate| -> Result<SosCertificate, ExtractError> {
        check_certificate(&cs.system, &cert).map_err(ExtractError::Checker)?;
        Ok(cert)
    };

    let mut bmat = vec![vec![Rational::zero(); cs.num_g()]; p];
    for (c, col) in cs.eq_columns().iter().enumerate() {
        for (r, v) in col {
            bmat[*r][c] = v.clone();
        }
    }
    if let Some(g) = solve_rational(bmat.clone(), cs.target.clone()) {
        let mut cert = SosCertificate::refutation();
        cert.equality = equality_terms(cs, &g);
        return check(cert);
    }

    // Gram unknowns: the upper triangle of each block, clipped and rounded.
    let mut z0: Vec<Rational> = Vec::new();
    let mut cols: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut offsets = Vec::new();
    for (blk, q) in blocks.iter().zip(&outcome.gram) {
        let n = blk.dim();
        let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
        let eig = m.symmetric_eigen();
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        let m = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        let start = z0.len();
        offsets.push(start);
        let tri = |a: usize, b: usize| start + a * n - a * (a + 1) / 2 + b;
        for a in 0..n {
            for b in a..n {
                z0.push(round_to((m[(a, b)] + m[(b, a)]) / 2.0, denominator));
                cols.push(Vec::new());
            }
        }
        let two = Rational::from_integer(BigInt::from(2));
        for (r, a, b, c) in blk.entries() {
            let v = if a == b { c.clone() } else { c * &two };
            cols[tri(*a, *b)].push((*r, v));
        }
    }

    // Only the part of the residual outside the range of B constrains the
    // Gram entries. With N a basis of the left null space of B and
    // P = Nᵀ A, the minimum-norm correction is Pᵀ (P Pᵀ)⁻¹ Nᵀ r.
    let bt: Vec<Vec<Rational>> = (0..cs.num_g()).map(|c| bmat.iter().map(|row| row[c].clone()).collect()).collect();
    let null = if cs.num_g() == 0 {
        (0..p)
            .map(|i| (0..p).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect()
    } else {
        nullspace(bt, p)
    };
    let apply = |z: &[Rational]| {
        let mut out = cs.target.clone();
        for (col, zi) in cols.iter().zip(z) {
            if zi.is_zero() {
                continue;
            }
            for (r, v) in col {
                out[*r] -= v * zi;
            }
        }
        out
    };
    let resid = apply(&z0);
    let proj: Vec<Vec<Rational>> = null
        .iter()
        .map(|nv| {
            cols.iter()
                .map(|col| col.iter().map(|(r, v)| &nv[*r] * v).sum())
                .collect()
        })
        .collect();
    let s: Vec<Rational> = null.iter().map(|nv| nv.iter().zip(&resid).map(|(a, b)| a * b).sum()).collect();
    let k = null.len();
    let mut ppt = vec![vec![Rational::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            let v: Rational = proj[i].iter().zip(&proj[j]).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum();
            ppt[i][j] = v.clone();
            ppt[j][i] = v;
        }
    }
    let w = solve_rational(ppt, s).ok_or(ExtractError::Projection)?;
    let mut z = z0;
    for (i, wi) in w.iter().enumerate() {
        if wi.is_zero() {
            continue;
        }
        for (zj, pij) in z.iter_mut().zip(&proj[i]) {
            if !pij.is_zero() {
                *zj += pij * wi;
            }
        }
    }
    let g = solve_rational(bmat, apply(&z)).ok_or(ExtractError::Projection)?;

    let mut cert = SosCertificate::refutation();
    cert.equality = equality_terms(cs, &g);
    for (j, blk) in blocks.iter().enumerate() {
        let n = blk.dim();
        let start = offsets[j];
        let tri = |a: usize, b: usize| start + a * n - a * (a + 1) / 2 + b;
        let q: Vec<Vec<Rational>> = (0..n)
            .map(|a| (0..n).map(|b| z[tri(a.min(b), a.max(b))].clone()).collect())
            .collect();
        let factors = ldl(&q).ok_or(ExtractError::NotPsd { block: j, denominator })?;
        let mut u = SquareSum::new();
        for (col, d) in factors {
            let mut gen = Poly::zero();
            for (m, c) in blk.basis.iter().zip(col) {
                if !c.is_zero() {
                    gen += &Poly::monomial(m.clone(), c);
                }
            }
            u.push(gen, d);
        }
        if u.is_empty() {
            continue;
        }
        match blk.constraint {
            Some(h) => cert.inequality.push(InequalityTerm { u, h }),
            None => cert.free = u,
        }
    }
    check(cert)
}
