use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sosforge_core::sos::SosCertificate;

use crate::CoefficientSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol_eq: f64,
    pub tol_psd: f64,
    pub max_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_eq: 1e-8,
            tol_psd: 1e-8,
            max_iters: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpOutcome {
    pub status: Status,
    pub degree: usize,
    /// Row labels: the monomial basis of degree at most `degree`.
    pub rows: Vec<String>,
    /// `g` coefficients, in the order of the equality blocks.
    pub g: Vec<f64>,
    /// One Gram matrix per block, the free block last.
    pub gram: Vec<Vec<Vec<f64>>>,
    /// `‖Σ g f + Σ u h + u₀ + 1‖_∞` at the best primal point, if any.
    pub residual: Option<f64>,
    pub min_eigenvalues: Vec<f64>,
    /// For `Infeasible`: a functional on `rows` with value 1 at the constant
    /// monomial, vanishing on every `m·f` for equalities `f`, and with PSD
    /// moment matrix on every Gram block.
    pub evidence: Option<Vec<f64>>,
    pub iterations: usize,
    /// Optimal slack `t` of the auxiliary problem and its dual bound.
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub message: String,
    #[serde(skip)]
    pub certificate: Option<SosCertificate>,
}

/// Constraint `i` of the reduced problem: one symmetric matrix per block,
/// the last block being the 1×1 slack `t`.
type Op = Vec<Vec<DMatrix<f64>>>;

struct Problem {
    dims: Vec<usize>,
    a: Op,
    b: DVector<f64>,
    /// Maps a reduced dual vector to a functional on the rows.
    lift: DMatrix<f64>,
    c: Vec<DMatrix<f64>>,
}

fn inner(a: &[DMatrix<f64>], x: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a.dot(x)).sum()
}

fn op(a: &Op, x: &[DMatrix<f64>]) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().map(|ai| inner(ai, x)))
}

fn op_adj(a: &Op, dims: &[usize], y: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for (ai, &yi) in a.iter().zip(y.iter()) {
        for (o, m) in out.iter_mut().zip(ai) {
            *o += m * yi;
        }
    }
    out
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigenvalues().min()
}

/// Largest `α` with `x + α d ⪰ 0`, given `x ≻ 0`.
fn max_step(x: &[DMatrix<f64>], d: &[DMatrix<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (x, d) in x.iter().zip(d) {
        if x.is_empty() {
            continue;
        }
        let l = x.clone().cholesky()?.l();
        let a1 = l.solve_lower_triangular(d)?;
        let t = l.solve_lower_triangular(&a1.transpose())?;
        let lmin = sym(&t).symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Some(alpha)
}

/// Cholesky factor of `m`, adding a growing multiple of the identity when
/// `m` is numerically singular.
fn regularized_cholesky(m: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..6 {
        let shifted = &m + DMatrix::identity(n, n) * shift;
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    None
}

/// Numeric matrices `A_k` of every row `k` on every Gram block.
fn row_matrices(cs: &CoefficientSystem) -> Vec<Vec<DMatrix<f64>>> {
    let p = cs.num_rows();
    let mut out: Vec<Vec<DMatrix<f64>>> = (0..p)
        .map(|_| cs.gram_blocks.iter().map(|g| DMatrix::zeros(g.dim(), g.dim())).collect())
        .collect();
    for (j, blk) in cs.gram_blocks.iter().enumerate() {
        for (r, a, b, c) in blk.entries() {
            let v = c.to_f64().unwrap_or(f64::NAN);
            out[*r][j][(*a, *b)] = v;
            out[*r][j][(*b, *a)] = v;
        }
    }
    out
}

fn eq_matrix(cs: &CoefficientSystem) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(cs.num_rows(), cs.num_g());
    for (col, entries) in cs.eq_columns().iter().enumerate() {
        for (r, c) in entries {
            b[(*r, col)] = c.to_f64().unwrap_or(f64::NAN);
        }
    }
    b
}

/// Eigenvectors of a PSD matrix with eigenvalue above `rel · λ_max`
/// (`keep_large`) or at most that (`!keep_large`), with their eigenvalues.
fn split_spectrum(m: DMatrix<f64>, rel: f64, keep_large: bool) -> (DMatrix<f64>, Vec<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    let eig = m.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    let idx: Vec<usize> = (0..n)
        .filter(|&i| (eig.eigenvalues[i] > rel * scale) == keep_large)
        .collect();
    let mut v = DMatrix::zeros(n, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        v.set_column(c, &eig.eigenvectors.column(i));
    }
    (v, idx.iter().map(|&i| eig.eigenvalues[i]).collect())
}

/// Eliminates `g` by projecting the rows onto the left null space of `B`,
/// appends the slack `t` (so `X = I, t = 1` is feasible), and whitens the
/// constraints into an independent, orthonormal set.
fn reduce(cs: &CoefficientSystem, rows: &[Vec<DMatrix<f64>>], bmat: &DMatrix<f64>) -> Problem {
    let p = cs.num_rows();
    let target = DVector::from_iterator(p, cs.target.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)));
    let null = if cs.num_g() == 0 {
        DMatrix::identity(p, p)
    } else {
        let range = thin_svd(bmat).0;
        let proj = DMatrix::identity(p, p) - &range * range.transpose();
        let eig = proj.symmetric_eigen();
        let keep: Vec<usize> = (0..p).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let mut null = DMatrix::zeros(p, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            null.set_column(c, &eig.eigenvectors.column(i));
        }
        null
    };
    let mut dims: Vec<usize> = cs.gram_blocks.iter().map(|g| g.dim()).collect();
    dims.push(1);
    let r0 = null.ncols();
    let mut a: Op = Vec::with_capacity(r0);
    for i in 0..r0 {
        let mut blocks: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for k in 0..p {
            let w = null[(k, i)];
            if w != 0.0 {
                for (blk, m) in blocks.iter_mut().zip(&rows[k]) {
                    *blk += m * w;
                }
            }
        }
        a.push(blocks);
    }
    let b0 = null.transpose() * &target;
    for (ai, bi) in a.iter_mut().zip(b0.iter()) {
        let tr: f64 = ai.iter().map(|m| m.trace()).sum();
        let last = ai.len() - 1;
        ai[last][(0, 0)] = bi - tr;
    }

    // Whiten with the SVD of the stacked constraint rows.
    let len: usize = dims.iter().map(|n| n * n).sum();
    let mut stacked = DMatrix::zeros(len, r0);
    for (i, ai) in a.iter().enumerate() {
        let mut at = 0;
        for m in ai {
            for v in m.iter() {
                stacked[(at, i)] = *v;
                at += 1;
            }
        }
    }
    let white = if r0 == 0 {
        DMatrix::zeros(0, 0)
    } else {
        let (_, sigma, mut w) = thin_svd(&stacked);
        for (c, s) in sigma.iter().enumerate() {
            w.column_mut(c).scale_mut(1.0 / s);
        }
        w
    };
    let a_new: Op = (0..white.ncols())
        .map(|c| {
            let mut blocks: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
            for i in 0..r0 {
                let w = white[(i, c)];
                if w != 0.0 {
                    for (blk, m) in blocks.iter_mut().zip(&a[i]) {
                        *blk += m * w;
                    }
                }
            }
            blocks
        })
        .collect();
    let b = white.transpose() * b0;
    let mut c: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    let last = c.len() - 1;
    c[last][(0, 0)] = 1.0;
    Problem {
        dims,
        a: a_new,
        b,
        lift: null * white,
        c,
    }
}

/// Thin SVD `a = U Σ Vᵀ` over singular values above `1e-6 σ_max`, from
/// the eigendecomposition of `aᵀa`.
fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (v, lambda) = split_spectrum(a.transpose() * a, 1e-12, true);
    let sigma: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
    let mut u = a * &v;
    for (c, s) in sigma.iter().enumerate() {
        u.column_mut(c).scale_mut(1.0 / s);
    }
    (u, sigma, v)
}

/// Minimum-norm least-squares solution.
fn lstsq(a: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let (u, sigma, v) = thin_svd(a);
    let mut out = DVector::zeros(a.ncols());
    for (i, s) in sigma.iter().enumerate() {
        out += v.column(i) * (u.column(i).dot(rhs) / s);
    }
    out
}

struct Candidate {
    g: DVector<f64>,
    gram: Vec<DMatrix<f64>>,
    residual: f64,
    min_eigs: Vec<f64>,
}

/// Over-relaxation of the projection step.
const RELAX: f64 = 1.8;

struct Ctx<'a> {
    cs: &'a CoefficientSystem,
    rows: Vec<Vec<DMatrix<f64>>>,
    bmat: DMatrix<f64>,
    prob: Problem,
    opts: &'a SolveOptions,
}

impl Ctx<'_> {
    fn moments(&self, l: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> =
            self.cs.gram_blocks.iter().map(|b| DMatrix::zeros(b.dim(), b.dim())).collect();
        for (k, lk) in l.iter().enumerate() {
            if *lk != 0.0 {
                for (m, a) in out.iter_mut().zip(&self.rows[k]) {
                    *m += a * *lk;
                }
            }
        }
        out
    }

    /// Turns an approximate minimizer `(X, t)` into a solution of the
    /// original system: `X' = (X − tI)/(1 − t)` satisfies the reduced
    /// constraints, and `g` is recovered by least squares.
    fn polish(&self, x: &[DMatrix<f64>]) -> Option<Candidate> {
        let n = x.len() - 1;
        let t = x[n][(0, 0)];
        if t >= 1.0 {
            return None;
        }
        let gram: Vec<DMatrix<f64>> = x[..n]
            .iter()
            .map(|m| (m - DMatrix::identity(m.nrows(), m.ncols()) * t) / (1.0 - t))
            .collect();
        let p = self.cs.num_rows();
        let mut rhs = DVector::from_iterator(p, self.cs.target.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)));
        for k in 0..p {
            rhs[k] -= inner(&self.rows[k], &gram);
        }
        let g = if self.cs.num_g() == 0 { DVector::zeros(0) } else { lstsq(&self.bmat, &rhs) };
        let res = if self.cs.num_g() == 0 { rhs } else { rhs - &self.bmat * &g };
        Some(Candidate {
            residual: res.amax(),
            min_eigs: gram.iter().map(min_eig).collect(),
            g,
            gram,
        })
    }

    fn accept(&self, x: &[DMatrix<f64>], out: &mut SdpOutcome) -> bool {
        let Some(c) = self.polish(x) else {
            return false;
        };
        out.residual = Some(c.residual);
        out.min_eigenvalues = c.min_eigs.clone();
        let ok = c.residual <= self.opts.tol_eq && c.min_eigs.iter().all(|&e| e >= -self.opts.tol_psd);
        if ok {
            out.status = Status::Feasible;
            out.g = c.g.iter().copied().collect();
            out.gram = c
                .gram
                .iter()
                .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
                .collect();
        }
        ok
    }

    /// `L = −lift·y` scaled to `L(1) = 1`, if `L(1) > 0`.
    fn functional(&self, y: &DVector<f64>) -> Option<DVector<f64>> {
        let l = -(&self.prob.lift * y);
        (l[0] > 1e-9 * l.amax()).then(|| &l / l[0])
    }

    /// How far `L` is from certifying infeasibility, in units of the
    /// tolerances; at most 1 means it certifies.
    fn violation(&self, l: &DVector<f64>) -> f64 {
        let size = l.amax().max(1.0);
        let eq = if self.cs.num_g() == 0 {
            0.0
        } else {
            (self.bmat.transpose() * l).amax() / (self.opts.tol_eq * size)
        };
        let psd = self
            .moments(l)
            .iter()
            .map(|m| -min_eig(m) / (self.opts.tol_psd * size))
            .fold(0.0, f64::max);
        eq.max(psd)
    }

    /// Alternating projections between the PSD moment matrices and the
    /// affine set `{Bᵀ L = 0, L(1) = 1}`.
    fn repair(&self, mut l: DVector<f64>) -> DVector<f64> {
        let lift = &self.prob.lift;
        let r = lift.ncols();
        if r == 0 {
            return l;
        }
        let n0 = lift.row(0).transpose();
        let keep = if n0.norm() > 0.0 {
            let proj = DMatrix::identity(r, r) - &n0 * n0.transpose() / n0.norm_squared();
            let eig = proj.symmetric_eigen();
            let idx: Vec<usize> = (0..r).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
            let mut k = DMatrix::zeros(r, idx.len());
            for (c, &i) in idx.iter().enumerate() {
                k.set_column(c, &eig.eigenvectors.column(i));
            }
            k
        } else {
            DMatrix::identity(r, r)
        };
        let dirs = lift * keep;
        let len: usize = self.cs.gram_blocks.iter().map(|b| b.dim() * b.dim()).sum();
        let mut map = DMatrix::zeros(len, dirs.ncols());
        for c in 0..dirs.ncols() {
            let col: Vec<f64> = self.moments(&dirs.column(c).into_owned()).iter().flat_map(|m| m.iter().copied()).collect();
            map.set_column(c, &DVector::from_vec(col));
        }
        let (u, sigma, v) = thin_svd(&map);
        let margin = 0.25 * self.opts.tol_psd;
        let mut best = (self.violation(&l), l.clone());
        for _ in 0..1000 {
            let diff: Vec<f64> = self
                .moments(&l)
                .into_iter()
                .flat_map(|m| {
                    let eig = m.clone().symmetric_eigen();
                    let clipped = eig.eigenvalues.map(|e| e.max(margin));
                    let p = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
                    (p - m).iter().copied().collect::<Vec<_>>()
                })
                .collect();
            let diff = DVector::from_vec(diff);
            let mut z = DVector::zeros(dirs.ncols());
            for (i, s) in sigma.iter().enumerate() {
                z += v.column(i) * (u.column(i).dot(&diff) / s);
            }
            l += &dirs * (z * RELAX);
            let viol = self.violation(&l);
            if viol < best.0 {
                best = (viol, l.clone());
            }
            if viol <= 0.5 {
                break;
            }
        }
        best.1
    }
}

/// Decides whether the coefficient system has a PSD solution, by minimizing
/// the slack `t` in `𝒜(X) + t(b − 𝒜(I)) = b` with a primal-dual
/// interior-point method (HKM direction, Mehrotra predictor-corrector).
pub fn solve_feasibility(cs: &CoefficientSystem, opts: &SolveOptions) -> SdpOutcome {
    let rows = row_matrices(cs);
    let bmat = eq_matrix(cs);
    let prob = reduce(cs, &rows, &bmat);
    let ctx = Ctx { cs, rows, bmat, prob, opts };
    let prob = &ctx.prob;
    let dims = prob.dims.clone();
    let nb = dims.len();
    let total: usize = dims.iter().sum();

    let mut out = SdpOutcome {
        status: Status::Unknown,
        degree: cs.degree,
        rows: cs.rows.iter().map(|m| m.to_string()).collect(),
        g: Vec::new(),
        gram: Vec::new(),
        residual: None,
        min_eigenvalues: Vec::new(),
        evidence: None,
        iterations: 0,
        primal_objective: 1.0,
        dual_objective: 0.0,
        message: String::new(),
        certificate: None,
    };

    let r = prob.a.len();
    let mut x: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::identity(n, n)).collect();
    if r == 0 {
        for m in &mut x {
            m.fill(0.0);
        }
        out.primal_objective = 0.0;
        ctx.accept(&x, &mut out);
        out.message = "no constraints after eliminating equalities".into();
        return out;
    }
    let mut s = x.clone();
    let mut y = DVector::zeros(r);
    let bnorm = 1.0 + prob.b.norm();
    let mut best: Option<(f64, DVector<f64>)> = None;

    for it in 0..opts.max_iters {
        out.iterations = it + 1;
        let rp = &prob.b - op(&prob.a, &x);
        let aty = op_adj(&prob.a, &dims, &y);
        let rd: Vec<DMatrix<f64>> = (0..nb).map(|j| &prob.c[j] - &s[j] - &aty[j]).collect();
        let mu = inner(&x, &s) / total as f64;
        let t = x[nb - 1][(0, 0)];
        let dobj = prob.b.dot(&y);
        let pinf = rp.norm() / bnorm;
        let dinf = rd.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        out.primal_objective = t;
        out.dual_objective = dobj;

        if t <= opts.tol_psd * 1e-2 && pinf <= opts.tol_eq && ctx.accept(&x, &mut out) {
            out.message = format!("slack driven to {t:.3e}");
            return out;
        }
        if dobj > 0.0 {
            if let Some(l) = ctx.functional(&y) {
                let v = ctx.violation(&l);
                if v <= 1.0 {
                    out.status = Status::Infeasible;
                    out.evidence = Some(l.iter().copied().collect());
                    out.message = format!("dual bound {dobj:.3e} on the slack");
                    return out;
                }
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, l));
                }
            }
        }
        if mu < 1e-13 && pinf < 1e-11 && dinf < 1e-11 {
            out.message = format!("converged with slack {t:.3e}");
            break;
        }

        // Schur complement M_il = Σ tr(A_i X A_l S⁻¹).
        let Some(sinv) = s.iter().map(|m| m.clone().try_inverse().map(|v| sym(&v))).collect::<Option<Vec<_>>>()
        else {
            out.message = format!("dual iterate became singular at iteration {}", it + 1);
            break;
        };
        let w: Vec<Vec<DMatrix<f64>>> = prob
            .a
            .iter()
            .map(|ai| (0..nb).map(|j| &x[j] * &ai[j] * &sinv[j]).collect())
            .collect();
        let mut mmat = DMatrix::zeros(r, r);
        for i in 0..r {
            for l in i..r {
                let v = inner(&prob.a[l], &w[i]);
                mmat[(i, l)] = v;
                mmat[(l, i)] = v;
            }
        }
        let Some(chol) = regularized_cholesky(mmat) else {
            out.message = format!("Schur complement lost definiteness at iteration {}", it + 1);
            break;
        };
        let xrs: Vec<DMatrix<f64>> = (0..nb).map(|j| &x[j] * &rd[j] * &sinv[j]).collect();

        // `corr` is the second-order term ΔX_aff ΔS_aff of the predictor.
        let direction = |sigma: f64, corr: Option<&[DMatrix<f64>]>| {
            let centre: Vec<DMatrix<f64>> = (0..nb)
                .map(|j| match corr {
                    Some(c) => (DMatrix::identity(dims[j], dims[j]) * (sigma * mu) - &c[j]) * &sinv[j],
                    None => &sinv[j] * (sigma * mu),
                })
                .collect();
            let target: Vec<DMatrix<f64>> = (0..nb).map(|j| &centre[j] - &x[j] - &xrs[j]).collect();
            let rhs = &rp - op(&prob.a, &target);
            let dy = chol.solve(&rhs);
            let atdy = op_adj(&prob.a, &dims, &dy);
            let ds: Vec<DMatrix<f64>> = (0..nb).map(|j| &rd[j] - &atdy[j]).collect();
            let dx: Vec<DMatrix<f64>> = (0..nb)
                .map(|j| sym(&(&centre[j] - &x[j] - &x[j] * &ds[j] * &sinv[j])))
                .collect();
            (dx, dy, ds)
        };
        let steps = |dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]| -> Option<(f64, f64)> {
            Some((
                (0.95 * max_step(&x, dx)?).min(1.0),
                (0.95 * max_step(&s, ds)?).min(1.0),
            ))
        };

        let (dxa, _, dsa) = direction(0.0, None);
        let Some((ap, ad)) = steps(&dxa, &dsa) else {
            out.message = format!("iterate left the cone at iteration {}", it + 1);
            break;
        };
        let xa: Vec<DMatrix<f64>> = (0..nb).map(|j| &x[j] + &dxa[j] * ap).collect();
        let sa: Vec<DMatrix<f64>> = (0..nb).map(|j| &s[j] + &dsa[j] * ad).collect();
        let mu_aff = inner(&xa, &sa) / total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr: Vec<DMatrix<f64>> = (0..nb).map(|j| &dxa[j] * &dsa[j]).collect();

        let (dx, dy, ds) = direction(sigma, Some(&corr));
        let Some((ap, ad)) = steps(&dx, &ds) else {
            out.message = format!("iterate left the cone at iteration {}", it + 1);
            break;
        };
        for j in 0..nb {
            x[j] += &dx[j] * ap;
            s[j] += &ds[j] * ad;
        }
        y += dy * ad;
    }
    if out.message.is_empty() {
        out.message = format!("stopped after {} iterations", out.iterations);
    }

    if ctx.accept(&x, &mut out) {
        return out;
    }
    if let Some((_, l)) = best {
        let l = ctx.repair(l);
        if ctx.violation(&l) <= 1.0 {
            out.status = Status::Infeasible;
            out.evidence = Some(l.iter().copied().collect());
            out.message.push_str("; dual functional repaired");
        }
    }
    out
}
