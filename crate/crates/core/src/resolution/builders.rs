use std::collections::BTreeMap;

use crate::algebra::{vars, VarId};
use crate::formulas::{
    generalize_domain, relativize_template, subsets, Clause, FormulaError, Graph, Lit,
    SymmetricTemplate,
};

use super::{check_refutation, lift_proof, ResolutionError, ResolutionProof};

/// Tree-like refutation of the brute-force gadget over chains `y_{i,·}` with
/// choice variables `x_{i,j}`. For a prefix tuple `t` of length `i−1` the
/// node derives `N(t) = ¬x_{1,t_1} ∨ … ∨ ¬x_{i−1,t_{i−1}}` by walking the
/// `i`-th chain; `leaf` derives `N(t)` for complete tuples, and for shorter
/// ones when it returns `Some`.
fn gadget_refutation(
    p: &mut ResolutionProof,
    m: &[u32],
    y: &impl Fn(u32, u32) -> VarId,
    x: &impl Fn(u32, u32) -> VarId,
    leaf: &mut impl FnMut(&mut ResolutionProof, &[u32]) -> Option<usize>,
) -> Result<usize, ResolutionError> {
    fn node(
        p: &mut ResolutionProof,
        m: &[u32],
        t: &mut Vec<u32>,
        y: &impl Fn(u32, u32) -> VarId,
        x: &impl Fn(u32, u32) -> VarId,
        leaf: &mut impl FnMut(&mut ResolutionProof, &[u32]) -> Option<usize>,
    ) -> Result<usize, ResolutionError> {
        if let Some(id) = leaf(p, t) {
            return Ok(id);
        }
        assert!(t.len() < m.len(), "no clause for the complete tuple {t:?}");
        let i = t.len() as u32 + 1;
        let chain = |j: u32| {
            Clause::new([Lit::neg(y(i, j - 1)), Lit::pos(x(i, j)), Lit::pos(y(i, j))])
                .expect("distinct chain variables")
        };
        let start = p.axiom(Clause::new([Lit::pos(y(i, 0))]).expect("unit"));
        let first = p.axiom(chain(1));
        let mut cur = p.resolve(start, first, y(i, 0));
        for j in 1..=m[i as usize - 1] {
            if j > 1 {
                let c = p.axiom(chain(j));
                cur = p.resolve(cur, c, y(i, j - 1));
            }
            t.push(j);
            let child = node(p, m, t, y, x, leaf)?;
            t.pop();
            cur = p.resolve(cur, child, x(i, j));
        }
        let end = p.axiom(Clause::new([Lit::neg(y(i, m[i as usize - 1]))]).expect("unit"));
        Ok(p.resolve(cur, end, y(i, m[i as usize - 1])))
    }
    node(p, m, &mut Vec::new(), y, x, leaf)
}

fn tuple_clause(t: &[u32], x: impl Fn(u32, u32) -> VarId) -> Clause {
    Clause::negations(t.iter().enumerate().map(|(i, &j)| x(i as u32 + 1, j)))
}

/// Tree-like refutation of the brute-force gadget with `m_i` choices for
/// index `i`. Width `k+1`.
pub fn build_bruteforce_refutation(m: &[u32]) -> Result<ResolutionProof, ResolutionError> {
    if m.is_empty() || m.contains(&0) {
        return Err(FormulaError::InvalidParameters("gadget needs k >= 1 and every m_i >= 1".into()).into());
    }
    let mut p = ResolutionProof::new();
    gadget_refutation(&mut p, m, &vars::gadget_y, &vars::gadget_x, &mut |p, t| {
        (t.len() == m.len()).then(|| p.axiom(tuple_clause(t, vars::gadget_x)))
    })?;
    Ok(p)
}

/// A `k`-clique of `g` as vertex indices, if one exists.
pub fn find_clique(g: &Graph, k: usize) -> Option<Vec<usize>> {
    fn extend(g: &Graph, k: usize, cur: &mut Vec<usize>, start: usize) -> bool {
        if cur.len() == k {
            return true;
        }
        for v in start..g.num_vertices() {
            if cur.iter().all(|&u| g.adjacent(u, v)) {
                cur.push(v);
                if extend(g, k, cur, v + 1) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    let mut cur = Vec::new();
    extend(g, k, &mut cur, 0).then_some(cur)
}

/// Refutation of the `k`-clique formula of a graph with no `k`-clique: the
/// gadget over the z-chains, where each vertex tuple's clause is a weakening
/// of a non-edge clause between two of its positions.
pub fn build_clique_refutation(g: &Graph, k: u32) -> Result<ResolutionProof, ResolutionError> {
    if k == 0 {
        return Err(FormulaError::InvalidParameters("k must be positive".into()).into());
    }
    if let Some(c) = find_clique(g, k as usize) {
        return Err(ResolutionError::HasClique(
            c.iter().map(|&v| g.label(v).to_string()).collect(),
        ));
    }
    let n = g.num_vertices() as u32;
    let x = |i: u32, j: u32| vars::clique_x(i, j);
    let mut p = ResolutionProof::new();
    gadget_refutation(
        &mut p,
        &vec![n; k as usize],
        &vars::clique_z,
        &x,
        &mut |p, t| {
            // Stop at the first prefix that already contains a non-edge.
            let last = t.len().checked_sub(1)?;
            let a = (0..last).find(|&a| t[a] == t[last] || !g.adjacent(t[a] as usize - 1, t[last] as usize - 1))?;
            let axiom = Clause::negations([x(a as u32 + 1, t[a]), x(last as u32 + 1, t[last])]);
            let target = tuple_clause(t, x);
            let id = p.axiom(axiom.clone());
            Some(if axiom == target { id } else { p.weaken(id, target) })
        },
    )?;
    Ok(p)
}

/// Shared threshold closure. `select(D)` must return a step deriving
/// `⋁_{ι∈D} ¬s_ι` for each `k`-subset `D` (sorted).
fn threshold_closure(
    p: &mut ResolutionProof,
    k: u32,
    m: u32,
    select: &mut impl FnMut(&mut ResolutionProof, &[u32]) -> usize,
) -> Result<usize, ResolutionError> {
    gadget_refutation(
        p,
        &vec![m; k as usize],
        &vars::thr_y,
        &vars::thr_p,
        &mut |p, t| {
            if t.len() < k as usize {
                return None;
            }
            let target = tuple_clause(t, vars::thr_p);
            let repeat = (0..t.len())
                .flat_map(|a| (a + 1..t.len()).map(move |b| (a, b)))
                .find(|&(a, b)| t[a] == t[b]);
            if let Some((a, b)) = repeat {
                let ax = Clause::negations([
                    vars::thr_p(a as u32 + 1, t[a]),
                    vars::thr_p(b as u32 + 1, t[b]),
                ]);
                let id = p.axiom(ax.clone());
                return Some(if ax == target { id } else { p.weaken(id, target) });
            }
            let mut d = t.to_vec();
            d.sort_unstable();
            let mut cur = select(p, &d);
            // Trade each ¬s_ι for ¬p_{a,ι} via ¬p_{a,ι} ∨ s_ι.
            for (a, &iota) in t.iter().enumerate() {
                let count = p.axiom(
                    Clause::new([
                        Lit::neg(vars::thr_p(a as u32 + 1, iota)),
                        Lit::pos(vars::selector(iota)),
                    ])
                    .expect("distinct variables"),
                );
                cur = p.resolve(count, cur, vars::selector(iota));
            }
            Some(cur)
        },
    )
}

/// Refutation of the threshold formula together with every clause
/// `⋁_{ι∈D} ¬s_ι`, `|D| = k`. Width `k+1`.
pub fn build_threshold_refutation(k: u32, m: u32) -> Result<ResolutionProof, ResolutionError> {
    if k == 0 || k > m {
        return Err(FormulaError::InvalidParameters(format!(
            "threshold needs 1 <= k <= m, got k={k}, m={m}"
        ))
        .into());
    }
    let mut p = ResolutionProof::new();
    threshold_closure(&mut p, k, m, &mut |p, d| {
        p.axiom(Clause::negations(d.iter().map(|&i| vars::selector(i))))
    })?;
    Ok(p)
}

/// Refutation of the relativization of `template` with parameters `(k, m)`,
/// given a refutation `inner` of its instance on `[k]`. For each `k`-subset
/// `D` the renamed inner proof is lifted under `s_D = 1` to derive
/// `⋁_{ι∈D} ¬s_ι`; the threshold closure consumes those clauses.
pub fn build_relativized_refutation(
    template: &SymmetricTemplate,
    k: u32,
    m: u32,
    inner: &ResolutionProof,
) -> Result<ResolutionProof, ResolutionError> {
    let base = generalize_domain(template, k)?;
    check_refutation(&base, inner)?;
    let rel = relativize_template(template, k, m)?;

    let mut p = ResolutionProof::new();
    let mut lifted_root: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for d in subsets(m, k as usize) {
        let renamed = inner.rename(|v| match v.domain_index() {
            Some(i) => v.with_domain(Some(d[i as usize - 1])),
            None => v,
        });
        let rho = d.iter().map(|&i| (vars::selector(i), true)).collect();
        let lifted = lift_proof(&rel, &rho, &renamed)?;
        lifted_root.insert(d, p.append(&lifted));
    }
    threshold_closure(&mut p, k, m, &mut |_, d| lifted_root[d])?;
    Ok(p)
}
