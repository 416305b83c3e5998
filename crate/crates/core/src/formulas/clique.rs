use crate::algebra::{vars, ConstraintSystem, Poly, PolynomialConstraint};

use super::{Clause, CnfFormula, FormulaError, Graph, Lit, Provenance};

/// `k`-clique formula of `g`: edge, functional and z-chain clause groups over
/// `x_{i,v}` and `z_{i,j}` with `i ∈ [k]`. Domain `[k]`, domain-width 2.
pub fn gen_clique(g: &Graph, k: u32) -> CnfFormula {
    let n = g.num_vertices();
    let mut clauses = Vec::new();
    let vx = |i: u32, v: usize| vars::clique_x(i, v as u32 + 1);

    // Non-edge clauses between distinct indices; u = v counts as a non-edge.
    for i in 1..=k {
        for j in i + 1..=k {
            for u in 0..n {
                for v in 0..n {
                    if u == v || !g.adjacent(u, v) {
                        clauses.push(Clause::negations([vx(i, u), vx(j, v)]));
                    }
                }
            }
        }
    }
    // At most one vertex per index.
    for i in 1..=k {
        for u in 0..n {
            for v in u + 1..n {
                clauses.push(Clause::negations([vx(i, u), vx(i, v)]));
            }
        }
    }
    // At least one vertex per index, as a 3-CNF chain.
    for i in 1..=k {
        clauses.extend(chain_clauses(
            n,
            |j| vars::clique_z(i, j),
            |j| vx(i, j as usize - 1),
        ));
    }

    let mut f = CnfFormula::new(clauses, Some(k)).with_provenance(
        Provenance::new("gen-clique")
            .param("k", k)
            .param("vertices", g.labels().join(",")),
    );
    f.register_vars((1..=k).flat_map(|i| (0..n).map(move |v| vx(i, v))));
    f
}

/// `y_0`, `¬y_{j−1} ∨ x_j ∨ y_j` for `j ∈ [len]`, `¬y_len`.
pub(crate) fn chain_clauses(
    len: usize,
    y: impl Fn(u32) -> crate::algebra::VarId,
    x: impl Fn(u32) -> crate::algebra::VarId,
) -> Vec<Clause> {
    let mut out = vec![Clause::new([Lit::pos(y(0))]).expect("unit")];
    for j in 1..=len as u32 {
        out.push(
            Clause::new([Lit::neg(y(j - 1)), Lit::pos(x(j)), Lit::pos(y(j))])
                .expect("distinct variables"),
        );
    }
    out.push(Clause::new([Lit::neg(y(len as u32))]).expect("unit"));
    out
}

/// Block encoding of `k`-clique on a `k`-partite graph: one equality
/// `Σ_{v∈V_i} x_v − 1 = 0` per block, then `1 − x_u − x_v ≥ 0` for every
/// cross-block non-edge (pairs in increasing vertex order).
///
/// The variable of vertex `v` in block `i` is `x_{i,v}`, the same variable
/// the clique formula uses for "v is the i-th member".
pub fn gen_block(g: &Graph, k: u32) -> Result<ConstraintSystem, FormulaError> {
    let blocks = g.partition().ok_or(FormulaError::MissingPartition)?;
    if blocks.len() != k as usize {
        return Err(FormulaError::PartitionSize {
            expected: k as usize,
            found: blocks.len(),
        });
    }
    let block_of = g.block_of().expect("partitioned");
    let xv = |v: usize| vars::clique_x(block_of[v] as u32 + 1, v as u32 + 1);

    let mut sys = ConstraintSystem::default();
    for b in blocks {
        let sum: Poly = b.iter().map(|&v| Poly::var(xv(v))).sum();
        sys.push(PolynomialConstraint::eq_zero(&sum - &Poly::one()));
    }
    let n = g.num_vertices();
    for u in 0..n {
        for v in u + 1..n {
            if block_of[u] != block_of[v] && !g.adjacent(u, v) {
                let p = &(&Poly::one() - &Poly::var(xv(u))) - &Poly::var(xv(v));
                sys.push(PolynomialConstraint::geq_zero(p));
            }
        }
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_single_index() {
        let g = Graph::with_vertices(1);
        let f = gen_clique(&g, 1);
        let z0 = vars::clique_z(1, 0);
        let z1 = vars::clique_z(1, 1);
        let x = vars::clique_x(1, 1);
        let expected: CnfFormula = [
            Clause::new([Lit::pos(z0)]).unwrap(),
            Clause::new([Lit::neg(z0), Lit::pos(x), Lit::pos(z1)]).unwrap(),
            Clause::new([Lit::neg(z1)]).unwrap(),
        ]
        .into_iter()
        .collect();
        assert_eq!(f.clauses(), expected.clauses());
        assert_eq!(f.domain_size(), Some(1));
    }

    #[test]
    fn isolated_pair_two_indices() {
        let g = Graph::with_vertices(2);
        let f = gen_clique(&g, 2);
        let x = vars::clique_x;
        for c in [
            Clause::negations([x(1, 1), x(2, 2)]),
            Clause::negations([x(1, 2), x(2, 1)]),
            Clause::negations([x(1, 1), x(2, 1)]),
            Clause::negations([x(1, 1), x(1, 2)]),
            Clause::negations([x(2, 1), x(2, 2)]),
        ] {
            assert!(f.contains(&c), "{c:?}");
        }
        assert_eq!(f.width(), 3);
        assert_eq!(f.domain_width(), 2);
    }

    #[test]
    fn block_examples() {
        let mut g = Graph::with_vertices(1);
        g.set_partition(vec![vec![0]]).unwrap();
        let sys = gen_block(&g, 1).unwrap();
        assert_eq!(sys.len(), 1);
        assert_eq!(sys[0].to_string(), "-1 + 1 * x_d1_1 = 0");

        let mut g = Graph::with_vertices(2);
        g.set_partition(vec![vec![0], vec![1]]).unwrap();
        let sys = gen_block(&g, 2).unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(sys[2].to_string(), "1 + -1 * x_d1_1 + -1 * x_d2_2 >= 0");

        assert_eq!(
            gen_block(&Graph::with_vertices(2), 2),
            Err(FormulaError::MissingPartition)
        );
    }
}
