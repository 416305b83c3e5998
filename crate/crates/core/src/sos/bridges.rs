use std::collections::BTreeMap;

use crate::algebra::{indicator_poly, vars, Poly, PolynomialConstraint, VarId, VarKind};
use crate::formulas::{encode_xor, gen_block, gen_clique, Graph, XorGraph};

use super::{
    cnf_system, substitute_certificate, EqualityTerm, InequalityTerm, SosCertificate, SosError,
    SquareSum,
};

type Bridges = BTreeMap<usize, SosCertificate>;

fn block_var(block_of: &[usize], v: usize) -> VarId {
    vars::clique_x(block_of[v] as u32 + 1, v as u32 + 1)
}

/// `1 − x_u − x_v ≥ 0` for two vertices of block `block` of a partitioned
/// graph: `−(Σ_w x_w − 1) + Σ_{w∉{u,v}} x_w²`.
pub fn derive_functional_bridge(
    g: &Graph,
    block: usize,
    u: usize,
    v: usize,
) -> Result<SosCertificate, SosError> {
    let blocks = g.partition().ok_or(crate::formulas::FormulaError::MissingPartition)?;
    let members = blocks
        .get(block)
        .ok_or_else(|| SosError::Unsupported(format!("no block {block}")))?;
    if u == v || !members.contains(&u) || !members.contains(&v) {
        return Err(SosError::Unsupported(format!(
            "vertices {u} and {v} are not two members of block {block}"
        )));
    }
    let x = |w: usize| Poly::var(vars::clique_x(block as u32 + 1, w as u32 + 1));
    let mut cert = SosCertificate::new(PolynomialConstraint::geq_zero(
        &(&Poly::one() - &x(u)) - &x(v),
    ));
    cert.equality.push(EqualityTerm { g: Poly::int(-1), f: block });
    cert.free = SquareSum::of(
        members
            .iter()
            .filter(|&&w| w != u && w != v)
            .map(|&w| x(w))
            .collect(),
    );
    Ok(cert)
}

/// `1 − Π(1 − x_t)` over the listed variables.
fn or_poly(xs: impl IntoIterator<Item = VarId>) -> Poly {
    let mut none = Poly::one();
    for x in xs {
        none = &none * &Poly::not_var(x);
    }
    &Poly::one() - &none
}

/// The substitution and per-clause bridges taking the `k`-clique formula of
/// a `k`-partite graph to its block encoding.
///
/// `x_{i,v}` is kept when `v` lies in block `i` and set to 0 otherwise;
/// `z_{i,j}` becomes the disjunction of the block-`i` variables of vertices
/// `v_{j+1}, …, v_N`, written as `1 − Π(1 − x)` so that it stays 0/1-valued.
pub fn clique_to_block_bridges(
    g: &Graph,
    k: u32,
) -> Result<(BTreeMap<VarId, Poly>, Bridges), SosError> {
    let target = gen_block(g, k)?;
    let block_of = g.block_of().expect("gen_block checked the partition");
    let n = g.num_vertices();

    let mut sigma = BTreeMap::new();
    for i in 1..=k {
        for (v, &b) in block_of.iter().enumerate() {
            let x = vars::clique_x(i, v as u32 + 1);
            let img = if b + 1 == i as usize { Poly::var(x) } else { Poly::zero() };
            sigma.insert(x, img);
        }
        for j in 0..=n {
            let tail = (j..n)
                .filter(|&t| block_of[t] + 1 == i as usize)
                .map(|t| vars::clique_x(i, t as u32 + 1));
            sigma.insert(vars::clique_z(i, j as u32), or_poly(tail));
        }
    }

    let source = cnf_system(&gen_clique(g, k));
    let mut bridges = Bridges::new();
    for (idx, c) in source.iter().enumerate() {
        let img = PolynomialConstraint {
            poly: c.poly.substitute(&sigma),
            relation: c.relation,
        };
        let mut cert = SosCertificate::new(img.clone());
        if img.poly.is_zero() {
            bridges.insert(idx, cert);
            continue;
        }
        if let Some(pos) = target.position(&img) {
            cert.inequality.push(InequalityTerm { u: SquareSum::of(vec![Poly::one()]), h: pos });
            bridges.insert(idx, cert);
            continue;
        }
        let vs: Vec<VarId> = c.poly.vars().into_iter().collect();
        let cert = match vs.as_slice() {
            // Unit z_{i,0}: σ gives −Π(1 − x) = Π(1 − x)·(Σx − 1).
            [z] if z.kind() == VarKind::Z && z.indices() == [0] => {
                let i = z.domain_index().expect("z has a domain index");
                cert.equality.push(EqualityTerm {
                    g: &Poly::one() - &or_poly(
                        (0..n)
                            .filter(|&t| block_of[t] + 1 == i as usize)
                            .map(|t| vars::clique_x(i, t as u32 + 1)),
                    ),
                    f: i as usize - 1,
                });
                cert
            }
            // Chain clauses reduce to x_j·σ(z_j), two vertex variables to
            // either a functional pair or a single 1 − x.
            _ => {
                let in_block: Vec<VarId> = vs
                    .iter()
                    .copied()
                    .filter(|v| v.kind() == VarKind::X && !sigma[v].is_zero())
                    .collect();
                let is_pair = vs.len() == 2 && vs.iter().all(|v| v.kind() == VarKind::X);
                if is_pair && in_block.len() == 2 {
                    let b = in_block[0].domain_index().expect("x has a domain index") as usize - 1;
                    let [u, v] = [in_block[0], in_block[1]].map(|x| x.indices()[0] as usize - 1);
                    derive_functional_bridge(g, b, u, v)?
                } else {
                    // The image is 0/1-valued, hence its own square.
                    cert.free = SquareSum::of(vec![img.poly.clone()]);
                    cert
                }
            }
        };
        bridges.insert(idx, cert);
    }
    Ok((sigma, bridges))
}

/// Rewrites a refutation of the `k`-clique formula of a `k`-partite graph
/// into a refutation of its block encoding. Domain-degree does not grow.
pub fn transform_clique_to_block(
    g: &Graph,
    k: u32,
    cert: &SosCertificate,
) -> Result<SosCertificate, SosError> {
    let (sigma, bridges) = clique_to_block_bridges(g, k)?;
    let used = used_bridges(cert, bridges);
    substitute_certificate(
        &cnf_system(&gen_clique(g, k)),
        cert,
        &sigma,
        &used,
        &gen_block(g, k)?,
    )
}

/// Restricts `bridges` to the axioms `cert` actually uses.
fn used_bridges(cert: &SosCertificate, mut bridges: Bridges) -> Bridges {
    let mut out = Bridges::new();
    for i in cert.equality.iter().map(|t| t.f).chain(cert.inequality.iter().map(|t| t.h)) {
        if let Some(b) = bridges.remove(&i) {
            out.insert(i, b);
        }
    }
    out
}

/// Indicator of vertex `v`'s assignment restricted to the given variables.
fn partial_indicator(xg: &XorGraph, v: usize, keep: &[u32]) -> Poly {
    let (vs, bits): (Vec<VarId>, Vec<bool>) = xg.assignments[v]
        .iter()
        .filter(|(i, _)| keep.contains(i))
        .map(|(&i, &b)| (vars::xor_var(i), b))
        .unzip();
    indicator_poly(&vs, &bits).expect("matching lengths")
}

/// `1 − δ_u − δ_v ≥ 0` over the parity encoding, for non-adjacent vertices
/// of distinct blocks.
///
/// Incompatible assignments give `δ_u δ_v = 0`, so the target is the square
/// of itself. Otherwise the joint assignment violates some equation `e` and
/// with `f_u, f_v` the indicators of `u, v` on the variables of `e`,
/// `(1−f_u−f_v)² + (f_u−δ_u)² + (f_v−δ_v)² − 2 f_u f_v = 1 − δ_u − δ_v`
/// where `f_u f_v` is one of the four axioms of `e`.
pub fn derive_block_bridge(xg: &XorGraph, u: usize, v: usize) -> Result<SosCertificate, SosError> {
    let block_of = xg.block_of();
    if block_of[u] == block_of[v] {
        return Err(SosError::Unsupported(format!(
            "vertices {u} and {v} lie in the same block"
        )));
    }
    if xg.graph.adjacent(u, v) {
        return Err(SosError::Adjacent(u, v));
    }
    let (du, dv) = (xg.vertex_indicator(u), xg.vertex_indicator(v));
    let target = &(&Poly::one() - &du) - &dv;
    let mut cert = SosCertificate::new(PolynomialConstraint::geq_zero(target.clone()));
    let (au, av) = (&xg.assignments[u], &xg.assignments[v]);
    let compatible = au.iter().all(|(x, b)| av.get(x).is_none_or(|c| c == b));
    if !compatible {
        cert.free = SquareSum::of(vec![target]);
        return Ok(cert);
    }
    let value = |x: u32| au.get(&x).or_else(|| av.get(&x)).copied();
    let (e, eq) = xg
        .system
        .equations
        .iter()
        .enumerate()
        .find(|(_, eq)| {
            eq.vars.iter().all(|&x| value(x).is_some())
                && !eq.satisfied_by(|x| value(x).expect("assigned"))
        })
        .ok_or(SosError::Adjacent(u, v))?;
    let bits = eq.vars.map(|x| value(x).expect("assigned"));
    let pattern = eq
        .violating_patterns()
        .iter()
        .position(|p| *p == bits)
        .expect("a violated equation matches one of its patterns");
    let fu = partial_indicator(xg, u, &eq.vars);
    let fv = partial_indicator(xg, v, &eq.vars);
    cert.equality.push(EqualityTerm { g: Poly::int(-2), f: 4 * e + pattern });
    cert.free = SquareSum::of(vec![
        &(&Poly::one() - &fu) - &fv,
        &fu - &du,
        &fv - &dv,
    ]);
    Ok(cert)
}

/// The substitution `x_v ↦ δ_v` and per-constraint bridges taking the block
/// encoding of an XOR graph to the parity encoding of its system.
pub fn xor_bridges(xg: &XorGraph) -> Result<(BTreeMap<VarId, Poly>, Bridges), SosError> {
    let blocks = xg.graph.partition().expect("xor graph is partitioned");
    let k = blocks.len() as u32;
    let source = gen_block(&xg.graph, k)?;
    let block_of = xg.block_of();
    let sigma: BTreeMap<VarId, Poly> = (0..xg.assignments.len())
        .map(|v| (block_var(&block_of, v), xg.vertex_indicator(v)))
        .collect();

    let mut bridges = Bridges::new();
    // Block equalities: the indicators of all assignments to the block's
    // variables sum to 1, and each missing one factors through an axiom.
    for (b, members) in blocks.iter().enumerate() {
        let img = source[b].poly.substitute(&sigma);
        let mut cert = SosCertificate::new(PolynomialConstraint::eq_zero(img));
        let bvars = &xg.block_vars[b];
        let present: std::collections::BTreeSet<&BTreeMap<u32, bool>> =
            members.iter().map(|&v| &xg.assignments[v]).collect();
        for bits in 0u64..1u64 << bvars.len() {
            let a: BTreeMap<u32, bool> = bvars
                .iter()
                .enumerate()
                .map(|(t, &x)| (x, bits >> t & 1 == 1))
                .collect();
            if present.contains(&a) {
                continue;
            }
            let (e, eq) = xg.block_equations[b]
                .iter()
                .map(|&e| (e, &xg.system.equations[e]))
                .find(|(_, eq)| !eq.satisfied_by(|x| a[&x]))
                .ok_or_else(|| {
                    SosError::Unsupported(format!(
                        "block {b} is missing a satisfying assignment"
                    ))
                })?;
            let pattern = eq.vars.map(|x| a[&x]);
            let p = eq
                .violating_patterns()
                .iter()
                .position(|q| *q == pattern)
                .expect("violating pattern");
            let (rest_vars, rest_bits): (Vec<VarId>, Vec<bool>) = a
                .iter()
                .filter(|(x, _)| !eq.vars.contains(x))
                .map(|(&x, &bit)| (vars::xor_var(x), bit))
                .unzip();
            let rest = indicator_poly(&rest_vars, &rest_bits).expect("matching lengths");
            cert.equality.push(EqualityTerm { g: -&rest, f: 4 * e + p });
        }
        bridges.insert(b, cert);
    }
    for (idx, c) in source.iter().enumerate().skip(blocks.len()) {
        let vs: Vec<VarId> = c.poly.vars().into_iter().collect();
        let [u, v] = [vs[0], vs[1]].map(|x| x.indices()[0] as usize - 1);
        let cert = derive_block_bridge(xg, u, v)?;
        debug_assert_eq!(cert.target.poly, c.poly.substitute(&sigma));
        bridges.insert(idx, cert);
    }
    Ok((sigma, bridges))
}

/// Rewrites a refutation of the block encoding of an XOR graph into a
/// refutation of the parity encoding of its system.
pub fn transform_block_to_xor(xg: &XorGraph, cert: &SosCertificate) -> Result<SosCertificate, SosError> {
    let (sigma, bridges) = xor_bridges(xg)?;
    let k = xg.block_vars.len() as u32;
    let used = used_bridges(cert, bridges);
    substitute_certificate(
        &gen_block(&xg.graph, k)?,
        cert,
        &sigma,
        &used,
        &encode_xor(&xg.system),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{build_xor_graph, XorEquation, XorSystem};
    use crate::sos::check_certificate;

    fn partitioned(sizes: &[usize], edges: &[(usize, usize)]) -> Graph {
        let n = sizes.iter().sum();
        let mut g = Graph::with_vertices(n);
        let mut blocks = Vec::new();
        let mut next = 0;
        for &s in sizes {
            blocks.push((next..next + s).collect());
            next += s;
        }
        for &(u, v) in edges {
            g.add_edge(u, v).unwrap();
        }
        g.set_partition(blocks).unwrap();
        g
    }

    #[test]
    fn functional_bridges_all_block_sizes() {
        for size in 2..=8 {
            let g = partitioned(&[size], &[]);
            let sys = gen_block(&g, 1).unwrap();
            for u in 0..size {
                for v in u + 1..size {
                    let b = derive_functional_bridge(&g, 0, u, v).unwrap();
                    assert_eq!(b.free.len(), size - 2);
                    let m = check_certificate(&sys, &b).unwrap();
                    assert_eq!(m.domain_degree, 1);
                }
            }
        }
    }

    #[test]
    fn every_clique_bridge_checks() {
        let g = partitioned(&[2, 2, 1], &[(0, 2), (1, 3), (2, 4), (0, 4)]);
        let target = gen_block(&g, 3).unwrap();
        let source = cnf_system(&gen_clique(&g, 3));
        let (_, bridges) = clique_to_block_bridges(&g, 3).unwrap();
        assert_eq!(bridges.len(), source.len());
        for b in bridges.values() {
            check_certificate(&target, b).unwrap();
        }
    }

    fn eq(vars: [u32; 3], rhs: bool) -> XorEquation {
        XorEquation { vars, rhs }
    }

    #[test]
    fn block_bridges_exhaustive() {
        let sys = XorSystem::new(4, vec![eq([1, 2, 3], false), eq([2, 3, 4], true), eq([1, 2, 4], true)]).unwrap();
        for keep in [false, true] {
            let xg = build_xor_graph(&sys, 3, keep).unwrap();
            let target = encode_xor(&sys);
            let (_, bridges) = xor_bridges(&xg).unwrap();
            for b in bridges.values() {
                check_certificate(&target, b).unwrap();
            }
        }
    }

    #[test]
    fn incompatible_pair_is_squares_only() {
        let sys = XorSystem::new(3, vec![eq([1, 2, 3], false), eq([1, 2, 3], true)]).unwrap();
        let xg = build_xor_graph(&sys, 2, false).unwrap();
        let block_of = xg.block_of();
        let target = encode_xor(&sys);
        let mut seen = [false; 2];
        for u in 0..block_of.len() {
            for v in 0..block_of.len() {
                if block_of[u] == 0 && block_of[v] == 1 {
                    let b = derive_block_bridge(&xg, u, v).unwrap();
                    check_certificate(&target, &b).unwrap();
                    seen[b.equality.is_empty() as usize] = true;
                }
            }
        }
        // Both blocks assign all three variables, so every pair is incompatible.
        assert_eq!(seen, [false, true]);
    }

    #[test]
    fn compatible_violating_pair_uses_the_axiom() {
        // Every equation lies inside one block, so a compatible non-edge
        // needs a vertex that violates its own block.
        let sys = XorSystem::new(6, vec![eq([1, 2, 3], false), eq([4, 5, 6], false)]).unwrap();
        let xg = build_xor_graph(&sys, 2, true).unwrap();
        let target = encode_xor(&sys);
        let block_of = xg.block_of();
        let mut factored = 0;
        for u in 0..block_of.len() {
            for v in 0..block_of.len() {
                if block_of[u] == 0 && block_of[v] == 1 && !xg.graph.adjacent(u, v) {
                    let b = derive_block_bridge(&xg, u, v).unwrap();
                    check_certificate(&target, &b).unwrap();
                    assert_eq!(b.equality[0].g, Poly::int(-2));
                    factored += 1;
                }
            }
        }
        // 8·8 pairs minus the 4·4 edges between satisfying assignments.
        assert_eq!(factored, 48);
    }

    #[test]
    fn adjacent_pair_is_rejected() {
        let sys = XorSystem::new(6, vec![eq([1, 2, 3], false), eq([4, 5, 6], false)]).unwrap();
        let xg = build_xor_graph(&sys, 2, false).unwrap();
        let (u, v) = *xg.graph.edges().iter().next().unwrap();
        assert_eq!(derive_block_bridge(&xg, u, v), Err(SosError::Adjacent(u, v)));
    }

    #[test]
    fn contradictory_pair_through_both_transforms() {
        use crate::resolution::build_clique_refutation;
        use crate::sos::compile_resolution;
        let sys = XorSystem::new(3, vec![eq([1, 2, 3], false), eq([1, 2, 3], true)]).unwrap();
        let xg = build_xor_graph(&sys, 2, false).unwrap();
        let f = gen_clique(&xg.graph, 2);
        let proof = build_clique_refutation(&xg.graph, 2).unwrap();
        let cert = compile_resolution(&f, &proof).unwrap();
        let m0 = check_certificate(&cnf_system(&f), &cert).unwrap();
        let block = transform_clique_to_block(&xg.graph, 2, &cert).unwrap();
        let m1 = check_certificate(&gen_block(&xg.graph, 2).unwrap(), &block).unwrap();
        assert!(m1.domain_degree <= m0.domain_degree);
        let xor = transform_block_to_xor(&xg, &block).unwrap();
        let m2 = check_certificate(&encode_xor(&sys), &xor).unwrap();
        assert!(m2.degree <= 3 * m1.degree);
    }

    #[test]
    fn one_equation_per_block_eight_blocks() {
        use crate::resolution::build_clique_refutation;
        use crate::sos::compile_resolution;
        let eqs = (0..8).map(|i| eq([1, 2, 3], i % 2 == 1)).collect();
        let sys = XorSystem::new(3, eqs).unwrap();
        let xg = build_xor_graph(&sys, 8, false).unwrap();
        let f = gen_clique(&xg.graph, 8);
        let proof = build_clique_refutation(&xg.graph, 8).unwrap();
        let cert = compile_resolution(&f, &proof).unwrap();
        let m0 = check_certificate(&cnf_system(&f), &cert).unwrap();
        let block = transform_clique_to_block(&xg.graph, 8, &cert).unwrap();
        let m1 = check_certificate(&gen_block(&xg.graph, 8).unwrap(), &block).unwrap();
        let xor = transform_block_to_xor(&xg, &block).unwrap();
        let m2 = check_certificate(&encode_xor(&sys), &xor).unwrap();
        assert_eq!(m1.domain_degree, m0.domain_degree);
        assert!(m2.degree <= 3 * m1.degree);
    }
}
