use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{indicator_poly, vars, ConstraintSystem, Poly, PolynomialConstraint, VarId};

use super::{FormulaError, Graph};

/// Largest variable count `max_satisfiable` sweeps exhaustively.
pub const MAX_SWEEP_VARS: u32 = 24;

/// `x_i ⊕ x_j ⊕ x_l = b` with 1-based, pairwise distinct variable indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorEquation {
    pub vars: [u32; 3],
    pub rhs: bool,
}

impl XorEquation {
    pub fn satisfied_by(&self, value: impl Fn(u32) -> bool) -> bool {
        (value(self.vars[0]) ^ value(self.vars[1]) ^ value(self.vars[2])) == self.rhs
    }

    /// Bit patterns on `(x, y, z)` that violate the equation, in the order the
    /// polynomial encoding lists them.
    pub fn violating_patterns(&self) -> [[bool; 3]; 4] {
        if self.rhs {
            [
                [false, false, false],
                [true, true, false],
                [true, false, true],
                [false, true, true],
            ]
        } else {
            [
                [false, false, true],
                [false, true, false],
                [true, false, false],
                [true, true, true],
            ]
        }
    }
}

/// A system of 3-variable parity equations over `x_1..x_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorSystem {
    pub n: u32,
    pub equations: Vec<XorEquation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl XorSystem {
    pub fn new(n: u32, equations: Vec<XorEquation>) -> Result<Self, FormulaError> {
        for e in &equations {
            let [a, b, c] = e.vars;
            if a == b || b == c || a == c || [a, b, c].iter().any(|&v| v == 0 || v > n) {
                return Err(FormulaError::InvalidXor(format!(
                    "equation over {:?} is not three distinct variables in [1,{n}]",
                    e.vars
                )));
            }
        }
        Ok(XorSystem {
            n,
            equations,
            seed: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("xor system serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, crate::error::ParseError> {
        let doc: XorSystem = serde_json::from_str(text)?;
        let seed = doc.seed;
        let mut sys = XorSystem::new(doc.n, doc.equations)
            .map_err(|e| crate::error::ParseError::new(e.to_string()))?;
        sys.seed = seed;
        Ok(sys)
    }
}

/// `density · n` equations, each support drawn uniformly without replacement
/// and each right-hand side a fair coin, from a ChaCha stream seeded by `seed`.
pub fn gen_random_3xor(n: u32, density: u32, seed: u64) -> Result<XorSystem, FormulaError> {
    if n < 3 {
        return Err(FormulaError::InvalidXor(format!(
            "need at least 3 variables, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let equations = (0..density * n)
        .map(|_| {
            let idx = sample(&mut rng, n as usize, 3);
            XorEquation {
                vars: [
                    idx.index(0) as u32 + 1,
                    idx.index(1) as u32 + 1,
                    idx.index(2) as u32 + 1,
                ],
                rhs: rng.gen(),
            }
        })
        .collect();
    let mut sys = XorSystem::new(n, equations)?;
    sys.seed = Some(seed);
    Ok(sys)
}

/// Four cubic equalities per equation: the indicator products of the four
/// assignments that violate it.
pub fn encode_xor(sys: &XorSystem) -> ConstraintSystem {
    let mut out = ConstraintSystem::default();
    for e in &sys.equations {
        let vs: Vec<VarId> = e.vars.iter().map(|&i| vars::xor_var(i)).collect();
        for pattern in e.violating_patterns() {
            let p = indicator_poly(&vs, &pattern).expect("three bits");
            out.push(PolynomialConstraint::eq_zero(p));
        }
    }
    out
}

/// Maximum number of simultaneously satisfiable equations, by sweeping all
/// `2ⁿ` assignments.
pub fn max_satisfiable(sys: &XorSystem) -> Result<usize, FormulaError> {
    if sys.n > MAX_SWEEP_VARS {
        return Err(FormulaError::TooLarge {
            what: "variables",
            limit: MAX_SWEEP_VARS as usize,
            got: sys.n as usize,
        });
    }
    let masks: Vec<(u32, u32)> = sys
        .equations
        .iter()
        .map(|e| {
            let m = e.vars.iter().fold(0u32, |m, &v| m | 1 << (v - 1));
            (m, e.rhs as u32)
        })
        .collect();
    let total = masks.len();
    let mut best = 0;
    for a in 0u32..(1u32 << sys.n) {
        let sat = masks
            .iter()
            .filter(|&&(m, b)| (a & m).count_ones() & 1 == b)
            .count();
        if sat > best {
            best = sat;
            if best == total {
                break;
            }
        }
    }
    Ok(best)
}

/// `k`-partite graph whose `k`-cliques are the satisfying assignments of a
/// parity system. Vertex `v` of block `i` is a partial assignment to the
/// variables of the `i`-th equation group.
#[derive(Clone, Debug)]
pub struct XorGraph {
    pub graph: Graph,
    /// Variables mentioned by each block's equations, sorted.
    pub block_vars: Vec<Vec<u32>>,
    /// Assignment represented by each vertex.
    pub assignments: Vec<BTreeMap<u32, bool>>,
    /// Equation indices of each block.
    pub block_equations: Vec<Vec<usize>>,
    pub system: XorSystem,
}

impl XorGraph {
    /// `δ_v`: indicator polynomial of vertex `v`'s assignment.
    pub fn vertex_indicator(&self, v: usize) -> Poly {
        let (vs, bits): (Vec<VarId>, Vec<bool>) = self.assignments[v]
            .iter()
            .map(|(&i, &b)| (vars::xor_var(i), b))
            .unzip();
        indicator_poly(&vs, &bits).expect("matching lengths")
    }

    pub fn block_of(&self) -> Vec<usize> {
        self.graph.block_of().expect("xor graph is partitioned")
    }
}

fn violates_any(eqs: &[XorEquation], assignment: &BTreeMap<u32, bool>) -> Option<usize> {
    eqs.iter().position(|e| {
        e.vars.iter().all(|v| assignment.contains_key(v))
            && !e.satisfied_by(|v| assignment[&v])
    })
}

/// Splits the equations into `k` contiguous groups and builds the graph.
/// Assignments violating an equation of their own group are dropped unless
/// `keep_violating` is set, in which case they stay as isolated vertices.
pub fn build_xor_graph(
    sys: &XorSystem,
    k: usize,
    keep_violating: bool,
) -> Result<XorGraph, FormulaError> {
    let m = sys.equations.len();
    if k == 0 || !m.is_multiple_of(k) {
        return Err(FormulaError::Divisibility { k, equations: m });
    }
    let per = m / k;
    let mut labels = Vec::new();
    let mut assignments = Vec::new();
    let mut blocks = Vec::new();
    let mut block_vars = Vec::new();
    let mut block_equations = Vec::new();
    for b in 0..k {
        let eq_idx: Vec<usize> = (b * per..(b + 1) * per).collect();
        let group: Vec<XorEquation> = eq_idx.iter().map(|&i| sys.equations[i]).collect();
        let vs: Vec<u32> = group
            .iter()
            .flat_map(|e| e.vars)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut block = Vec::new();
        for bits in 0u64..1u64 << vs.len() {
            let a: BTreeMap<u32, bool> = vs
                .iter()
                .enumerate()
                .map(|(t, &v)| (v, bits >> t & 1 == 1))
                .collect();
            if !keep_violating && violates_any(&group, &a).is_some() {
                continue;
            }
            let text: Vec<String> = a.iter().map(|(v, b)| format!("x{v}={}", *b as u8)).collect();
            labels.push(format!("B{}[{}]", b + 1, text.join(",")));
            block.push(assignments.len());
            assignments.push(a);
        }
        blocks.push(block);
        block_vars.push(vs);
        block_equations.push(eq_idx);
    }

    let mut graph = Graph::new(labels);
    let block_of: Vec<usize> = {
        let mut out = vec![0; assignments.len()];
        for (i, b) in blocks.iter().enumerate() {
            for &v in b {
                out[v] = i;
            }
        }
        out
    };
    for u in 0..assignments.len() {
        for v in u + 1..assignments.len() {
            if block_of[u] == block_of[v] {
                continue;
            }
            let (au, av) = (&assignments[u], &assignments[v]);
            let compatible = au.iter().all(|(x, b)| av.get(x).is_none_or(|c| c == b));
            if !compatible {
                continue;
            }
            let mut union = au.clone();
            union.extend(av.iter().map(|(x, b)| (*x, *b)));
            if violates_any(&sys.equations, &union).is_none() {
                graph.add_edge(u, v).expect("distinct vertices");
            }
        }
    }
    graph.set_partition(blocks).expect("blocks partition the vertices");
    Ok(XorGraph {
        graph,
        block_vars,
        assignments,
        block_equations,
        system: sys.clone(),
    })
}
