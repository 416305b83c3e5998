use crate::algebra::vars;

use super::clique::chain_clauses;
use super::{Clause, CnfFormula, FormulaError, Lit, Provenance};

/// Threshold-`k` formula over selectors `s_1..s_m`: `p_{i,j}` maps `[k]`
/// injectively into the selected positions, with `y_{i,j}` as the chain
/// extension variables.
///
/// The closing unit clauses `¬y_{i,m}` range over `i ∈ [k]`.
pub fn gen_threshold(k: u32, m: u32) -> Result<CnfFormula, FormulaError> {
    if k == 0 || k > m {
        return Err(FormulaError::InvalidParameters(format!(
            "threshold needs 1 <= k <= m, got k={k}, m={m}"
        )));
    }
    Ok(CnfFormula::new(threshold_clauses(k, m), Some(m))
        .with_provenance(Provenance::new("gen-threshold").param("k", k).param("m", m)))
}

pub(crate) fn threshold_clauses(k: u32, m: u32) -> Vec<Clause> {
    let mut out = Vec::new();
    for i in 1..=k {
        out.extend(chain_clauses(
            m as usize,
            |j| vars::thr_y(i, j),
            |j| vars::thr_p(i, j),
        ));
    }
    for i in 1..=k {
        for i2 in i + 1..=k {
            for j in 1..=m {
                out.push(Clause::negations([vars::thr_p(i, j), vars::thr_p(i2, j)]));
            }
        }
    }
    for i in 1..=k {
        for j in 1..=m {
            out.push(
                Clause::new([Lit::neg(vars::thr_p(i, j)), Lit::pos(vars::selector(j))])
                    .expect("distinct variables"),
            );
        }
    }
    out
}

/// Brute-force gadget: chains `y_{i,0}`, `¬y_{i,j−1} ∨ x_{i,j} ∨ y_{i,j}`,
/// `¬y_{i,m_i}` for each `i ∈ [k]`, plus `¬x_{1,j_1} ∨ … ∨ ¬x_{k,j_k}` for
/// every tuple in `[m_1] × … × [m_k]`.
pub fn gen_bruteforce_gadget(m: &[u32]) -> Result<CnfFormula, FormulaError> {
    if m.is_empty() || m.contains(&0) {
        return Err(FormulaError::InvalidParameters(
            "gadget needs k >= 1 and every m_i >= 1".into(),
        ));
    }
    let mut clauses = Vec::new();
    for (i, &mi) in m.iter().enumerate() {
        let i = i as u32 + 1;
        clauses.extend(chain_clauses(
            mi as usize,
            |j| vars::gadget_y(i, j),
            |j| vars::gadget_x(i, j),
        ));
    }
    for tuple in tuples(m) {
        clauses.push(Clause::negations(
            tuple
                .iter()
                .enumerate()
                .map(|(i, &j)| vars::gadget_x(i as u32 + 1, j)),
        ));
    }
    let text: Vec<String> = m.iter().map(u32::to_string).collect();
    Ok(CnfFormula::new(clauses, None).with_provenance(
        Provenance::new("gen-bruteforce")
            .param("k", m.len())
            .param("m", text.join(",")),
    ))
}

/// All tuples of `[m_1] × … × [m_k]` in lexicographic order.
pub(crate) fn tuples(m: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &mi in m {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=mi).map(move |j| {
                    let mut t = t.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    out
}
