use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::vars;

use super::threshold::threshold_clauses;
use super::{Clause, CnfFormula, FormulaError, Lit, Provenance, RelativizationInfo};

/// Canonical representatives `F_η` of a formula symmetric under permutations
/// of its domain: `parts[η]` holds the clauses mentioning exactly `{1..η}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricTemplate {
    parts: Vec<BTreeSet<Clause>>,
    source_domain: u32,
}

impl SymmetricTemplate {
    pub fn domain_width(&self) -> usize {
        self.parts.len().saturating_sub(1)
    }

    pub fn part(&self, eta: usize) -> Option<&BTreeSet<Clause>> {
        self.parts.get(eta)
    }

    /// Arities with at least one representative clause.
    pub fn arities(&self) -> Vec<usize> {
        (0..self.parts.len())
            .filter(|&e| !self.parts[e].is_empty())
            .collect()
    }

    pub fn source_domain(&self) -> u32 {
        self.source_domain
    }
}

/// A domain renaming together with a clause it fails to map into the formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryWitness {
    /// `(from, to)` pairs of domain indices.
    pub mapping: Vec<(u32, u32)>,
    pub missing: Clause,
}

pub(crate) fn rename_domain(c: &Clause, map: &BTreeMap<u32, u32>) -> Clause {
    c.rename(|v| match v.domain_index() {
        Some(d) => v.with_domain(Some(*map.get(&d).unwrap_or(&d))),
        None => v,
    })
}

/// All `size`-subsets of `[m]` in lexicographic order.
pub fn subsets(m: u32, size: usize) -> Vec<Vec<u32>> {
    fn go(start: u32, m: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=m {
            if (m - i + 1) < left as u32 {
                break;
            }
            cur.push(i);
            go(i + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, m, size, &mut Vec::new(), &mut out);
    out
}

/// Extracts the canonical representatives and checks that the formula is
/// invariant under every permutation of its domain.
pub fn symmetric_template(f: &CnfFormula) -> Result<SymmetricTemplate, FormulaError> {
    let m = f.domain_size().unwrap_or(0);
    let width = f.domain_width();
    let mut parts = vec![BTreeSet::new(); width + 1];
    for c in f.clauses() {
        let idx = c.domain_indices();
        if idx.iter().copied().eq(1..=idx.len() as u32) {
            parts[idx.len()].insert(c.clone());
        }
    }

    // Each representative set must be closed under permutations of [η];
    // adjacent transpositions generate them.
    for (eta, part) in parts.iter().enumerate() {
        for t in 1..eta as u32 {
            let map: BTreeMap<u32, u32> = [(t, t + 1), (t + 1, t)].into();
            for c in part {
                let image = rename_domain(c, &map);
                if !part.contains(&image) {
                    return Err(FormulaError::NotSymmetric(SymmetryWitness {
                        mapping: vec![(t, t + 1), (t + 1, t)],
                        missing: image,
                    }));
                }
            }
        }
    }

    // Every clause must be an order-preserving copy of a representative.
    for c in f.clauses() {
        let idx: Vec<u32> = c.domain_indices().into_iter().collect();
        let map: BTreeMap<u32, u32> = idx
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, i as u32 + 1))
            .collect();
        let image = rename_domain(c, &map);
        if !parts[idx.len()].contains(&image) {
            return Err(FormulaError::NotSymmetric(SymmetryWitness {
                mapping: map.into_iter().collect(),
                missing: image,
            }));
        }
    }
    let template = SymmetricTemplate {
        parts,
        source_domain: m,
    };
    // And every copy of a representative must be present.
    for (eta, part) in template.parts.iter().enumerate() {
        for target in subsets(m, eta) {
            let map: BTreeMap<u32, u32> = (1..=eta as u32).zip(target.iter().copied()).collect();
            for c in part {
                let image = rename_domain(c, &map);
                if !f.contains(&image) {
                    return Err(FormulaError::NotSymmetric(SymmetryWitness {
                        mapping: map.into_iter().collect(),
                        missing: image,
                    }));
                }
            }
        }
    }
    Ok(template)
}

/// Instantiates every representative on every subset of `[m]` of its arity.
pub fn generalize_domain(t: &SymmetricTemplate, m: u32) -> Result<CnfFormula, FormulaError> {
    if (m as usize) < t.domain_width() {
        return Err(FormulaError::DomainTooSmall {
            needed: t.domain_width(),
            got: m,
        });
    }
    let mut clauses = Vec::new();
    for (eta, part) in t.parts.iter().enumerate() {
        for target in subsets(m, eta) {
            let map: BTreeMap<u32, u32> = (1..=eta as u32).zip(target.iter().copied()).collect();
            clauses.extend(part.iter().map(|c| rename_domain(c, &map)));
        }
    }
    Ok(CnfFormula::new(clauses, Some(m)))
}

/// Threshold formula over `s_1..s_m` plus, for each clause `C` of `F[m]`,
/// the selectable clause `¬s_{i_1} ∨ … ∨ ¬s_{i_η} ∨ C` over the indices `C`
/// mentions.
pub fn relativize(f: &CnfFormula, k: u32, m: u32) -> Result<CnfFormula, FormulaError> {
    let template = symmetric_template(f)?;
    relativize_template(&template, k, m)
}

pub fn relativize_template(
    template: &SymmetricTemplate,
    k: u32,
    m: u32,
) -> Result<CnfFormula, FormulaError> {
    if k == 0 || k > m {
        return Err(FormulaError::InvalidParameters(format!(
            "relativization needs 1 <= k <= m, got k={k}, m={m}"
        )));
    }
    let base = generalize_domain(template, m)?;
    let mut clauses = threshold_clauses(k, m);
    for c in base.clauses() {
        clauses.push(selectable(c));
    }
    let mut out = CnfFormula::new(clauses, Some(m)).with_provenance(
        Provenance::new("relativize").param("k", k).param("m", m),
    );
    out.register_vars(base.vars().iter().copied());
    out.relativization = Some(RelativizationInfo { k, m });
    Ok(out)
}

/// `C` guarded by the negated selectors of the indices it mentions.
pub fn selectable(c: &Clause) -> Clause {
    c.union(&Clause::new(c.domain_indices().into_iter().map(|i| Lit::neg(vars::selector(i)))).expect("negative literals"))
        .expect("selectors are fresh variables")
}
