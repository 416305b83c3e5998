//! Random restrictions of relativized formulas and the monomial shrinkage
//! experiment.

mod shrinkage;

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{vars, PartialAssignment, VarKind};
use crate::formulas::{Clause, CnfFormula};

pub use shrinkage::{
    default_bound, exact_survival, shrinkage_experiment, size_lower_bound, survivor_uniformity,
    tail_bound, union_bound, BoundComponents, ShrinkageReport, UniformityReport,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RestrictionError {
    #[error("formula carries no relativization parameters")]
    NotRelativized,
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("probability bound must lie in (0, 1], got {0}")]
    InvalidBound(String),
}

/// A partial assignment from the distribution: a surviving `k`-subset `D`
/// of `[m]`, its selectors, a satisfying threshold extension, and coins for
/// every other domain variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    pub k: u32,
    pub m: u32,
    /// `D`, sorted.
    pub survivors: Vec<u32>,
    pub assignment: PartialAssignment,
}

/// Uniform `k`-subset of `[m]`, sorted.
pub(crate) fn sample_survivors(rng: &mut ChaCha8Rng, m: u32, k: u32) -> Vec<u32> {
    let mut d: Vec<u32> = sample(rng, m as usize, k as usize)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    d.sort_unstable();
    d
}

/// Samples `ρ` for a relativized formula. The threshold extension is the
/// canonical one: the `i`-th counter points at the `i`-th survivor, and its
/// chain `y_{i,j}` is 1 exactly below that survivor.
pub fn sample_restriction(f: &CnfFormula, seed: u64) -> Result<Restriction, RestrictionError> {
    let info = f.relativization.ok_or(RestrictionError::NotRelativized)?;
    let (k, m) = (info.k, info.m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sample_survivors(&mut rng, m, k);

    let mut rho = PartialAssignment::new();
    for iota in 1..=m {
        rho.insert(vars::selector(iota), d.contains(&iota));
    }
    for (i, &target) in d.iter().enumerate() {
        let i = i as u32 + 1;
        for j in 1..=m {
            rho.insert(vars::thr_p(i, j), j == target);
        }
        for j in 0..=m {
            rho.insert(vars::thr_y(i, j), j < target);
        }
    }
    for &v in f.vars() {
        if rho.contains_key(&v) || v.kind() == VarKind::S {
            continue;
        }
        if let Some(iota) = v.domain_index() {
            if !d.contains(&iota) {
                rho.insert(v, rng.gen::<bool>());
            }
        }
    }
    Ok(Restriction {
        k,
        m,
        survivors: d,
        assignment: rho,
    })
}

pub fn apply_restriction(f: &CnfFormula, rho: &Restriction) -> CnfFormula {
    f.restrict(&rho.assignment)
}

/// Renames the survivors `D` onto `[k]` in increasing order.
pub fn rename_to_base(f: &CnfFormula, rho: &Restriction) -> CnfFormula {
    let map: BTreeMap<u32, u32> = rho
        .survivors
        .iter()
        .enumerate()
        .map(|(i, &d)| (d, i as u32 + 1))
        .collect();
    let renamed = f.rename(|v| match v.domain_index() {
        Some(i) => v.with_domain(Some(map.get(&i).copied().unwrap_or(i))),
        None => v,
    });
    CnfFormula::new(renamed.clauses().iter().cloned(), Some(rho.k))
        .with_provenance(f.provenance.clone())
}

/// Outcome of comparing `F_rel|ρ` with `F[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RecoveryWitness {
    /// Domain renaming `D[i] ↦ i` under which the two clause sets coincide.
    Isomorphic { mapping: Vec<(u32, u32)> },
    /// A clause present on one side only, after renaming.
    Mismatch { clause: String, only_in: String },
}

impl RecoveryWitness {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, RecoveryWitness::Isomorphic { .. })
    }
}

pub fn check_recovers_base(f_rel: &CnfFormula, rho: &Restriction, f_k: &CnfFormula) -> RecoveryWitness {
    let restricted = rename_to_base(&apply_restriction(f_rel, rho), rho);
    let mismatch = |c: &Clause, side: &str| RecoveryWitness::Mismatch {
        clause: c.to_string(),
        only_in: side.to_string(),
    };
    if let Some(c) = restricted.clauses().difference(f_k.clauses()).next() {
        return mismatch(c, "restricted");
    }
    if let Some(c) = f_k.clauses().difference(restricted.clauses()).next() {
        return mismatch(c, "base");
    }
    RecoveryWitness::Isomorphic {
        mapping: rho
            .survivors
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, i as u32 + 1))
            .collect(),
    }
}
