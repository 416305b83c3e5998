use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::algebra::{PartialAssignment, VarId};

use super::FormulaError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: VarId,
    pub positive: bool,
}

impl Lit {
    pub fn new(var: VarId, positive: bool) -> Self {
        Lit { var, positive }
    }

    pub fn pos(var: VarId) -> Self {
        Lit::new(var, true)
    }

    pub fn neg(var: VarId) -> Self {
        Lit::new(var, false)
    }

    pub fn negated(self) -> Self {
        Lit::new(self.var, !self.positive)
    }

    /// Value under an assignment, `None` if the variable is unassigned.
    pub fn value(self, rho: &PartialAssignment) -> Option<bool> {
        rho.get(&self.var).map(|&b| b == self.positive)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "¬{}", self.var)
        }
    }
}

/// A disjunction of literals, stored sorted and deduplicated. Never contains
/// a variable in both polarities.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<Self, FormulaError> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if let Some(w) = lits.windows(2).find(|w| w[0].var == w[1].var) {
            return Err(FormulaError::Tautology(w[0].var));
        }
        Ok(Clause { lits })
    }

    /// Clause of negative literals, a common shape in the generators.
    pub fn negations(vars: impl IntoIterator<Item = VarId>) -> Self {
        Clause::new(vars.into_iter().map(Lit::neg)).expect("single polarity")
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn width(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn domain_indices(&self) -> BTreeSet<u32> {
        self.lits
            .iter()
            .filter_map(|l| l.var.domain_index())
            .collect()
    }

    pub fn domain_width(&self) -> usize {
        self.domain_indices().len()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn is_subset_of(&self, other: &Clause) -> bool {
        self.lits.iter().all(|&l| other.contains(l))
    }

    /// Disjunction of two clauses; fails if the result would be tautological.
    pub fn union(&self, other: &Clause) -> Result<Clause, FormulaError> {
        Clause::new(self.lits.iter().chain(other.lits.iter()).copied())
    }

    pub fn without(&self, lit: Lit) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    pub fn with(&self, lit: Lit) -> Result<Clause, FormulaError> {
        Clause::new(self.lits.iter().copied().chain(std::iter::once(lit)))
    }

    /// Literals of `self` missing from `other`.
    pub fn without_all(&self, other: &Clause) -> Clause {
        Clause::new(self.lits().iter().copied().filter(|&l| !other.contains(l)))
            .expect("subset of a clause")
    }

    /// `None` if `rho` satisfies the clause, otherwise the clause with
    /// falsified literals removed.
    pub fn restrict(&self, rho: &PartialAssignment) -> Option<Clause> {
        let mut kept = Vec::with_capacity(self.lits.len());
        for &l in &self.lits {
            match l.value(rho) {
                Some(true) => return None,
                Some(false) => {}
                None => kept.push(l),
            }
        }
        Some(Clause { lits: kept })
    }

    /// Truth value under a total assignment given as a lookup.
    pub fn satisfied_by(&self, value: impl Fn(VarId) -> bool) -> bool {
        self.lits.iter().any(|l| value(l.var) == l.positive)
    }

    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> Clause {
        Clause::new(self.lits.iter().map(|l| Lit::new(f(l.var), l.positive)))
            .expect("renaming is injective on the clause")
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l:?}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Generator name and parameters, carried into serialized headers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub generator: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(generator: &str) -> Self {
        Provenance {
            generator: generator.to_string(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }
}

/// Parameters recorded on a relativized formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelativizationInfo {
    pub k: u32,
    pub m: u32,
}

/// A CNF formula as a set of clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    clauses: BTreeSet<Clause>,
    vars: BTreeSet<VarId>,
    domain_size: Option<u32>,
    pub provenance: Provenance,
    pub relativization: Option<RelativizationInfo>,
}

impl CnfFormula {
    pub fn new(clauses: impl IntoIterator<Item = Clause>, domain_size: Option<u32>) -> Self {
        let clauses: BTreeSet<Clause> = clauses.into_iter().collect();
        let vars = clauses
            .iter()
            .flat_map(|c| c.lits().iter().map(|l| l.var))
            .collect();
        CnfFormula {
            clauses,
            vars,
            domain_size,
            provenance: Provenance::default(),
            relativization: None,
        }
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    /// Registers variables that do not occur in any clause.
    pub fn register_vars(&mut self, vars: impl IntoIterator<Item = VarId>) {
        self.vars.extend(vars);
    }

    pub fn clauses(&self) -> &BTreeSet<Clause> {
        &self.clauses
    }

    pub fn contains(&self, c: &Clause) -> bool {
        self.clauses.contains(c)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn vars(&self) -> &BTreeSet<VarId> {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn domain_size(&self) -> Option<u32> {
        self.domain_size
    }

    pub fn width(&self) -> usize {
        self.clauses.iter().map(Clause::width).max().unwrap_or(0)
    }

    pub fn domain_width(&self) -> usize {
        self.clauses
            .iter()
            .map(Clause::domain_width)
            .max()
            .unwrap_or(0)
    }

    /// Removes satisfied clauses and falsified literals.
    pub fn restrict(&self, rho: &PartialAssignment) -> CnfFormula {
        let mut out = CnfFormula::new(
            self.clauses.iter().filter_map(|c| c.restrict(rho)),
            self.domain_size,
        );
        out.register_vars(self.vars.iter().copied().filter(|v| !rho.contains_key(v)));
        out
    }

    pub fn satisfied_by(&self, value: impl Fn(VarId) -> bool) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(&value))
    }

    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> CnfFormula {
        let mut out = CnfFormula::new(self.clauses.iter().map(|c| c.rename(&f)), self.domain_size);
        out.register_vars(self.vars.iter().map(|&v| f(v)));
        out
    }

    /// Variables grouped by the domain index they mention.
    pub fn vars_by_domain(&self) -> BTreeMap<Option<u32>, Vec<VarId>> {
        let mut out: BTreeMap<Option<u32>, Vec<VarId>> = BTreeMap::new();
        for &v in &self.vars {
            out.entry(v.domain_index()).or_default().push(v);
        }
        out
    }
}

impl FromIterator<Clause> for CnfFormula {
    fn from_iter<T: IntoIterator<Item = Clause>>(iter: T) -> Self {
        CnfFormula::new(iter, None)
    }
}
