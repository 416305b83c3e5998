use std::collections::BTreeSet;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use super::{PolynomialConstraint, Relation, VarId};
use crate::error::ParseError;

/// Ordered list of polynomial constraints; certificates refer to its
/// entries by position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    constraints: Vec<PolynomialConstraint>,
}

impl ConstraintSystem {
    pub fn new(constraints: Vec<PolynomialConstraint>) -> Self {
        ConstraintSystem { constraints }
    }

    pub fn constraints(&self) -> &[PolynomialConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&PolynomialConstraint> {
        self.constraints.get(i)
    }

    pub fn push(&mut self, c: PolynomialConstraint) -> usize {
        self.constraints.push(c);
        self.constraints.len() - 1
    }

    pub fn position(&self, c: &PolynomialConstraint) -> Option<usize> {
        self.constraints.iter().position(|x| x == c)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.constraints.iter().flat_map(|c| c.poly.vars()).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| c.poly.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PolynomialConstraint> {
        self.constraints.iter()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SystemJson::from(self)).expect("system serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SystemJson::from(self)).expect("system serializes")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self, ParseError> {
        let doc: SystemJson = serde_json::from_value(v)?;
        doc.try_into()
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let doc: SystemJson = serde_json::from_str(text)?;
        doc.try_into()
    }
}

impl Index<usize> for ConstraintSystem {
    type Output = PolynomialConstraint;

    fn index(&self, i: usize) -> &PolynomialConstraint {
        &self.constraints[i]
    }
}

impl FromIterator<PolynomialConstraint> for ConstraintSystem {
    fn from_iter<T: IntoIterator<Item = PolynomialConstraint>>(iter: T) -> Self {
        ConstraintSystem::new(iter.into_iter().collect())
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    poly: String,
    rel: Relation,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    vars: Vec<VarId>,
    constraints: Vec<ConstraintJson>,
}

impl From<&ConstraintSystem> for SystemJson {
    fn from(sys: &ConstraintSystem) -> Self {
        SystemJson {
            vars: sys.vars().into_iter().collect(),
            constraints: sys
                .constraints
                .iter()
                .map(|c| ConstraintJson {
                    poly: c.poly.to_string(),
                    rel: c.relation,
                })
                .collect(),
        }
    }
}

impl TryFrom<SystemJson> for ConstraintSystem {
    type Error = ParseError;

    fn try_from(doc: SystemJson) -> Result<Self, ParseError> {
        let declared: BTreeSet<VarId> = doc.vars.into_iter().collect();
        let mut out = Vec::with_capacity(doc.constraints.len());
        for c in doc.constraints {
            let poly = c.poly.parse()?;
            out.push(PolynomialConstraint {
                poly,
                relation: c.rel,
            });
        }
        let sys = ConstraintSystem::new(out);
        if let Some(v) = sys.vars().into_iter().find(|v| !declared.contains(v)) {
            return Err(ParseError::new(format!("variable {v} used but not declared")));
        }
        Ok(sys)
    }
}
