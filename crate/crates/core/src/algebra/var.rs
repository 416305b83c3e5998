use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// Family letter of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    X,
    Y,
    Z,
    S,
    P,
}

impl VarKind {
    pub fn letter(self) -> char {
        match self {
            VarKind::X => 'x',
            VarKind::Y => 'y',
            VarKind::Z => 'z',
            VarKind::S => 's',
            VarKind::P => 'p',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'x' => VarKind::X,
            'y' => VarKind::Y,
            'z' => VarKind::Z,
            's' => VarKind::S,
            'p' => VarKind::P,
            _ => return None,
        })
    }
}

/// A boolean variable identified by its symbolic label.
///
/// The label is the identity: the same `x_d2_5` denotes the same variable in
/// every formula, polynomial and proof. The optional domain index records
/// which element of the domain the variable mentions.
///
/// Text form: the kind letter followed by `_`-separated segments, where a
/// leading `d<i>` segment is the domain index, e.g. `x_d2_5`, `s_d4`, `p_1_3`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    kind: VarKind,
    domain: Option<u32>,
    arity: u8,
    index: [u32; 2],
}

impl VarId {
    /// Panics if more than two extra indices are given.
    pub fn new(kind: VarKind, domain: Option<u32>, index: &[u32]) -> Self {
        assert!(index.len() <= 2, "at most two non-domain indices");
        let mut idx = [0; 2];
        idx[..index.len()].copy_from_slice(index);
        VarId {
            kind,
            domain,
            arity: index.len() as u8,
            index: idx,
        }
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    pub fn domain_index(&self) -> Option<u32> {
        self.domain
    }

    pub fn indices(&self) -> &[u32] {
        &self.index[..self.arity as usize]
    }

    /// Same variable with its domain index replaced.
    pub fn with_domain(&self, domain: Option<u32>) -> Self {
        VarId { domain, ..*self }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.letter())?;
        if let Some(d) = self.domain {
            write!(f, "_d{d}")?;
        }
        for i in self.indices() {
            write!(f, "_{i}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for VarId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::new(format!("malformed variable name `{s}`"));
        let mut segments = s.split('_');
        let head = segments.next().ok_or_else(bad)?;
        let mut chars = head.chars();
        let kind = chars.next().and_then(VarKind::from_letter).ok_or_else(bad)?;
        if chars.next().is_some() {
            return Err(bad());
        }
        let mut domain = None;
        let mut index = Vec::new();
        for (pos, seg) in segments.enumerate() {
            if let Some(d) = seg.strip_prefix('d') {
                if pos != 0 {
                    return Err(bad());
                }
                domain = Some(d.parse().map_err(|_| bad())?);
            } else {
                index.push(seg.parse().map_err(|_| bad())?);
            }
        }
        if index.len() > 2 {
            return Err(bad());
        }
        Ok(VarId::new(kind, domain, &index))
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VarId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand constructors for the variable families used by the generators.
pub mod vars {
    use super::{VarId, VarKind};

    /// `x_{i,v}`: vertex `v` chosen as the `i`-th clique member. Also the
    /// block-encoding variable of a vertex `v` in block `i`.
    pub fn clique_x(i: u32, v: u32) -> VarId {
        VarId::new(VarKind::X, Some(i), &[v])
    }

    /// `z_{i,j}`: extension variable of the at-least-one chain for index `i`.
    pub fn clique_z(i: u32, j: u32) -> VarId {
        VarId::new(VarKind::Z, Some(i), &[j])
    }

    pub fn selector(i: u32) -> VarId {
        VarId::new(VarKind::S, Some(i), &[])
    }

    pub fn thr_p(i: u32, j: u32) -> VarId {
        VarId::new(VarKind::P, None, &[i, j])
    }

    pub fn thr_y(i: u32, j: u32) -> VarId {
        VarId::new(VarKind::Y, None, &[i, j])
    }

    pub fn gadget_x(i: u32, j: u32) -> VarId {
        VarId::new(VarKind::X, None, &[i, j])
    }

    pub fn gadget_y(i: u32, j: u32) -> VarId {
        VarId::new(VarKind::Y, None, &[i, j])
    }

    /// Variable `i` of a parity system.
    pub fn xor_var(i: u32) -> VarId {
        VarId::new(VarKind::X, None, &[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in [
            vars::clique_x(2, 5),
            vars::clique_z(1, 0),
            vars::selector(4),
            vars::thr_p(1, 3),
            vars::xor_var(7),
        ] {
            let back: VarId = v.to_string().parse().unwrap();
            assert_eq!(back, v);
        }
        assert_eq!(vars::clique_x(2, 5).to_string(), "x_d2_5");
        assert_eq!(vars::selector(4).to_string(), "s_d4");
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "q_1", "x_1_2_3", "x_1_d2", "xx_1", "x_a"] {
            assert!(s.parse::<VarId>().is_err(), "{s}");
        }
    }
}
