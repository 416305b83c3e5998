//! DIMACS CNF with a comment header carrying provenance and variable names.
//!
//! ```text
//! c generator gen-clique
//! c param k 3
//! c domain 3
//! c varmap 1 x_d1_1 1
//! p cnf 12 40
//! -1 -5 0
//! ```
//!
//! Variables are numbered in sorted [`VarId`] order. A file without `varmap`
//! lines is read with variable `i` named `x_i`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::algebra::{vars, VarId};
use crate::error::ParseError;

use super::{Clause, CnfFormula, Lit, Provenance, RelativizationInfo};

/// Bijection between symbolic variables and positive DIMACS ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarMap {
    to_id: BTreeMap<VarId, i64>,
    to_var: BTreeMap<i64, VarId>,
}

impl VarMap {
    pub fn for_formula(f: &CnfFormula) -> Self {
        let mut m = VarMap::default();
        for (i, &v) in f.vars().iter().enumerate() {
            m.insert(i as i64 + 1, v);
        }
        m
    }

    fn insert(&mut self, id: i64, v: VarId) {
        self.to_id.insert(v, id);
        self.to_var.insert(id, v);
    }

    pub fn id(&self, v: VarId) -> Option<i64> {
        self.to_id.get(&v).copied()
    }

    pub fn var(&self, id: i64) -> Option<VarId> {
        self.to_var.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.to_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_id.is_empty()
    }

    pub fn encode_lit(&self, l: Lit) -> Option<i64> {
        self.id(l.var).map(|i| if l.positive { i } else { -i })
    }

    pub fn decode_lit(&self, x: i64) -> Option<Lit> {
        self.var(x.abs()).map(|v| Lit::new(v, x > 0))
    }
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let map = VarMap::for_formula(f);
    let mut out = String::new();
    let p = &f.provenance;
    if !p.generator.is_empty() {
        writeln!(out, "c generator {}", p.generator).unwrap();
    }
    for (k, v) in &p.params {
        writeln!(out, "c param {k} {v}").unwrap();
    }
    if let Some(s) = p.seed {
        writeln!(out, "c seed {s}").unwrap();
    }
    if let Some(d) = f.domain_size() {
        writeln!(out, "c domain {d}").unwrap();
    }
    if let Some(r) = f.relativization {
        writeln!(out, "c relativized {} {}", r.k, r.m).unwrap();
    }
    for (&v, &id) in &map.to_id {
        match v.domain_index() {
            Some(d) => writeln!(out, "c varmap {id} {v} {d}").unwrap(),
            None => writeln!(out, "c varmap {id} {v} -").unwrap(),
        }
    }
    writeln!(out, "p cnf {} {}", map.len(), f.len()).unwrap();
    for c in f.clauses() {
        for &l in c.lits() {
            write!(out, "{} ", map.encode_lit(l).expect("registered")).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

fn parse_num<T: std::str::FromStr>(s: Option<&str>, what: &str, line: usize) -> Result<T, ParseError> {
    s.and_then(|t| t.parse().ok())
        .ok_or_else(|| ParseError::new(format!("line {line}: bad {what}")))
}

pub fn parse_dimacs(text: &str) -> Result<(CnfFormula, VarMap), ParseError> {
    let mut provenance = Provenance::default();
    let mut domain = None;
    let mut relativization = None;
    let mut map = VarMap::default();
    let mut header: Option<(usize, usize)> = None;
    let mut raw: Vec<Vec<i64>> = Vec::new();
    let mut current = Vec::new();

    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        let line = line.trim();
        if line.is_empty() || line == "%" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let rest = rest.trim_start();
            let mut words = rest.splitn(2, ' ');
            let key = words.next().unwrap_or("");
            let val = words.next().unwrap_or("").trim();
            match key {
                "generator" => provenance.generator = val.to_string(),
                "param" => {
                    let (k, v) = val.split_once(' ').unwrap_or((val, ""));
                    provenance.params.push((k.to_string(), v.to_string()));
                }
                "seed" => provenance.seed = Some(parse_num(Some(val), "seed", n)?),
                "domain" => domain = Some(parse_num(Some(val), "domain", n)?),
                "relativized" => {
                    let mut it = val.split_whitespace();
                    relativization = Some(RelativizationInfo {
                        k: parse_num(it.next(), "k", n)?,
                        m: parse_num(it.next(), "m", n)?,
                    });
                }
                "varmap" => {
                    let mut it = val.split_whitespace();
                    let id: i64 = parse_num(it.next(), "variable id", n)?;
                    let name = it
                        .next()
                        .ok_or_else(|| ParseError::new(format!("line {n}: missing name")))?;
                    let v: VarId = name.parse()?;
                    if id <= 0 || map.var(id).is_some() || map.id(v).is_some() {
                        return Err(ParseError::new(format!("line {n}: duplicate varmap")));
                    }
                    map.insert(id, v);
                }
                _ => {}
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let mut it = rest.split_whitespace();
            if it.next() != Some("cnf") {
                return Err(ParseError::new(format!("line {n}: expected 'p cnf'")));
            }
            header = Some((
                parse_num(it.next(), "variable count", n)?,
                parse_num(it.next(), "clause count", n)?,
            ));
            continue;
        }
        if header.is_none() {
            return Err(ParseError::new(format!("line {n}: clause before header")));
        }
        for tok in line.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| ParseError::new(format!("line {n}: bad literal {tok:?}")))?;
            if x == 0 {
                raw.push(std::mem::take(&mut current));
            } else {
                current.push(x);
            }
        }
    }
    if !current.is_empty() {
        return Err(ParseError::new("last clause is not terminated by 0"));
    }
    let (nvars, nclauses) = header.ok_or_else(|| ParseError::new("missing 'p cnf' header"))?;
    if raw.len() != nclauses {
        return Err(ParseError::new(format!(
            "header announces {nclauses} clauses, found {}",
            raw.len()
        )));
    }
    if map.is_empty() {
        for i in 1..=nvars as i64 {
            map.insert(i, vars::xor_var(i as u32));
        }
    }
    let mut clauses = Vec::with_capacity(raw.len());
    for lits in raw {
        let mut c = Vec::with_capacity(lits.len());
        for x in lits {
            if x.unsigned_abs() as usize > nvars {
                return Err(ParseError::new(format!("literal {x} exceeds {nvars} variables")));
            }
            c.push(
                map.decode_lit(x)
                    .ok_or_else(|| ParseError::new(format!("variable {} has no name", x.abs())))?,
            );
        }
        clauses.push(Clause::new(c).map_err(|e| ParseError::new(e.to_string()))?);
    }
    let mut f = CnfFormula::new(clauses, domain).with_provenance(provenance);
    f.register_vars(map.to_var.values().copied());
    f.relativization = relativization;
    Ok((f, map))
}
