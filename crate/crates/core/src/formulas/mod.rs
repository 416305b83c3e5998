//! Generators for the clause and constraint families, plus DIMACS I/O.

mod clause;
mod clique;
pub mod dimacs;
mod graph;
mod symmetric;
mod threshold;
mod xor;

use thiserror::Error;

use crate::algebra::VarId;

pub use clause::{Clause, CnfFormula, Lit, Provenance, RelativizationInfo};
pub use clique::{gen_block, gen_clique};
pub use graph::Graph;
pub use symmetric::{
    generalize_domain, relativize, relativize_template, selectable, subsets, symmetric_template,
    SymmetricTemplate, SymmetryWitness,
};
pub use threshold::{gen_bruteforce_gadget, gen_threshold};
pub use xor::{
    build_xor_graph, encode_xor, gen_random_3xor, max_satisfiable, XorEquation, XorGraph,
    XorSystem, MAX_SWEEP_VARS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("clause contains {0} in both polarities")]
    Tautology(VarId),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph has no block partition")]
    MissingPartition,
    #[error("partition has {found} blocks, expected {expected}")]
    PartitionSize { expected: usize, found: usize },
    #[error("invalid parity system: {0}")]
    InvalidXor(String),
    #[error("too many {what}: {got} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("{equations} equations cannot be split into {k} equal groups")]
    Divisibility { k: usize, equations: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("domain of size {got} is smaller than the domain width {needed}")]
    DomainTooSmall { needed: usize, got: u32 },
    #[error("formula is not symmetric: renaming {:?} maps a clause to {} which is missing", .0.mapping, .0.missing)]
    NotSymmetric(SymmetryWitness),
}
