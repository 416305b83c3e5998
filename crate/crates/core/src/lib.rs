//! Formula families, resolution refutations and sums-of-squares certificates
//! over exact multilinear polynomials.

pub mod algebra;
pub mod error;
pub mod formulas;
pub mod oracle;
pub mod resolution;
pub mod restriction;
pub mod sos;

pub use error::ParseError;
