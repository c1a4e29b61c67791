//! Invariant integration on the Lie supergroups OSp(m|2n), U(p|q) and the
//! superspace UOSp(m|2n).

pub mod charts;
pub mod cli;
pub mod grassmann;
pub mod groups;
pub mod integration;
pub mod matrix;
pub mod superalgebra;
pub mod supermatrix;
pub mod symbols;
