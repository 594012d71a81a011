//! Sparse linear-program construction.
//!
//! [`VariableIndex`] maps named decision-variable families with full
//! subscripts onto contiguous column ranges; [`SparseProgram`] holds the
//! objective, a triplet constraint matrix, row senses, right-hand sides,
//! bounds, and labelled rows; [`assemble::build_program`] translates a
//! validated scenario plus cost coefficients into the program.
//!
//! Row and column ordering is deterministic: lexicographic over family,
//! then subscripts. Independent row families could be emitted concurrently
//! into the triplet sink because finalisation sorts triplets into a
//! canonical order; the bundled assembler is single-threaded and already
//! emits in canonical order.

pub mod assemble;
pub mod explicit;
mod index;
mod program;

pub use assemble::build_program;
pub use index::{RowFamily, RowLabel, VarFamily, VariableIndex};
pub use program::{
    row_residuals, write_lp_format, ResidualReport, RowResidual, Sense, SparseProgram,
};
