//! Reference-element bases, quadratures and operators.

mod basis;
mod operators;
pub mod quadrature;

pub use basis::Basis1D;
pub use operators::{build_fr_filter, default_c_plus, LineOperators, ReferenceOperators, StackedOperators};
