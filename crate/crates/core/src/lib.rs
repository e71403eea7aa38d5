//! High-order nodal solver for the compressible Euler equations on affine
//! Cartesian meshes.
//!
//! The semi-discretization is the entropy-stable split-form flux
//! reconstruction scheme built on hybridized summation-by-parts operators.
//! The flux reconstruction parameter `c` enters only through the modified
//! mass matrix `M + K(c)`, so a single code path covers discontinuous
//! Galerkin (`c = 0`), energy-stable FR (`c = c_+`) and the adaptive scheme,
//! where a modal shock sensor picks `c` per element.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command line
//! live in the companion `afr` crate.
#![no_std]
// std's inherent float methods shadow `num_traits::Float` in test builds.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod cases;
pub mod error;
pub mod euler;
pub mod field;
pub mod limiter;
pub mod mesh;
pub mod reference;
pub mod residual;
pub mod sensor;
pub mod solver;
pub mod time_march;

pub use error::{Error, Result};
/// Linear-algebra crate of the operator matrices.
pub use nalgebra;
pub use euler::{Dissipation, EulerState, FluxConfig, TwoPointFlux};
pub use field::SolutionField;
pub use mesh::{BoundaryKind, CartesianMesh};
pub use reference::{Basis1D, ReferenceOperators};
pub use sensor::{CParameterField, Scheme, SensorConfig, SensorUpdate, SensorVariable};
pub use solver::{Simulation, SolverConfig};
